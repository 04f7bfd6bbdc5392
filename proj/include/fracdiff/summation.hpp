#pragma once

#include <Eigen/Dense>
#include <complex>

namespace fracdiff {

/// Kahan compensated accumulator. Summation order is whatever order
/// add() is called in; every reduction that feeds a reported number
/// uses ascending index order so reruns are bit-identical.
template <typename T>
class KahanAccumulator {
public:
    void add(const T& value) {
        const T y = value - compensation_;
        const T t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    T value() const { return sum_; }

private:
    T sum_{};
    T compensation_{};
};

/// Compensated sum of a dense Eigen vector/array in ascending index order.
template <typename Derived>
typename Derived::Scalar kahan_sum(const Eigen::DenseBase<Derived>& v) {
    KahanAccumulator<typename Derived::Scalar> acc;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc.add(v(i));
    return acc.value();
}

}  // namespace fracdiff
