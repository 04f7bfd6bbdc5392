#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace fracdiff {

/// Finite-difference weights for the m-th derivative at point x0 from
/// arbitrary nodes (Fornberg's recursion). Row m of the result holds the
/// weights for derivative order m, m = 0..max_order.
inline Eigen::MatrixXd fd_weights(double x0, const Eigen::VectorXd& nodes, int max_order) {
    const int n = static_cast<int>(nodes.size());
    if (max_order >= n)
        throw std::invalid_argument("fd_weights: need more nodes than derivative order");
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(max_order + 1, n);
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c(k, i) = c1 * (k * c(k - 1, i - 1) - c5 * c(k, i - 1)) / c2;
                c(0, i) = -c1 * c5 * c(0, i - 1) / c2;
            }
            for (int k = mn; k >= 1; --k)
                c(k, j) = (c4 * c(k, j) - k * c(k - 1, j)) / c3;
            c(0, j) = c4 * c(0, j) / c3;
        }
        c1 = c2;
    }
    return c;
}

/// Weights of the standard symmetric stencil {-w..w}*h for the m-th
/// derivative at 0.
inline Eigen::VectorXd central_weights(int order, int half_width, double h) {
    const int n = 2 * half_width + 1;
    Eigen::VectorXd nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = (i - half_width) * h;
    return fd_weights(0.0, nodes, order).row(order);
}

}  // namespace fracdiff
