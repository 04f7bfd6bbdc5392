#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fracdiff/evolution.hpp"
#include "fracdiff/finite_difference.hpp"
#include "fracdiff/grid.hpp"
#include "fracdiff/summation.hpp"

namespace fracdiff {

/// Monomial multi-index, one entry per axis; total degree capped at 4.
struct MomentSpec {
    std::array<int, 2> alpha{0, 0};

    MomentSpec(int a0, int a1 = 0) : alpha{a0, a1} {
        if (a0 < 0 || a1 < 0) throw std::invalid_argument("MomentSpec: negative index");
        if (degree() > 4) throw std::invalid_argument("MomentSpec: supported order cap is 4");
    }
    int degree() const { return alpha[0] + alpha[1]; }
};

enum class MomentKind { raw, connected, variance };

/// One tracked moment (or the variance) sampled along an evolution run.
struct MomentSeries {
    MomentKind kind = MomentKind::variance;
    MomentSpec spec{0, 0};
    Eigen::VectorXd times;
    Eigen::VectorXcd values;
    std::vector<bool> divergent;  // per-time flag, set by mark_divergence
};

/// Expectation of prod_j (r^j)^(alpha_j), normalized by the field mass.
template <typename Scalar>
std::complex<Scalar> raw_moment(const DensityField<Scalar>& field, const MomentSpec& spec) {
    using Cplx = std::complex<Scalar>;
    const Cplx mass = quadrature(field);
    Scalar abs_scale = 0;
    {
        KahanAccumulator<Scalar> acc;
        for (Eigen::Index i = 0; i < field.values.size(); ++i)
            acc.add(std::abs(field.values[i]));
        Scalar cell = field.grid.spacing();
        if (field.grid.dim == 2) cell *= field.grid.spacing();
        abs_scale = cell * acc.value();
    }
    if (!(std::abs(mass) > Scalar(1e-12) * abs_scale))
        throw std::invalid_argument("raw_moment: field normalization is zero");
    for (int axis = field.grid.dim; axis < 2; ++axis)
        if (spec.alpha[axis] != 0)
            throw std::invalid_argument("raw_moment: multi-index exceeds grid dimension");
    KahanAccumulator<Cplx> acc;
    for (Eigen::Index flat = 0; flat < field.values.size(); ++flat) {
        const auto idx = field.grid.unflatten(flat);
        Scalar weight = 1;
        for (int axis = 0; axis < field.grid.dim; ++axis) {
            const Scalar x = field.grid.coordinate(idx[axis]);
            for (int p = 0; p < spec.alpha[axis]; ++p) weight *= x;
        }
        acc.add(weight * field.values[flat]);
    }
    Scalar cell = field.grid.spacing();
    if (field.grid.dim == 2) cell *= field.grid.spacing();
    return cell * acc.value() / mass;
}

/// Diagnostic route to the same moment through the spectrum:
/// [(i d/dk)^alpha F psi](0) / (F psi)(0), by high-order finite differences
/// on the mode lattice. The stencil spacing is pinned to 2 pi / L, so the
/// accuracy degrades for spectra with structure on that scale (mass far off
/// center, very narrow spectra); the real-space route stays primary.
template <typename Scalar>
std::complex<Scalar> raw_moment_spectral(const DensityField<Scalar>& field,
                                         const MomentSpec& spec, int stencil_half_width = 10) {
    using Cplx = std::complex<Scalar>;
    for (int axis = field.grid.dim; axis < 2; ++axis)
        if (spec.alpha[axis] != 0)
            throw std::invalid_argument("raw_moment_spectral: multi-index exceeds grid dimension");
    const SpectralField<Scalar> f = forward_transform(field);
    const int n = field.grid.points_per_axis;
    const int hw = stencil_half_width;
    if (2 * hw + 1 > n) throw std::invalid_argument("raw_moment_spectral: stencil exceeds grid");
    const double dk = 2.0 * std::numbers::pi / static_cast<double>(field.grid.length);
    std::array<Eigen::VectorXd, 2> w;
    for (int axis = 0; axis < field.grid.dim; ++axis)
        w[axis] = spec.alpha[axis] == 0 ? Eigen::VectorXd::Ones(1)
                                        : central_weights(spec.alpha[axis], hw, dk);
    auto slot = [n](int freq) { return freq >= 0 ? freq : freq + n; };
    Cplx acc(0);
    const int n0 = spec.alpha[0] == 0 ? 1 : 2 * hw + 1;
    const int n1 = (field.grid.dim == 2 && spec.alpha[1] != 0) ? 2 * hw + 1 : 1;
    for (int i = 0; i < n0; ++i) {
        const int f0 = spec.alpha[0] == 0 ? 0 : i - hw;
        for (int j = 0; j < n1; ++j) {
            const int f1 = (n1 == 1) ? 0 : j - hw;
            const double weight = w[0][spec.alpha[0] == 0 ? 0 : i] *
                                  (field.grid.dim == 2 && spec.alpha[1] != 0 ? w[1][j] : 1.0);
            Eigen::Index flat = slot(f0);
            if (field.grid.dim == 2) flat = static_cast<Eigen::Index>(slot(f0)) * n + slot(f1);
            acc += Scalar(weight) * f.modes[flat];
        }
    }
    std::complex<double> phase = 1.0;
    for (int p = 0; p < spec.degree(); ++p) phase *= std::complex<double>(0.0, 1.0);
    return Cplx(phase) * acc / f.modes[0];
}

/// Per-axis cumulants up to order 4 plus the variance trace
/// Var = sum_j kappa_2^(jj), from raw moments and the standard
/// moment-to-cumulant recursion.
template <typename Scalar>
struct CumulantSet {
    using Cplx = std::complex<Scalar>;
    int dim = 1;
    int max_order = 2;
    std::array<std::array<Cplx, 4>, 2> kappa{};  // [axis][order-1]
    Cplx variance{};

    Cplx operator()(int axis, int order) const { return kappa[axis][order - 1]; }
};

template <typename Scalar>
CumulantSet<Scalar> cumulants(const DensityField<Scalar>& field, int max_order = 4) {
    using Cplx = std::complex<Scalar>;
    if (max_order < 1 || max_order > 4)
        throw std::invalid_argument("cumulants: max_order must be in 1..4");
    CumulantSet<Scalar> out;
    out.dim = field.grid.dim;
    out.max_order = max_order;
    for (int axis = 0; axis < field.grid.dim; ++axis) {
        std::array<Cplx, 5> m{};
        m[0] = Cplx(1);
        for (int p = 1; p <= max_order; ++p) {
            MomentSpec spec = axis == 0 ? MomentSpec(p, 0) : MomentSpec(0, p);
            m[p] = raw_moment(field, spec);
        }
        auto& k = out.kappa[axis];
        k[0] = m[1];
        if (max_order >= 2) k[1] = m[2] - m[1] * m[1];
        if (max_order >= 3) k[2] = m[3] - Scalar(3) * m[2] * m[1] + Scalar(2) * m[1] * m[1] * m[1];
        if (max_order >= 4)
            k[3] = m[4] - Scalar(4) * m[3] * m[1] - Scalar(3) * m[2] * m[2] +
                   Scalar(12) * m[2] * m[1] * m[1] - Scalar(6) * m[1] * m[1] * m[1] * m[1];
    }
    if (max_order >= 2)
        for (int axis = 0; axis < field.grid.dim; ++axis) out.variance += out.kappa[axis][1];
    return out;
}

/// Variance along an evolution run (divergence flags start cleared; see
/// mark_divergence for the domain-doubling surrogate).
inline MomentSeries variance_series(const EvolutionResult& run) {
    MomentSeries series;
    series.kind = MomentKind::variance;
    series.times = run.times;
    series.values.resize(run.times.size());
    series.divergent.assign(static_cast<std::size_t>(run.times.size()), false);
    for (Eigen::Index i = 0; i < run.times.size(); ++i) {
        const DensityField<double> field = inverse_transform(run.snapshots[i]);
        series.values[i] = cumulants(field, 2).variance;
    }
    return series;
}

/// Raw-moment or per-axis cumulant series along a run.
inline MomentSeries moment_series(const EvolutionResult& run, const MomentSpec& spec,
                                  MomentKind kind) {
    if (kind == MomentKind::variance) return variance_series(run);
    MomentSeries series;
    series.kind = kind;
    series.spec = spec;
    series.times = run.times;
    series.values.resize(run.times.size());
    series.divergent.assign(static_cast<std::size_t>(run.times.size()), false);
    const bool axis1 = spec.alpha[0] == 0 && spec.alpha[1] > 0;
    const bool pure_axis = (spec.alpha[0] == 0) != (spec.alpha[1] == 0);
    if (kind == MomentKind::connected && !pure_axis)
        throw std::invalid_argument("moment_series: connected moments supported per axis");
    for (Eigen::Index i = 0; i < run.times.size(); ++i) {
        const DensityField<double> field = inverse_transform(run.snapshots[i]);
        if (kind == MomentKind::raw) {
            series.values[i] = raw_moment(field, spec);
        } else {
            const int order = spec.degree();
            series.values[i] = cumulants(field, order)(axis1 ? 1 : 0, order);
        }
    }
    return series;
}

/// Domain-doubling divergence surrogate: a time is flagged when the same
/// experiment run on a doubled box moves the value by more than rel_tol.
inline void mark_divergence(MomentSeries& series, const MomentSeries& doubled,
                            double rel_tol = 0.01) {
    if (series.times.size() != doubled.times.size())
        throw std::invalid_argument("mark_divergence: series have different lengths");
    for (Eigen::Index i = 0; i < series.times.size(); ++i) {
        const double scale = std::max({std::abs(series.values[i]), std::abs(doubled.values[i]),
                                       1e-12});
        if (std::abs(series.values[i] - doubled.values[i]) > rel_tol * scale)
            series.divergent[static_cast<std::size_t>(i)] = true;
    }
}

struct PowerLawFit {
    double amplitude = 0.0;  // C in C t^alpha
    double exponent = 0.0;   // fitted alpha
    double r_squared = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LinearFit fit_linear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_linear: need >= 2 points");
    const double xm = x.mean(), ym = y.mean();
    const double sxx = (x.array() - xm).square().sum();
    const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
    const double syy = (y.array() - ym).square().sum();
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    const double ss_res = (y.array() - fit.intercept - fit.slope * x.array()).square().sum();
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

/// Least squares for Var(t) - var0 ~ C t^alpha on (ln t, ln(Var - var0)).
inline PowerLawFit fit_power_law(const MomentSeries& series, double var0, double window_t_min,
                                 double window_t_max) {
    std::vector<double> xs, ys;
    for (Eigen::Index i = 0; i < series.times.size(); ++i) {
        const double t = series.times[i];
        if (t < window_t_min || t > window_t_max) continue;
        if (!(t > 0.0)) continue;
        const double excess = series.values[i].real() - var0;
        if (!(excess > 0.0))
            throw std::invalid_argument("fit_power_law: nonpositive excess variance in window");
        xs.push_back(std::log(t));
        ys.push_back(std::log(excess));
    }
    if (xs.size() < 8)
        throw std::invalid_argument("fit_power_law: need at least 8 points in the window");
    const Eigen::Map<const Eigen::VectorXd> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
    const LinearFit lin = fit_linear(x, y);
    PowerLawFit fit;
    fit.amplitude = std::exp(lin.intercept);
    fit.exponent = lin.slope;
    fit.r_squared = lin.r_squared;
    fit.t_min = window_t_min;
    fit.t_max = window_t_max;
    return fit;
}

/// Default fit window [t_total/4, t_total] (the power law is a late-time
/// statement; early transients are skipped).
inline PowerLawFit fit_power_law(const MomentSeries& series, double var0) {
    const double t_total = series.times[series.times.size() - 1];
    return fit_power_law(series, var0, 0.25 * t_total, t_total);
}

struct DegreeCheckReport {
    int bound = 0;                  // polynomial degree the theory allows
    double residual_at_bound = 0.0;    // relative l2 residual of the degree-bound fit
    double residual_above_bound = 0.0; // same with one extra degree
    double improvement_factor = 0.0;   // residual_at_bound / residual_above_bound
    bool pass = false;
};

namespace detail {

inline double poly_fit_residual(const Eigen::VectorXd& t, const Eigen::VectorXcd& y, int degree) {
    const Eigen::Index n = t.size();
    const double scale = std::max(t.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::MatrixXd vandermonde(n, degree + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            vandermonde(i, d) = p;
            p *= t[i] / scale;
        }
    }
    const auto qr = vandermonde.colPivHouseholderQr();
    const Eigen::VectorXd cr = qr.solve(y.real());
    const Eigen::VectorXd ci = qr.solve(y.imag());
    const double res = std::sqrt((vandermonde * cr - y.real()).squaredNorm() +
                                 (vandermonde * ci - y.imag()).squaredNorm());
    return res / std::max(y.norm(), 1e-300);
}

}  // namespace detail

/// Checks the polynomial-degree bound on a moment series: raw moments may
/// grow like a degree-deg(alpha) polynomial, connected ones at most linearly.
inline DegreeCheckReport polynomial_degree_check(const MomentSeries& series,
                                                 const MomentSpec& spec) {
    DegreeCheckReport report;
    report.bound = series.kind == MomentKind::raw ? spec.degree() : 1;
    if (series.times.size() < report.bound + 3)
        throw std::invalid_argument("polynomial_degree_check: need at least deg+3 points");
    report.residual_at_bound =
        detail::poly_fit_residual(series.times, series.values, report.bound);
    report.residual_above_bound =
        detail::poly_fit_residual(series.times, series.values, report.bound + 1);
    report.improvement_factor =
        report.residual_at_bound / std::max(report.residual_above_bound, 1e-300);
    report.pass = report.residual_at_bound <= 1e-4 && report.improvement_factor < 10.0;
    return report;
}

}  // namespace fracdiff
