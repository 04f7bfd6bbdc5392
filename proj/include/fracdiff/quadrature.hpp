#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace fracdiff {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
inline constexpr double kK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kK15Weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
void gk15(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kK15Nodes[i]);
        fv[14 - i] = f(c + h * kK15Nodes[i]);
    }
    fv[7] = f(c);
    double k = kK15Weights[7] * fv[7];
    double g = kG7Weights[3] * fv[7];
    for (int i = 0; i < 7; ++i) k += kK15Weights[i] * (fv[i] + fv[14 - i]);
    for (int i = 0; i < 3; ++i) g += kG7Weights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    kronrod = k * h;
    err = std::abs((k - g) * h);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over the finite interval [a, b].
/// Bisects until the local error estimate meets abs_tol + rel_tol*|I|.
template <typename F>
QuadratureResult integrate_adaptive(const F& f, double a, double b, double abs_tol = 1e-12,
                                    double rel_tol = 1e-11, int max_intervals = 20000) {
    struct Interval {
        double a, b, value, err;
    };
    double v0, e0;
    detail::gk15(f, a, b, v0, e0);
    std::vector<Interval> active{{a, b, v0, e0}};
    double total = v0, total_err = e0;
    int used = 1;
    while (used < max_intervals) {
        // split the interval with the largest error estimate
        std::size_t worst = 0;
        for (std::size_t i = 1; i < active.size(); ++i)
            if (active[i].err > active[worst].err) worst = i;
        if (total_err <= abs_tol + rel_tol * std::abs(total)) break;
        const Interval iv = active[worst];
        if (iv.b - iv.a < 1e-15 * (std::abs(iv.a) + std::abs(iv.b) + 1.0)) break;
        double vl, el, vr, er;
        const double mid = 0.5 * (iv.a + iv.b);
        detail::gk15(f, iv.a, mid, vl, el);
        detail::gk15(f, mid, iv.b, vr, er);
        total += vl + vr - iv.value;
        total_err += el + er - iv.err;
        active[worst] = {iv.a, mid, vl, el};
        active.push_back({mid, iv.b, vr, er});
        ++used;
    }
    return {total, total_err, total_err <= abs_tol + rel_tol * std::abs(total) + 1e-300};
}

namespace detail {

// Cell weights for \int_0^dt exp(-a(dt-x)) * linear(x) dx written as
// g(0)*A + g(dt)*B.  Series branch keeps small a*dt exact.
inline void exp_kernel_cell_weights(double theta, double dt, double& A, double& B) {
    if (std::abs(theta) < 0.5) {
        double a_acc = 0.0, b_acc = 0.0, pw = 1.0;
        double fact = 2.0;  // (j+2)! running value starting at 2!
        for (int j = 0;; ++j) {
            a_acc += pw * (j + 1) / fact;
            b_acc += pw / fact;
            pw *= -theta;
            fact *= (j + 3);
            if (std::abs(pw) < 1e-20) break;
        }
        A = dt * a_acc;
        B = dt * b_acc;
    } else {
        const double E = std::exp(-theta);
        A = dt * (1.0 - E - theta * E) / (theta * theta);
        B = dt * (theta - 1.0 + E) / (theta * theta);
    }
}

}  // namespace detail

/// Causal convolution C_n = \int_0^{t_n} exp(-a(t_n - t')) g(t') dt' on a
/// uniform grid, with g treated as piecewise linear and the exponential
/// kernel integrated exactly per cell (one-step recurrence, uniformly
/// stable in a*dt).
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> convolve_exp_kernel(
    double a, const Eigen::Vector<Scalar, Eigen::Dynamic>& g, double dt) {
    const Eigen::Index n = g.size();
    Eigen::Vector<Scalar, Eigen::Dynamic> out(n);
    if (n == 0) return out;
    const double theta = a * dt;
    double A, B;
    detail::exp_kernel_cell_weights(theta, dt, A, B);
    const double E = std::exp(-theta);
    out[0] = Scalar(0);
    for (Eigen::Index i = 1; i < n; ++i) out[i] = E * out[i - 1] + g[i - 1] * A + g[i] * B;
    return out;
}

/// L_n = \int_0^{t_n} ln(t_n - tau) g(tau) dtau for piecewise-linear g on a
/// uniform grid (t_0 = 0).  The logarithm is integrated exactly on every
/// cell, so the integrable singularity at tau -> t_n costs no accuracy.
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> convolve_log_kernel(
    const Eigen::Vector<Scalar, Eigen::Dynamic>& g, double dt) {
    const Eigen::Index n = g.size();
    Eigen::Vector<Scalar, Eigen::Dynamic> out(n);
    if (n == 0) return out;
    out[0] = Scalar(0);
    auto F0 = [](double u) { return u > 0.0 ? u * (std::log(u) - 1.0) : 0.0; };
    auto F1 = [](double u) { return u > 0.0 ? u * u * (0.5 * std::log(u) - 0.25) : 0.0; };
    for (Eigen::Index nidx = 1; nidx < n; ++nidx) {
        const double tn = static_cast<double>(nidx) * dt;
        Scalar acc(0);
        for (Eigen::Index i = 0; i < nidx; ++i) {
            const double u0 = tn - static_cast<double>(i) * dt;      // at tau_i
            const double u1 = u0 - dt;                               // at tau_{i+1}
            const Scalar slope = (g[i] - g[i + 1]) / dt;             // dg/du
            const Scalar alpha = g[i + 1] - slope * u1;
            acc += alpha * (F0(u0) - F0(u1)) + slope * (F1(u0) - F1(u1));
        }
        out[nidx] = acc;
    }
    return out;
}

/// S_n = \int_0^{t_n} exp(-a(t_n - t')) ln(t') dt' on a uniform grid.
/// Every cell integrates the logarithm exactly against the linear
/// interpolant of the exponential factor, so neither the ln singularity at
/// t' = 0 nor the curvature of ln near it costs accuracy.
inline Eigen::VectorXd exp_log_convolution(double a, double dt, Eigen::Index n) {
    Eigen::VectorXd out(n);
    if (n == 0) return out;
    out[0] = 0.0;  // defined by continuity; t=0 itself is excluded by callers
    const double E = std::exp(-a * dt);
    auto ln_int = [](double u) { return u > 0.0 ? u * (std::log(u) - 1.0) : 0.0; };
    auto u_ln_int = [](double u) { return u > 0.0 ? u * u * (0.5 * std::log(u) - 0.25) : 0.0; };
    for (Eigen::Index i = 1; i < n; ++i) {
        const double lo = static_cast<double>(i - 1) * dt;
        const double hi = static_cast<double>(i) * dt;
        const double i0 = ln_int(hi) - ln_int(lo);
        const double i1 = (u_ln_int(hi) - u_ln_int(lo)) - lo * i0;
        out[i] = E * out[i - 1] + E * i0 + (1.0 - E) / dt * i1;
    }
    return out;
}

/// \int_0^U u^p g(u) du, p > -1, with g sampled on the uniform nodes
/// u_i = i*U/(2m), interpolated by piecewise quadratics on node pairs and
/// the power kernel integrated exactly (product integration; the endpoint
/// singularity at u = 0 is absorbed into the exact moments).
template <typename Scalar>
Scalar power_kernel_integral(double p, const Eigen::Vector<Scalar, Eigen::Dynamic>& g, double U) {
    if (p <= -1.0) throw std::invalid_argument("power_kernel_integral: p must be > -1");
    const Eigen::Index n = g.size();
    if (n < 3 || n % 2 == 0)
        throw std::invalid_argument("power_kernel_integral: need an odd node count >= 3");
    const double h = U / static_cast<double>(n - 1);
    auto moment = [p](double a, double b, int j) {
        const double q = p + j + 1;
        return (std::pow(b, q) - std::pow(a, q)) / q;
    };
    Scalar acc(0);
    for (Eigen::Index i = 0; i + 2 < n; i += 2) {
        const double a = static_cast<double>(i) * h;
        const double b = a + 2.0 * h;
        const double mid = a + h;
        const Scalar c0 = g[i + 1];
        const Scalar c1 = (g[i + 2] - g[i]) / (2.0 * h);
        const Scalar c2 = (g[i + 2] - 2.0 * g[i + 1] + g[i]) / (2.0 * h * h);
        const double m0 = moment(a, b, 0);
        const double m1 = moment(a, b, 1);
        const double m2 = moment(a, b, 2);
        acc += c0 * m0 + c1 * (m1 - mid * m0) + c2 * (m2 - 2.0 * mid * m1 + mid * mid * m0);
    }
    return acc;
}

}  // namespace fracdiff
