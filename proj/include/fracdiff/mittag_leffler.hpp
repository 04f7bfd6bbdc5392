#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "fracdiff/quadrature.hpp"

namespace fracdiff {
namespace ml_detail {

// Published region boundaries; the acceptance suite enforces agreement of
// adjacent methods across the overlap bands.
inline constexpr double kSeriesLimit = 5.0;      // series used for |z| <= 5
inline constexpr double kAsymptoticLimit = -20.0;  // asymptotic used for z <= -20

/// Power series sum_m z^m / Gamma(beta m + 1) in extended precision.
/// Returns nothing when alternating-term cancellation would eat the
/// accuracy target (caller falls through to the integral representation).
inline std::optional<double> series(double beta, double z) {
    long double sum = 0.0L, pw = 1.0L, max_term = 0.0L;
    const long double zl = z;
    for (int m = 0; m < 4000; ++m) {
        const long double term = pw / std::tgamma(static_cast<long double>(beta) * m + 1.0L);
        sum += term;
        max_term = std::max(max_term, std::abs(term));
        if (m > 4 && std::abs(term) < 1e-22L * std::max(std::abs(sum), 1.0L)) {
            const long double loss =
                max_term * 1.1e-19L / std::max(std::abs(sum), 1e-300L);
            if (loss < 1e-12L) return static_cast<double>(sum);
            return std::nullopt;
        }
        pw *= zl;
        if (std::abs(pw) > 1e4000L) return std::nullopt;
    }
    return std::nullopt;
}

/// 1/Gamma(x) with poles mapped to 0; log-space via reflection for x <= 0.5
/// so huge intermediate Gammas cannot overflow. sin(pi x) is computed from
/// the reduced argument so that exact non-positive integers give exactly 0.
inline double reciprocal_gamma(double x, double extra_log = 0.0) {
    if (x > 0.5) return std::exp(extra_log - std::lgamma(x));
    const double nearest = std::round(x);
    const double frac = x - nearest;
    if (frac == 0.0) return 0.0;
    double s = std::sin(std::numbers::pi * frac);
    if (static_cast<long long>(nearest) % 2 != 0) s = -s;
    const double ln_mag = std::log(std::abs(s)) + std::lgamma(1.0 - x) - std::log(std::numbers::pi);
    const double v = std::exp(ln_mag + extra_log);
    return s > 0.0 ? v : -v;
}

/// Algebraic asymptotic series -sum_{m>=1} z^{-m}/Gamma(1 - beta m),
/// truncated at the smallest term. Valid for 0 < beta < 1, z << 0; returns
/// nothing unless the truncation bound is comfortably below the target.
inline std::optional<double> asymptotic(double beta, double z) {
    double sum = 0.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    const double x = -z;
    const double ln_az = std::log(x);
    // envelope term ratio ~ (beta m)^beta / x starts growing past this m
    const double m_onset = std::pow(x, 1.0 / beta) / beta;
    const int m_max = static_cast<int>(std::min(400.0, m_onset + 2.0));
    for (int m = 1; m <= m_max; ++m) {
        const double arg = 1.0 - beta * m;
        const double rg = reciprocal_gamma(arg, -m * ln_az);
        if (rg == 0.0) continue;  // reciprocal-Gamma pole: the term is absent
        const double term = -((m % 2 == 0) ? rg : -rg);  // z^{-m} = (-1)^m |z|^{-m}
        const double mag = std::abs(term);
        // terms whose Gamma argument sits next to a pole dip artificially and
        // must not drive the optimal-truncation test
        const bool near_pole = std::abs(arg - std::round(arg)) < 0.05;
        if (!near_pole && mag >= prev_mag) {  // past the optimal truncation point
            if (prev_mag <= 1e-12 * std::abs(sum)) return sum;
            return std::nullopt;
        }
        sum += term;
        if (mag < 1e-18 * std::abs(sum)) return sum;
        if (!near_pole) prev_mag = mag;
    }
    if (prev_mag <= 1e-12 * std::abs(sum)) return sum;
    return std::nullopt;
}

/// Spectral (branch-cut) integral for 0 < beta < 1, z = -x < 0, written in
/// the substituted variable w = r^beta which removes the endpoint
/// singularity:
///   E_beta(-x) = x sin(beta pi)/(beta pi) *
///                \int_0^inf exp(-w^(1/beta)) / (w^2 + 2 x w cos(beta pi) + x^2) dw.
inline double spectral_integral(double beta, double z) {
    const double x = -z;
    const double c = std::cos(std::numbers::pi * beta);
    const double upper = std::pow(45.0, beta);
    const auto f = [&](double w) {
        return std::exp(-std::pow(w, 1.0 / beta)) / ((w + x * c) * (w + x * c) +
                                                     x * x * (1.0 - c * c));
    };
    const auto q = integrate_adaptive(f, 0.0, upper, 1e-16, 1e-12, 4000);
    return x * std::sin(std::numbers::pi * beta) / (beta * std::numbers::pi) * q.value;
}

/// For 1 < beta < 2 the defining contour picks up a conjugate pole pair in
/// the left half plane in addition to the branch-cut integral.
inline double pole_plus_integral(double beta, double z) {
    const double x = -z;
    const double c = std::cos(std::numbers::pi * beta);
    const double x1b = std::pow(x, 1.0 / beta);
    const double pole = (2.0 / beta) * std::exp(x1b * std::cos(std::numbers::pi / beta)) *
                        std::cos(x1b * std::sin(std::numbers::pi / beta));
    const auto f = [&](double r) {
        const double rb = std::pow(r, beta);
        return std::pow(r, beta - 1.0) * std::exp(-r) /
               ((rb + x * c) * (rb + x * c) + x * x * (1.0 - c * c));
    };
    const auto q = integrate_adaptive(f, 0.0, 50.0, 1e-16, 1e-12, 4000);
    return pole + x * std::sin(std::numbers::pi * beta) / std::numbers::pi * q.value;
}

}  // namespace ml_detail

/// Mittag-Leffler function E_beta(z) = sum_m z^m / Gamma(beta m + 1) for
/// beta in (0, 2) and z <= 0, accurate to ~1e-10 relative. Series for
/// small |z|, algebraic asymptotics deep in the left tail, branch-cut
/// integral representation elsewhere and as the fallback whenever the
/// truncated expansions cannot certify the target accuracy.
inline double mittag_leffler(double beta, double z) {
    if (!(beta > 0.0) || !(beta < 2.0))
        throw std::invalid_argument("mittag_leffler: beta must lie in (0, 2)");
    if (z > 0.0) throw std::invalid_argument("mittag_leffler: z must be <= 0");
    if (z == 0.0) return 1.0;
    if (beta == 1.0) return std::exp(z);
    if (z >= -ml_detail::kSeriesLimit) {
        if (const auto s = ml_detail::series(beta, z)) return *s;
    }
    if (beta > 1.0) return ml_detail::pole_plus_integral(beta, z);
    if (z <= ml_detail::kAsymptoticLimit) {
        if (const auto a = ml_detail::asymptotic(beta, z)) return *a;
    }
    return ml_detail::spectral_integral(beta, z);
}

}  // namespace fracdiff
