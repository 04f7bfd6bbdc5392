#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "fracdiff/dispersion.hpp"
#include "fracdiff/evolution.hpp"
#include "fracdiff/fractional.hpp"
#include "fracdiff/grid.hpp"
#include "fracdiff/mittag_leffler.hpp"
#include "fracdiff/moments.hpp"

namespace fracdiff::cli {

namespace detail {

// Portable uniform in [0,1): fixed bit recipe so reports are byte-identical.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class CheckList {
public:
    void upper(const std::string& name, double value, double threshold) {
        add(name, value, threshold, "<=", value <= threshold);
    }
    void lower(const std::string& name, double value, double threshold) {
        add(name, value, threshold, ">=", value >= threshold);
    }
    void window(const std::string& name, double value, double lo, double hi) {
        nlohmann::ordered_json c;
        c["name"] = name;
        c["value"] = value;
        c["window"] = {lo, hi};
        const bool ok = value >= lo && value <= hi;
        c["pass"] = ok;
        all_pass_ = all_pass_ && ok;
        checks_.push_back(std::move(c));
    }
    nlohmann::ordered_json report(const std::string& suite) const {
        nlohmann::ordered_json j;
        j["suite"] = suite;
        j["checks"] = checks_;
        j["pass"] = all_pass_;
        return j;
    }
    bool all_pass() const { return all_pass_; }

private:
    void add(const std::string& name, double value, double threshold, const char* cmp, bool ok) {
        nlohmann::ordered_json c;
        c["name"] = name;
        c["value"] = value;
        c["threshold"] = threshold;
        c["comparison"] = cmp;
        c["pass"] = ok;
        all_pass_ = all_pass_ && ok;
        checks_.push_back(std::move(c));
    }
    nlohmann::ordered_json::array_t checks_;
    bool all_pass_ = true;
};

inline double l1_operator_error(double beta, double dt) {
    const auto n = static_cast<Eigen::Index>(std::llround(1.0 / dt)) + 1;
    const auto sig = TimeSignal<double>::sample(
        0.0, dt, n, [](double t) { return std::complex<double>(t * t, 0.0); });
    const auto d = caputo_derivative(sig, FracOrder(beta), 0.0);
    double err = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double t = sig.time(i);
        err = std::max(err, std::abs(d.samples[i].real() -
                                     2.0 * std::pow(t, 2.0 - beta) / std::tgamma(3.0 - beta)));
    }
    return err;
}

inline double gl_operator_error(double beta, double dt) {
    const auto n = static_cast<Eigen::Index>(std::llround(1.0 / dt)) + 1;
    const auto sig = TimeSignal<double>::sample(
        0.0, dt, n, [](double t) { return std::complex<double>(t * t, 0.0); });
    const auto d = rl_derivative(sig, FracOrder(beta), 0.0);
    const double t = sig.time(n - 1);
    return std::abs(d.samples[n - 1].real() -
                    2.0 * std::pow(t, 2.0 - beta) / std::tgamma(3.0 - beta));
}

inline nlohmann::ordered_json commutation_suite() {
    CheckList checks;
    const auto sig = TimeSignal<double>::sample(
        0.0, 1e-3, 3001, [](double t) { return std::complex<double>(t * t, 0.0); });
    for (const auto kind : {BaseFracKind::caputo, BaseFracKind::riemann_liouville}) {
        const char* tag = kind == BaseFracKind::caputo ? "caputo" : "riemann_liouville";
        const auto res = commutation_residual(kind, sig, 1.0, FracOrder(0.5));
        checks.upper(std::string(tag) + ".shifted_base", res.shifted_base, 1e-6);
        checks.lower(std::string(tag) + ".naive_commutator", res.naive_commutator, 0.1);
    }
    const std::vector<ExpMode> decaying{{1.0, std::complex<double>(-1.0, 0.0)}};
    for (const double a : {0.5, 1.0}) {
        const auto res = weyl_commutation_residual(decaying, FracOrder(0.5), a,
                                                   TimeGridSpec{0.0, 0.2, 11});
        checks.upper("weyl.residual(a=" + format_number(a) + ")", res.naive_commutator, 1e-8);
    }
    return checks.report("commutation");
}

inline nlohmann::ordered_json convergence_suite() {
    CheckList checks;
    for (const double beta : {0.3, 0.5, 0.8}) {
        const double e1 = l1_operator_error(beta, 1.0 / 64);
        const double e2 = l1_operator_error(beta, 1.0 / 128);
        const double order = std::log2(e1 / e2);
        checks.window("l1.order(beta=" + format_number(beta) + ")", order, 2.0 - beta - 0.2,
                      2.0 - beta + 0.2);
    }
    for (const double beta : {0.4, 0.7}) {
        const double e1 = gl_operator_error(beta, 1.0 / 64);
        const double e2 = gl_operator_error(beta, 1.0 / 128);
        const double order = std::log2(e1 / e2);
        checks.window("gruenwald_letnikov.order(beta=" + format_number(beta) + ")", order, 0.8,
                      1.2);
    }
    return checks.report("convergence");
}

inline nlohmann::ordered_json invariants_suite(std::uint64_t seed) {
    CheckList checks;
    std::mt19937_64 rng(seed);
    const SpatialGrid<double> grid(1, 256, 40.0);

    double roundtrip = 0.0, parseval = 0.0;
    bool mode0_bitwise = true;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXcd values(grid.node_count());
        for (Eigen::Index i = 0; i < values.size(); ++i)
            values[i] = std::complex<double>(2.0 * uniform01(rng) - 1.0,
                                             2.0 * uniform01(rng) - 1.0);
        const DensityField<double> field(grid, values);
        const auto spec = forward_transform(field);
        const auto back = inverse_transform(spec);
        roundtrip = std::max(roundtrip, (back.values - field.values).cwiseAbs().maxCoeff() /
                                            field.values.cwiseAbs().maxCoeff());
        const double lhs = grid.spacing() * field.values.squaredNorm();
        const double rhs = spec.modes.squaredNorm() / grid.length;
        parseval = std::max(parseval, std::abs(lhs - rhs) / std::abs(lhs));
        const auto q = quadrature(field);
        mode0_bitwise = mode0_bitwise && spec.modes[0].real() == q.real() &&
                        spec.modes[0].imag() == q.imag();
    }
    checks.upper("grid.round_trip", roundtrip, 1e-12);
    checks.upper("grid.parseval", parseval, 1e-10);
    checks.lower("grid.mode0_equals_quadrature", mode0_bitwise ? 1.0 : 0.0, 1.0);

    double ml_monotone = 1.0;
    for (const double beta : {0.5, 0.9}) {
        double prev = -1.0;
        for (int i = 200; i >= 0; --i) {
            const double v = mittag_leffler(beta, -50.0 * i / 200.0);
            if (v <= 0.0 || (prev >= 0.0 && v < prev)) ml_monotone = 0.0;
            prev = v;
        }
    }
    checks.lower("mittag_leffler.monotone_positive", ml_monotone, 1.0);

    double compose = 0.0;
    for (const double b1 : {0.3, 0.6, 0.9}) {
        for (const double b2 : {0.4, 0.7}) {
            const std::complex<double> s(-0.5 - 2.0 * uniform01(rng),
                                         4.0 * uniform01(rng) - 2.0);
            const auto lhs = weyl_mode_multiplier(s, FracOrder(b1)) *
                             weyl_mode_multiplier(s, FracOrder(b2));
            const int flips = FracOrder(b1 + b2).int_part - FracOrder(b1).int_part -
                              FracOrder(b2).int_part;
            const auto rhs = (flips % 2 == 0 ? 1.0 : -1.0) *
                             weyl_mode_multiplier(s, FracOrder(b1 + b2));
            compose = std::max(compose, std::abs(lhs - rhs) / std::abs(rhs));
        }
    }
    checks.upper("weyl.multiplier_composition", compose, 1e-12);

    bool basis_count = true;
    for (int rep = 0; rep < 10; ++rep) {
        const int deg = 2 + static_cast<int>(rng() % 4);
        Eigen::VectorXcd coeffs(deg + 1);
        for (Eigen::Index i = 0; i <= deg; ++i)
            coeffs[i] = std::complex<double>(2.0 * uniform01(rng) - 1.0,
                                             2.0 * uniform01(rng) - 1.0);
        coeffs[deg] += std::complex<double>(2.0, 0.0);  // keep the leading term alive
        basis_count = basis_count && ode_solution_basis(coeffs).constant_count() == deg;
    }
    checks.lower("dispersion.basis_constant_count", basis_count ? 1.0 : 0.0, 1.0);

    double evenness = 0.0;
    const auto weyl = DispersionRelation::weyl_fractional(0.5);
    const auto heat = DispersionRelation::heat();
    for (double k = 0.25; k < 4.0; k += 0.25) {
        evenness = std::max(evenness, std::abs(weyl.evaluate(k) - weyl.evaluate(-k)));
        evenness = std::max(evenness, std::abs(heat.evaluate(k) - heat.evaluate(-k)));
    }
    checks.upper("dispersion.even_symbols", evenness, 0.0);

    Eigen::VectorXd mean0(1), mean1(1);
    mean0[0] = 0.0;
    mean1[0] = 2.5;
    const auto ka = cumulants(make_gaussian(grid, mean0, 1.3), 4);
    const auto kb = cumulants(make_gaussian(grid, mean1, 1.3), 4);
    double equivariance = std::abs(kb(0, 1) - ka(0, 1) - 2.5);
    for (int order = 2; order <= 4; ++order)
        equivariance = std::max(equivariance, std::abs(kb(0, order) - ka(0, order)));
    checks.upper("moments.translation_equivariance", equivariance, 1e-10);

    auto j = checks.report("invariants");
    j["seed"] = seed;
    return j;
}

}  // namespace detail

inline nlohmann::ordered_json verify_suite(const std::string& suite, std::uint64_t seed) {
    if (suite == "commutation") return detail::commutation_suite();
    if (suite == "convergence") return detail::convergence_suite();
    if (suite == "invariants") return detail::invariants_suite(seed);
    throw ConfigError("suite: must be one of commutation, convergence, invariants");
}

}  // namespace fracdiff::cli
