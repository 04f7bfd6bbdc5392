// Acceptance suite: end-to-end reproduction of the closed-form claims this
// laboratory exists to demonstrate. Each criterion prints one PASS/FAIL line
// with its measured numbers and pinned tolerances; the process exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "fracdiff/dispersion.hpp"
#include "fracdiff/evolution.hpp"
#include "fracdiff/fractional.hpp"
#include "fracdiff/grid.hpp"
#include "fracdiff/mittag_leffler.hpp"
#include "fracdiff/moments.hpp"

using namespace fracdiff;
using Cplx = std::complex<double>;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(std::string id, std::string title, double runtime_budget_s)
        : id_(std::move(id)), title_(std::move(title)), budget_(runtime_budget_s),
          start_(std::chrono::steady_clock::now()) {}

    void require(bool ok, const std::string& detail) {
        pass_ = pass_ && ok;
        details_.push_back(std::string(ok ? "ok: " : "FAILED: ") + detail);
    }
    void require_le(const std::string& name, double value, double bound) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s = %.3e (<= %.3e)", name.c_str(), value, bound);
        require(value <= bound, buf);
    }
    void require_window(const std::string& name, double value, double lo, double hi) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s = %.6f (in [%.6f, %.6f])", name.c_str(), value, lo,
                      hi);
        require(value >= lo && value <= hi, buf);
    }

    ~Criterion() {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (budget_ > 0.0 && elapsed > budget_) {
            pass_ = false;
            char buf[120];
            std::snprintf(buf, sizeof(buf), "FAILED: runtime %.1fs exceeds %.0fs budget", elapsed,
                          budget_);
            details_.push_back(buf);
        }
        std::printf("[%s] %s %s (%.2fs)\n", pass_ ? "PASS" : "FAIL", id_.c_str(), title_.c_str(),
                    elapsed);
        for (const auto& d : details_) std::printf("       %s\n", d.c_str());
        if (!pass_) ++g_failures;
    }

private:
    std::string id_, title_;
    double budget_;
    std::chrono::steady_clock::time_point start_;
    bool pass_ = true;
    std::vector<std::string> details_;
};

DensityField<double> gaussian(const SpatialGrid<double>& grid, double mean, double sigma) {
    Eigen::VectorXd m(1);
    m[0] = mean;
    return make_gaussian(grid, m, sigma);
}

Eigen::VectorXd linspace(double lo, double hi, int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

SpatialGrid<double> acceptance_grid() { return SpatialGrid<double>(1, 512, 60.0); }

void a1_ordinary_linearity() {
    Criterion c("A1", "ordinary diffusion: variance is exactly linear", 5.0);
    const auto psi0 = gaussian(acceptance_grid(), 0.0, 1.0);
    const auto run =
        spectral_propagate(psi0, DispersionRelation::heat(), linspace(0.0, 10.0, 100));
    const auto variance = variance_series(run);
    const double var0 = variance.values[0].real();
    const auto fit = fit_power_law(variance, var0);  // default window [2.5, 10]
    c.require_window("alpha", fit.exponent, 0.995, 1.005);
    c.require_window("C", fit.amplitude, 2.0 * 0.995, 2.0 * 1.005);
}

void a2_caputo_exact_law() {
    for (const double beta : {0.5, 0.7, 0.9}) {
        char title[96];
        std::snprintf(title, sizeof(title),
                      "Caputo anomaly: Var - Var0 = 2 d t^b / Gamma(1+b), beta=%.1f", beta);
        Criterion c("A2", title, 10.0);
        const auto psi0 = gaussian(acceptance_grid(), 0.0, 1.0);
        const auto run = caputo_exact_spectral(psi0, FracOrder(beta), linspace(0.0, 10.0, 101));
        const auto variance = variance_series(run);
        const double var0 = variance.values[0].real();
        double worst = 0.0;
        for (Eigen::Index i = 0; i < variance.times.size(); ++i) {
            const double t = variance.times[i];
            if (t < 0.5) continue;
            const double law = 2.0 * std::pow(t, beta) / std::tgamma(1.0 + beta);
            worst = std::max(worst, std::abs(variance.values[i].real() - var0 - law) / law);
        }
        c.require_le("max pointwise relative deviation (t in [0.5,10])", worst, 0.005);
        const auto fit = fit_power_law(variance, var0);
        c.require_window("fitted alpha", fit.exponent, beta - 0.01, beta + 0.01);
    }
}

void a3_l1_cross_validation() {
    Criterion c("A3", "L1 stepping cross-validates the exact solver (beta=0.7)", 60.0);
    const auto psi0 = gaussian(acceptance_grid(), 0.0, 1.0);
    const FracOrder beta(0.7);
    const auto l1 = caputo_l1_evolve(psi0, beta, 1e-3, 1000, 10);
    Eigen::VectorXd t_end(1);
    t_end[0] = 1.0;
    const auto exact = caputo_exact_spectral(psi0, beta, t_end);
    const double gap = (l1.snapshots.back().modes - exact.snapshots[0].modes).cwiseAbs().maxCoeff() /
                       exact.snapshots[0].modes.cwiseAbs().maxCoeff();
    c.require_le("max relative spectral error at t=1", gap, 1e-3);
    const auto variance = variance_series(l1);
    const auto fit = fit_power_law(variance, variance.values[0].real());
    c.require_window("fitted alpha", fit.exponent, 0.68, 0.72);
}

void a4_cumulant_linearity() {
    Criterion c("A4", "cumulant linearity under a skewed translation-invariant symbol", 0.0);
    const double v = 1.0, diffusivity = 0.5, mu3 = 0.1;
    const auto symbol = DispersionRelation::drift_diffusion(v, diffusivity, mu3);
    const auto psi0 = gaussian(SpatialGrid<double>(1, 512, 80.0), 0.0, 1.0);
    const auto run = spectral_propagate(psi0, symbol, linspace(0.0, 6.0, 25));
    const auto rates = cumulant_rates(symbol, 1, 3, 1e-2);
    for (int order = 1; order <= 3; ++order) {
        const auto series = moment_series(run, MomentSpec(order), MomentKind::connected);
        const auto fit = fit_linear(series.times, series.values.real());
        const double predicted = rates[order - 1].value.real();
        char name[64];
        std::snprintf(name, sizeof(name), "kappa_%d slope", order);
        c.require_window(name, fit.slope, predicted - 0.01 * std::abs(predicted),
                         predicted + 0.01 * std::abs(predicted));
        std::snprintf(name, sizeof(name), "kappa_%d linear-fit r^2", order);
        c.require(fit.r_squared >= 0.9999,
                  std::string(name) + " = " + std::to_string(fit.r_squared) + " (>= 0.9999)");
        if (order == 2) c.require_window("kappa_2 slope equals 2D", fit.slope, 0.99, 1.01);
    }
}

void a5_frozen_variance() {
    Criterion c("A5", "frozen variance under the quartic fractional symbol (beta=0.5)", 0.0);
    const auto psi0 = gaussian(SpatialGrid<double>(1, 512, 80.0), 0.0, 1.0);
    const auto weyl = DispersionRelation::weyl_fractional(0.5);  // E = -k^4
    const auto variance = variance_series(spectral_propagate(psi0, weyl, linspace(0.0, 5.0, 11)));
    double drift = 0.0;
    for (Eigen::Index i = 0; i < variance.times.size(); ++i)
        drift = std::max(drift, std::abs(variance.values[i].real() - variance.values[0].real()));
    c.require_le("max |Var(t) - Var(0)| for t <= 5", drift, 1e-6);
}

void a6_semigroup_dichotomy() {
    Criterion c("A6", "semigroup intact for invariant evolutions, broken for Caputo", 0.0);
    const auto psi0 = gaussian(SpatialGrid<double>(1, 256, 40.0), 0.0, 1.0);
    const std::vector<std::pair<std::string, DispersionRelation>> invariant = {
        {"heat", DispersionRelation::heat()},
        {"drift_diffusion", DispersionRelation::drift_diffusion(1.0, 0.5, 0.1)},
        {"weyl(0.5)", DispersionRelation::weyl_fractional(0.5)},
        {"weyl(1.5)", DispersionRelation::weyl_fractional(1.5)},
    };
    for (const auto& [name, rel] : invariant)
        c.require_le("compose residual [" + name + "]",
                     propagator_compose_check(psi0, rel, 1.0, 1.0), 1e-12);
    const double broken = caputo_compose_check(psi0, FracOrder(0.7), 1.0, 1.0);
    c.require(broken >= 1e-4, "caputo(0.7) restart residual = " + std::to_string(broken) +
                                  " (>= 1e-4: history dependence)");
}

void a7_commutation_identities() {
    Criterion c("A7", "translation commutation: Weyl commutes, base points must shift", 0.0);
    const std::vector<ExpMode> decaying{{1.0, Cplx(-1.0, 0.0)}};
    for (const double a : {0.5, 1.0}) {
        const auto res =
            weyl_commutation_residual(decaying, FracOrder(0.5), a, TimeGridSpec{0.0, 0.2, 11});
        char name[64];
        std::snprintf(name, sizeof(name), "weyl residual (a=%.1f)", a);
        c.require_le(name, res.naive_commutator, 1e-8);
    }
    const auto sig = TimeSignal<double>::sample(0.0, 1e-3, 3001,
                                                [](double t) { return Cplx(t * t, 0.0); });
    for (const auto kind : {BaseFracKind::caputo, BaseFracKind::riemann_liouville}) {
        const char* tag = kind == BaseFracKind::caputo ? "caputo" : "riemann-liouville";
        const auto res = commutation_residual(kind, sig, 1.0, FracOrder(0.5));
        c.require_le(std::string(tag) + " base-shift identity", res.shifted_base, 1e-6);
        c.require(res.naive_commutator >= 0.1, std::string(tag) + " naive commutator = " +
                                                   std::to_string(res.naive_commutator) +
                                                   " (>= 0.1: order-one violation)");
    }
}

void a8_perturbative_consistency() {
    Criterion c("A8", "first-order source expansion reproduces the exact variance law", 0.0);
    const double eps = 0.05, dt = 1e-3;
    const int dim = 1;
    const auto psi0 = gaussian(SpatialGrid<double>(1, 256, 40.0), 0.0, 1.0);
    const auto run = perturbative_evolve(psi0, eps, dt, 2000, 100);
    const auto variance = variance_series(run.combined);
    const double var0 = variance.values[0].real();
    // product-integration error budget of the log-kernel convolutions
    const double quad_tol = 50.0 * dt * dt * std::max(1.0, std::abs(std::log(dt)));
    double worst_exact = 0.0, worst_pert = 0.0, printed_form_gap = 0.0;
    for (Eigen::Index i = 0; i < variance.times.size(); ++i) {
        const double t = variance.times[i];
        if (t < 0.5 || t > 2.0) continue;
        const double measured = variance.values[i].real();
        const double exact = exact_variance(t, dim, 1.0 - eps, var0);
        const double pert = perturbative_variance(t, dim, eps, var0);
        // the rejected reading, with Euler's constant multiplying the log term
        const double printed =
            var0 + 2.0 * dim * t - 2.0 * dim * eps * kEulerGamma * (t + t * std::log(t) - t);
        worst_exact = std::max(worst_exact, std::abs(measured - exact) / (4.0 * eps * eps *
                                                                          2.0 * dim * t));
        worst_pert = std::max(worst_pert, std::abs(measured - pert));
        printed_form_gap = std::max(printed_form_gap, std::abs(measured - printed));
    }
    c.require_le("|measured - exact law| / (4 eps^2 2d t)", worst_exact, 1.0);
    c.require_le("|measured - O(eps) closed form|", worst_pert, 1e-6 + quad_tol);
    c.require(printed_form_gap > 3.0 * (1e-6 + quad_tol),
              "gamma-times-log variant is excluded: gap = " + std::to_string(printed_form_gap) +
                  " (> 3x tolerance)");
}

void a9_special_function_accuracy() {
    Criterion c("A9", "Mittag-Leffler evaluator: identities and region overlaps", 0.0);
    double worst_exp = 0.0;
    for (double z = -30.0; z <= 0.0; z += 0.125)
        worst_exp = std::max(worst_exp,
                             std::abs(mittag_leffler(1.0, z) - std::exp(z)) / std::exp(z));
    c.require_le("E_1 vs exp, relative on [-30, 0]", worst_exp, 1e-12);

    double worst_half = 0.0;
    for (double z = -10.0; z < 0.0; z += 0.0625) {
        const double exact = std::exp(z * z) * std::erfc(-z);
        worst_half = std::max(worst_half, std::abs(mittag_leffler(0.5, z) - exact) / exact);
    }
    c.require_le("E_1/2 vs exp(z^2) erfc(-z), relative on [-10, 0)", worst_half, 1e-9);

    double overlap = 0.0;
    for (const double beta : {0.5, 0.6, 0.7, 0.8, 0.9}) {
        for (double z = -5.0; z <= -2.0; z += 0.25) {
            const auto s = ml_detail::series(beta, z);
            if (!s) continue;  // the series declines pairs it cannot certify
            overlap = std::max(overlap, std::abs(*s - ml_detail::spectral_integral(beta, z)) /
                                            std::max(std::abs(*s), 1e-6));
        }
    }
    for (const double beta : {0.3, 0.5, 0.7}) {
        for (double z = -30.0; z <= -20.0; z += 2.5) {
            const auto a = ml_detail::asymptotic(beta, z);
            if (!a) continue;
            overlap = std::max(overlap, std::abs(*a - ml_detail::spectral_integral(beta, z)) /
                                            std::max(std::abs(*a), 1e-6));
        }
    }
    for (const double beta : {1.2, 1.5, 1.8}) {
        for (double z = -5.0; z <= -2.0; z += 0.5) {
            const auto s = ml_detail::series(beta, z);
            if (!s) continue;
            overlap = std::max(overlap, std::abs(*s - ml_detail::pole_plus_integral(beta, z)) /
                                            std::max(std::abs(*s), 1e-6));
        }
    }
    c.require_le("method-overlap self-consistency", overlap, 1e-10);
}

double l1_operator_error(double beta, double dt) {
    const auto n = static_cast<Eigen::Index>(std::llround(1.0 / dt)) + 1;
    const auto sig =
        TimeSignal<double>::sample(0.0, dt, n, [](double t) { return Cplx(t * t, 0.0); });
    const auto d = caputo_derivative(sig, FracOrder(beta), 0.0);
    double err = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double t = sig.time(i);
        err = std::max(err, std::abs(d.samples[i].real() -
                                     2.0 * std::pow(t, 2.0 - beta) / std::tgamma(3.0 - beta)));
    }
    return err;
}

double gl_operator_error(double beta, double dt) {
    const auto n = static_cast<Eigen::Index>(std::llround(1.0 / dt)) + 1;
    const auto sig =
        TimeSignal<double>::sample(0.0, dt, n, [](double t) { return Cplx(t * t, 0.0); });
    const auto d = rl_derivative(sig, FracOrder(beta), 0.0);
    const double t = sig.time(n - 1);
    return std::abs(d.samples[n - 1].real() -
                    2.0 * std::pow(t, 2.0 - beta) / std::tgamma(3.0 - beta));
}

void a10_convergence_orders() {
    Criterion c("A10", "observed convergence orders of the derivative schemes", 0.0);
    for (const double beta : {0.3, 0.5, 0.8}) {
        const double e1 = l1_operator_error(beta, 1.0 / 64);
        const double e2 = l1_operator_error(beta, 1.0 / 128);
        const double e3 = l1_operator_error(beta, 1.0 / 256);
        char name[64];
        std::snprintf(name, sizeof(name), "L1 order (beta=%.1f, dt->dt/2)", beta);
        c.require_window(name, std::log2(e1 / e2), 2.0 - beta - 0.2, 2.0 - beta + 0.2);
        std::snprintf(name, sizeof(name), "L1 order (beta=%.1f, dt/2->dt/4)", beta);
        c.require_window(name, std::log2(e2 / e3), 2.0 - beta - 0.2, 2.0 - beta + 0.2);
    }
    for (const double beta : {0.4, 0.7}) {
        const double e1 = gl_operator_error(beta, 1.0 / 64);
        const double e2 = gl_operator_error(beta, 1.0 / 128);
        char name[72];
        std::snprintf(name, sizeof(name), "Gruenwald-Letnikov order (beta=%.1f)", beta);
        c.require_window(name, std::log2(e1 / e2), 0.8, 1.2);
    }
}

}  // namespace

int main() {
    std::printf("fracdiff acceptance suite\n");
    a1_ordinary_linearity();
    a2_caputo_exact_law();
    a3_l1_cross_validation();
    a4_cumulant_linearity();
    a5_frozen_variance();
    a6_semigroup_dichotomy();
    a7_commutation_identities();
    a8_perturbative_consistency();
    a9_special_function_accuracy();
    a10_convergence_orders();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
}
