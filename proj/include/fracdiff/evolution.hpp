#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fracdiff/dispersion.hpp"
#include "fracdiff/fractional.hpp"
#include "fracdiff/grid.hpp"
#include "fracdiff/mittag_leffler.hpp"
#include "fracdiff/quadrature.hpp"

namespace fracdiff {

inline constexpr double kEulerGamma = 0.5772156649015329;

enum class EvolutionKind { spectral, caputo_exact, caputo_l1, perturbative };

inline const char* to_string(EvolutionKind k) {
    switch (k) {
        case EvolutionKind::spectral: return "spectral";
        case EvolutionKind::caputo_exact: return "caputo_exact";
        case EvolutionKind::caputo_l1: return "caputo_l1";
        case EvolutionKind::perturbative: return "perturbative";
    }
    return "?";
}

/// Spectral snapshots of one evolution run; snapshot 0 is the transformed
/// initial condition whenever times[0] == 0.
struct EvolutionResult {
    EvolutionKind kind = EvolutionKind::spectral;
    Eigen::VectorXd times;
    std::vector<SpectralField<double>> snapshots;

    Eigen::Index mode_count() const {
        return snapshots.empty() ? 0 : snapshots.front().modes.size();
    }
};

namespace detail {

inline void check_times(const Eigen::VectorXd& times) {
    if (times.size() == 0) throw std::invalid_argument("evolution: empty time vector");
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) throw std::invalid_argument("evolution: times must be >= 0");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw std::invalid_argument("evolution: times must be strictly increasing");
    }
}

inline Eigen::VectorXcd dispersion_on_grid(const SpectralField<double>& f0,
                                           const DispersionRelation& E) {
    Eigen::VectorXcd e_values(f0.modes.size());
    for (Eigen::Index m = 0; m < f0.modes.size(); ++m) {
        const Complex ek = E.evaluate(f0.wavevector(m));
        if (ek.real() > 1e-12 * std::max(1.0, std::abs(ek)))
            throw std::invalid_argument(
                "spectral_propagate: dispersion has Re E > 0 (unbounded growth)");
        e_values[m] = ek;
    }
    return e_values;
}

}  // namespace detail

/// Exact per-mode propagator (F psi)(t, k) = (F psi)(0, k) exp(t E(k)).
inline EvolutionResult spectral_propagate(const DensityField<double>& psi0,
                                          const DispersionRelation& E,
                                          const Eigen::VectorXd& times,
                                          bool allow_nonunique = false) {
    detail::check_times(times);
    if (!allow_nonunique && !E.all_unique())
        throw std::invalid_argument(
            "spectral_propagate: dispersion lacks a unique admissible zero at some k");
    const SpectralField<double> f0 = forward_transform(psi0);
    const Eigen::VectorXcd e_values = detail::dispersion_on_grid(f0, E);
    EvolutionResult result;
    result.kind = EvolutionKind::spectral;
    result.times = times;
    result.snapshots.reserve(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        Eigen::VectorXcd modes(f0.modes.size());
        for (Eigen::Index m = 0; m < modes.size(); ++m)
            modes[m] = f0.modes[m] * std::exp(times[i] * e_values[m]);
        result.snapshots.emplace_back(f0.grid, std::move(modes));
    }
    return result;
}

/// One evolution step treating the given spectrum as the initial condition.
inline auto spectral_step(DispersionRelation E) {
    return [E = std::move(E)](const SpectralField<double>& f, double t) {
        const Eigen::VectorXcd e_values = detail::dispersion_on_grid(f, E);
        Eigen::VectorXcd modes(f.modes.size());
        for (Eigen::Index m = 0; m < modes.size(); ++m)
            modes[m] = f.modes[m] * std::exp(t * e_values[m]);
        return SpectralField<double>(f.grid, std::move(modes));
    };
}

/// Restarted Caputo step: history before the restart is discarded, which is
/// exactly what breaks the semigroup property at beta != 1.
inline auto caputo_exact_step(FracOrder beta) {
    return [beta](const SpectralField<double>& f, double t) {
        Eigen::VectorXcd modes(f.modes.size());
        const double tb = std::pow(t, beta.beta);
        for (Eigen::Index m = 0; m < modes.size(); ++m)
            modes[m] = f.modes[m] * mittag_leffler(beta.beta, -f.k_squared(m) * tb);
        return SpectralField<double>(f.grid, std::move(modes));
    };
}

/// Max-norm difference between step(t1 + t2) and step(t2) after step(t1).
template <typename Step>
double compose_residual(const DensityField<double>& psi0, Step&& step, double t1, double t2) {
    const SpectralField<double> f0 = forward_transform(psi0);
    const SpectralField<double> whole = step(f0, t1 + t2);
    const SpectralField<double> parts = step(step(f0, t1), t2);
    return (whole.modes - parts.modes).cwiseAbs().maxCoeff();
}

inline double propagator_compose_check(const DensityField<double>& psi0,
                                       const DispersionRelation& E, double t1, double t2) {
    return compose_residual(psi0, spectral_step(E), t1, t2);
}

inline double caputo_compose_check(const DensityField<double>& psi0, const FracOrder& beta,
                                   double t1, double t2) {
    return compose_residual(psi0, caputo_exact_step(beta), t1, t2);
}

/// Exact solution of the base-0 Caputo diffusion equation, per mode
/// (F psi)(t, k) = (F psi)(0, k) * E_beta(-k.k t^beta). beta = 1 reduces to
/// the heat propagator.
inline EvolutionResult caputo_exact_spectral(const DensityField<double>& psi0,
                                             const FracOrder& beta,
                                             const Eigen::VectorXd& times) {
    if (beta.beta > 1.0)
        throw std::invalid_argument("caputo_exact_spectral: requires beta in (0, 1]");
    detail::check_times(times);
    const SpectralField<double> f0 = forward_transform(psi0);
    EvolutionResult result;
    result.kind = EvolutionKind::caputo_exact;
    result.times = times;
    result.snapshots.reserve(times.size());
    std::unordered_map<double, double> factor_cache;
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        const double tb = std::pow(times[i], beta.beta);
        factor_cache.clear();
        Eigen::VectorXcd modes(f0.modes.size());
        for (Eigen::Index m = 0; m < modes.size(); ++m) {
            const double ksq = f0.k_squared(m);
            auto it = factor_cache.find(ksq);
            if (it == factor_cache.end())
                it = factor_cache.emplace(ksq, mittag_leffler(beta.beta, -ksq * tb)).first;
            modes[m] = f0.modes[m] * it->second;
        }
        result.snapshots.emplace_back(f0.grid, std::move(modes));
    }
    return result;
}

/// Implicit L1 stepping of the base-0 Caputo diffusion equation, full
/// history retained per mode (unconditionally stable; linear solve per step).
inline EvolutionResult caputo_l1_evolve(const DensityField<double>& psi0, const FracOrder& beta,
                                        double dt, Eigen::Index n_steps,
                                        Eigen::Index snapshot_stride = 1) {
    if (beta.beta >= 1.0)
        throw std::invalid_argument("caputo_l1_evolve: requires beta in (0, 1)");
    if (!(dt > 0.0)) throw std::invalid_argument("caputo_l1_evolve: dt must be > 0");
    if (n_steps < 1) throw std::invalid_argument("caputo_l1_evolve: need n_steps >= 1");
    if (snapshot_stride < 1) snapshot_stride = 1;
    const SpectralField<double> f0 = forward_transform(psi0);
    std::vector<Eigen::Index> snap_steps;
    for (Eigen::Index n = 0; n <= n_steps; n += snapshot_stride) snap_steps.push_back(n);
    if (snap_steps.back() != n_steps) snap_steps.push_back(n_steps);
    EvolutionResult result;
    result.kind = EvolutionKind::caputo_l1;
    result.times.resize(static_cast<Eigen::Index>(snap_steps.size()));
    std::vector<Eigen::VectorXcd> snap_modes(snap_steps.size(),
                                             Eigen::VectorXcd(f0.modes.size()));
    for (std::size_t s = 0; s < snap_steps.size(); ++s)
        result.times[static_cast<Eigen::Index>(s)] = static_cast<double>(snap_steps[s]) * dt;

    const double c = std::pow(dt, -beta.beta) / std::tgamma(2.0 - beta.beta);
    const Eigen::VectorXd b = l1_weights(beta.beta, n_steps);
    Eigen::VectorXcd diff(n_steps);
    for (Eigen::Index m = 0; m < f0.modes.size(); ++m) {
        const double lambda = f0.k_squared(m);
        Complex u_prev = f0.modes[m];
        std::size_t snap_at = 0;
        if (snap_steps[0] == 0) snap_modes[snap_at++][m] = u_prev;
        for (Eigen::Index n = 1; n <= n_steps; ++n) {
            Complex history(0.0, 0.0);
            for (Eigen::Index j = 1; j < n; ++j) history += b[j] * diff[n - 1 - j];
            const Complex u = c * (u_prev - history) / (c + lambda);
            diff[n - 1] = u - u_prev;
            u_prev = u;
            if (snap_at < snap_steps.size() && snap_steps[snap_at] == n)
                snap_modes[snap_at++][m] = u;
        }
    }
    result.snapshots.reserve(snap_steps.size());
    for (auto& modes : snap_modes) result.snapshots.emplace_back(f0.grid, std::move(modes));
    return result;
}

/// Retarded Green's function of the forced heat mode, G = -theta(t) e^{-k.k t},
/// with theta(0) := 1.
inline double greens_function(double t, double k_squared) {
    if (t < 0.0) return 0.0;
    return -std::exp(-k_squared * t);
}

/// First-order sources of the epsilon-expanded base-0 Caputo equation,
/// evaluated from a stride-1 heat run: J1 = eps*gamma*D0 Fpsi^H and
/// J2 = eps*[(D0 Fpsi^H)(0) ln t + conv(ln, D0^2 Fpsi^H)], reported from
/// t = dt on (ln t rules out the t = 0 node).
struct PerturbativeSources {
    Eigen::VectorXd times;  // starts at dt
    Eigen::MatrixXcd j1;    // (mode, time)
    Eigen::MatrixXcd j2;
};

namespace detail {

inline double uniform_dt(const Eigen::VectorXd& times) {
    if (times.size() < 2 || times[0] != 0.0)
        throw std::invalid_argument("perturbative: need a uniform time grid starting at 0");
    const double dt = times[1] - times[0];
    for (Eigen::Index i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-12 * std::max(1.0, dt))
            throw std::invalid_argument("perturbative: time grid must be uniform");
    return dt;
}

}  // namespace detail

inline PerturbativeSources perturbative_sources(const EvolutionResult& psi_h, double epsilon) {
    if (psi_h.kind != EvolutionKind::spectral)
        throw std::invalid_argument("perturbative_sources: psi_h must come from the heat flow");
    const double dt = detail::uniform_dt(psi_h.times);
    if (psi_h.times.size() >= 2) {
        // the expansion is built around E = -k.k; verify one step of the run
        for (Eigen::Index m = 0; m < psi_h.mode_count(); ++m) {
            const Complex f0 = psi_h.snapshots[0].modes[m];
            if (std::abs(f0) < 1e-14) continue;
            const Complex expected = f0 * std::exp(-psi_h.snapshots[0].k_squared(m) * dt);
            if (std::abs(psi_h.snapshots[1].modes[m] - expected) > 1e-8 * std::abs(f0))
                throw std::invalid_argument(
                    "perturbative_sources: psi_h does not follow the heat dispersion");
        }
    }
    const Eigen::Index n_times = psi_h.times.size();
    const Eigen::Index n_modes = psi_h.mode_count();
    PerturbativeSources src;
    src.times = psi_h.times.tail(n_times - 1);
    src.j1.resize(n_modes, n_times - 1);
    src.j2.resize(n_modes, n_times - 1);
    Eigen::VectorXcd h_row(n_times);
    for (Eigen::Index m = 0; m < n_modes; ++m) {
        const double lambda = psi_h.snapshots.front().k_squared(m);
        for (Eigen::Index i = 0; i < n_times; ++i) h_row[i] = psi_h.snapshots[i].modes[m];
        const Complex f0 = h_row[0];
        const Eigen::VectorXcd w = convolve_log_kernel<Complex>(h_row, dt);
        for (Eigen::Index i = 1; i < n_times; ++i) {
            src.j1(m, i - 1) = epsilon * kEulerGamma * (-lambda) * h_row[i];
            src.j2(m, i - 1) =
                epsilon * (-lambda * f0 * std::log(psi_h.times[i]) + lambda * lambda * w[i]);
        }
    }
    return src;
}

/// Perturbative run: psi = psi^H + psi_1 + psi_2 with psi_i the Green's-
/// function convolution of J_i, all evaluated by product-integration
/// quadrature on the step grid.
struct PerturbativeRun {
    double epsilon = 0.0;
    double euler_gamma = kEulerGamma;
    EvolutionResult homogeneous;  // psi^H
    EvolutionResult correction1;  // psi_1
    EvolutionResult correction2;  // psi_2
    EvolutionResult combined;     // psi^H + psi_1 + psi_2
};

inline PerturbativeRun perturbative_evolve(const DensityField<double>& psi0, double epsilon,
                                           double dt, Eigen::Index n_steps,
                                           Eigen::Index snapshot_stride = 1,
                                           double epsilon_cap = 0.2) {
    if (!(epsilon >= 0.0) || epsilon > epsilon_cap)
        throw std::invalid_argument("perturbative_evolve: epsilon outside [0, cap]");
    if (!(dt > 0.0)) throw std::invalid_argument("perturbative_evolve: dt must be > 0");
    if (n_steps < 1) throw std::invalid_argument("perturbative_evolve: need n_steps >= 1");
    if (snapshot_stride < 1) snapshot_stride = 1;
    Eigen::VectorXd grid_times(n_steps + 1);
    for (Eigen::Index n = 0; n <= n_steps; ++n) grid_times[n] = static_cast<double>(n) * dt;
    const EvolutionResult heat_run =
        spectral_propagate(psi0, DispersionRelation::heat(), grid_times);
    const Eigen::Index n_modes = heat_run.mode_count();
    const Eigen::Index n_times = grid_times.size();

    std::vector<Eigen::Index> snaps;
    for (Eigen::Index n = 0; n <= n_steps; n += snapshot_stride) snaps.push_back(n);
    if (snaps.back() != n_steps) snaps.push_back(n_steps);
    const auto n_snap = static_cast<Eigen::Index>(snaps.size());

    Eigen::MatrixXcd psi1(n_modes, n_times), psi2(n_modes, n_times);
    Eigen::VectorXcd h_row(n_times), j1_row(n_times);
    const auto& grid = heat_run.snapshots.front().grid;
    for (Eigen::Index m = 0; m < n_modes; ++m) {
        const double lambda = heat_run.snapshots.front().k_squared(m);
        for (Eigen::Index i = 0; i < n_times; ++i) h_row[i] = heat_run.snapshots[i].modes[m];
        const Complex f0 = h_row[0];
        for (Eigen::Index i = 0; i < n_times; ++i)
            j1_row[i] = epsilon * kEulerGamma * (-lambda) * h_row[i];
        psi1.row(m) = -convolve_exp_kernel<Complex>(lambda, j1_row, dt);
        const Eigen::VectorXcd w = convolve_log_kernel<Complex>(h_row, dt);
        const Eigen::VectorXd s_log = exp_log_convolution(lambda, dt, n_times);
        const Eigen::VectorXcd conv_w = convolve_exp_kernel<Complex>(lambda, w, dt);
        for (Eigen::Index i = 0; i < n_times; ++i)
            psi2(m, i) = epsilon * lambda * f0 * s_log[i] -
                         epsilon * lambda * lambda * conv_w[i];
    }

    PerturbativeRun run;
    run.epsilon = epsilon;
    auto collect = [&](EvolutionKind kind, auto&& mode_value) {
        EvolutionResult r;
        r.kind = kind;
        r.times.resize(n_snap);
        r.snapshots.reserve(n_snap);
        for (Eigen::Index s = 0; s < n_snap; ++s) {
            const Eigen::Index n = snaps[static_cast<std::size_t>(s)];
            r.times[s] = grid_times[n];
            Eigen::VectorXcd modes(n_modes);
            for (Eigen::Index m = 0; m < n_modes; ++m) modes[m] = mode_value(m, n);
            r.snapshots.emplace_back(grid, std::move(modes));
        }
        return r;
    };
    run.homogeneous = collect(EvolutionKind::spectral, [&](Eigen::Index m, Eigen::Index n) {
        return heat_run.snapshots[n].modes[m];
    });
    run.correction1 = collect(EvolutionKind::perturbative,
                              [&](Eigen::Index m, Eigen::Index n) { return psi1(m, n); });
    run.correction2 = collect(EvolutionKind::perturbative,
                              [&](Eigen::Index m, Eigen::Index n) { return psi2(m, n); });
    run.combined = collect(EvolutionKind::perturbative, [&](Eigen::Index m, Eigen::Index n) {
        return heat_run.snapshots[n].modes[m] + psi1(m, n) + psi2(m, n);
    });
    return run;
}

/// Var(t) = Var(0) + 2 d t^beta / Gamma(1 + beta); exact for the base-0
/// Caputo diffusion equation.
inline double exact_variance(double t, int dim, double beta, double var0) {
    if (!(t >= 0.0)) throw std::invalid_argument("exact_variance: t must be >= 0");
    return var0 + 2.0 * dim * std::pow(t, beta) / std::tgamma(1.0 + beta);
}

/// First order in epsilon: Var(t) = Var(0) + 2 d t - 2 d eps (gamma t + t ln t - t).
/// This is the expansion of the exact law 2 d t^(1-eps)/Gamma(2-eps) to O(eps).
inline double perturbative_variance(double t, int dim, double epsilon, double var0) {
    if (!(t > 0.0)) throw std::invalid_argument("perturbative_variance: t must be > 0");
    return var0 + 2.0 * dim * t -
           2.0 * dim * epsilon * (kEulerGamma * t + t * std::log(t) - t);
}

}  // namespace fracdiff
