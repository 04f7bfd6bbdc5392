#pragma once

#include <filesystem>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "fracdiff/config.hpp"
#include "fracdiff/io.hpp"
#include "fracdiff/moments.hpp"

namespace fracdiff::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
    std::filesystem::path out_dir;
    int threads = 1;
    std::set<std::string> formats{"csv", "json"};
};

namespace detail {

inline SpatialGrid<double> make_grid(const RunConfig& cfg) {
    return SpatialGrid<double>(cfg.grid.dim, cfg.grid.n, cfg.grid.length);
}

inline DensityField<double> make_initial(const RunConfig& cfg, const SpatialGrid<double>& grid) {
    Eigen::VectorXd mean(cfg.grid.dim);
    for (int i = 0; i < cfg.grid.dim; ++i) mean[i] = cfg.initial.mean[static_cast<std::size_t>(i)];
    return make_gaussian(grid, mean, cfg.initial.sigma);
}

inline Eigen::VectorXd snapshot_times(const RunConfig& cfg) {
    const auto n_steps =
        static_cast<Eigen::Index>(std::llround(cfg.evolution.t_max / cfg.evolution.dt));
    std::vector<double> times;
    for (Eigen::Index n = 0; n <= n_steps; n += cfg.evolution.snapshot_stride)
        times.push_back(static_cast<double>(n) * cfg.evolution.dt);
    if (times.back() != static_cast<double>(n_steps) * cfg.evolution.dt)
        times.push_back(static_cast<double>(n_steps) * cfg.evolution.dt);
    return Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
}

inline void write_manifest(const RunConfig& cfg, const RunOptions& opt) {
    nlohmann::ordered_json m;
    m["tool"] = "fracdiff";
    m["version"] = kVersion;
    m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                 "." + std::to_string(EIGEN_MINOR_VERSION);
    m["threads"] = opt.threads;
    m["config"] = resolved_json(cfg);
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream out(opt.out_dir / "manifest.json");
    out << m.dump(2) << '\n';
}

inline DispersionRelation spectral_family(const RunConfig& cfg) {
    if (cfg.evolution.drift_v == 0.0 && cfg.evolution.mu3 == 0.0 &&
        cfg.evolution.diffusivity == 1.0)
        return DispersionRelation::heat();
    if (cfg.grid.dim == 2)
        throw ConfigError("evolution.drift_v/mu3: drift family is one-dimensional");
    return DispersionRelation::drift_diffusion(cfg.evolution.drift_v, cfg.evolution.diffusivity,
                                               cfg.evolution.mu3);
}

inline EvolutionResult dispatch_evolution(const RunConfig& cfg, const DensityField<double>& psi0) {
    const auto n_steps =
        static_cast<Eigen::Index>(std::llround(cfg.evolution.t_max / cfg.evolution.dt));
    if (cfg.experiment == "spectral")
        return spectral_propagate(psi0, spectral_family(cfg), snapshot_times(cfg));
    if (cfg.experiment == "weyl")
        return spectral_propagate(psi0, DispersionRelation::weyl_fractional(cfg.evolution.beta),
                                  snapshot_times(cfg));
    if (cfg.experiment == "caputo_exact")
        return caputo_exact_spectral(psi0, FracOrder(cfg.evolution.beta), snapshot_times(cfg));
    if (cfg.experiment == "caputo_l1")
        return caputo_l1_evolve(psi0, FracOrder(cfg.evolution.beta), cfg.evolution.dt, n_steps,
                                cfg.evolution.snapshot_stride);
    throw std::logic_error("dispatch_evolution: unexpected experiment");
}

/// Variance + per-order cumulant series, power-law fit, field snapshots.
inline void analyze_run(const RunConfig& cfg, const RunOptions& opt, const EvolutionResult& run,
                        MomentSeries variance) {
    const bool csv = opt.formats.count("csv") != 0;
    const bool json = opt.formats.count("json") != 0;
    if (csv) {
        write_moment_series_csv(variance, opt.out_dir / "variance.csv");
        for (int order = 1; order <= cfg.analysis.moment_orders; ++order) {
            const auto series = moment_series(run, MomentSpec(order), MomentKind::connected);
            char name[32];
            std::snprintf(name, sizeof(name), "cumulant_%d.csv", order);
            write_moment_series_csv(series, opt.out_dir / name);
        }
        const auto first = inverse_transform(run.snapshots.front());
        const auto last = inverse_transform(run.snapshots.back());
        write_field_csv(first, opt.out_dir / "fields" / "initial.csv");
        write_field_csv(last, opt.out_dir / "fields" / "final.csv");
    }
    if (json) {
        write_field_header_json(run.snapshots.front().grid, run.times[0],
                                opt.out_dir / "fields" / "initial.json");
        write_field_header_json(run.snapshots.back().grid, run.times[run.times.size() - 1],
                                opt.out_dir / "fields" / "final.json");
        nlohmann::ordered_json fit_json;
        try {
            const double var0 = variance.values[0].real();
            const PowerLawFit fit =
                cfg.analysis.has_fit_window
                    ? fit_power_law(variance, var0, cfg.analysis.fit_t_min,
                                    cfg.analysis.fit_t_max)
                    : fit_power_law(variance, var0);
            fit_json = fit_report_json(fit);
            fit_json["var0"] = var0;
        } catch (const std::invalid_argument& e) {
            fit_json["skipped"] = e.what();
        }
        std::ofstream out(opt.out_dir / "fit.json");
        out << fit_json.dump(2) << '\n';
    }
}

inline nlohmann::ordered_json run_parameters(const RunConfig& cfg) {
    nlohmann::ordered_json p;
    if (cfg.experiment == "perturbative")
        p["epsilon"] = cfg.evolution.epsilon;
    else if (cfg.experiment != "spectral")
        p["beta"] = cfg.evolution.beta;
    p["dt"] = cfg.evolution.dt;
    p["grid"] = {{"dim", cfg.grid.dim}, {"n", cfg.grid.n}, {"length", cfg.grid.length}};
    return p;
}

inline void run_evolution_experiment(const RunConfig& cfg, const RunOptions& opt) {
    const auto grid = make_grid(cfg);
    const auto psi0 = make_initial(cfg, grid);
    const EvolutionResult run = dispatch_evolution(cfg, psi0);
    MomentSeries variance = variance_series(run);
    if (cfg.analysis.divergence_check) {
        RunConfig doubled = cfg;
        doubled.grid.n *= 2;
        doubled.grid.length *= 2.0;
        const auto grid2 = make_grid(doubled);
        const auto psi2 = make_initial(doubled, grid2);
        mark_divergence(variance, variance_series(dispatch_evolution(doubled, psi2)));
    }
    if (cfg.output.snapshots && opt.formats.count("csv") != 0)
        write_evolution_result(run, opt.out_dir / "snapshots", run_parameters(cfg));
    analyze_run(cfg, opt, run, std::move(variance));
}

inline void run_perturbative_experiment(const RunConfig& cfg, const RunOptions& opt) {
    const auto grid = make_grid(cfg);
    const auto psi0 = make_initial(cfg, grid);
    const auto n_steps =
        static_cast<Eigen::Index>(std::llround(cfg.evolution.t_max / cfg.evolution.dt));
    const PerturbativeRun run = perturbative_evolve(psi0, cfg.evolution.epsilon, cfg.evolution.dt,
                                                    n_steps, cfg.evolution.snapshot_stride);
    MomentSeries variance = variance_series(run.combined);
    if (cfg.output.snapshots && opt.formats.count("csv") != 0)
        write_evolution_result(run.combined, opt.out_dir / "snapshots", run_parameters(cfg));
    analyze_run(cfg, opt, run.combined, variance);
    if (opt.formats.count("csv") != 0) {
        // measured variance against the exact law and its O(eps) expansion
        std::ofstream out(opt.out_dir / "variance_comparison.csv");
        out << "t,measured_re,exact,perturbative\n";
        const double var0 = variance.values[0].real();
        const double beta = 1.0 - cfg.evolution.epsilon;
        for (Eigen::Index i = 0; i < variance.times.size(); ++i) {
            const double t = variance.times[i];
            out << format_number(t) << ',' << format_number(variance.values[i].real()) << ','
                << format_number(exact_variance(t, cfg.grid.dim, beta, var0)) << ','
                << format_number(t > 0.0 ? perturbative_variance(t, cfg.grid.dim,
                                                                 cfg.evolution.epsilon, var0)
                                         : var0)
                << '\n';
        }
    }
}

inline void run_derivative_test(const RunConfig& cfg, const RunOptions& opt) {
    const double dt = cfg.evolution.dt;
    const auto n = static_cast<Eigen::Index>(std::llround(cfg.evolution.t_max / dt)) + 1;
    const FracOrder order(cfg.evolution.beta);
    const auto sig = TimeSignal<double>::sample(
        0.0, dt, n, [](double t) { return std::complex<double>(t * t, 0.0); });
    const bool csv = opt.formats.count("csv") != 0;
    if (csv) {
        write_signal_csv(sig, opt.out_dir / "input.csv");
        write_signal_csv(caputo_derivative(sig, order, 0.0), opt.out_dir / "caputo.csv");
        write_signal_csv(rl_derivative(sig, order, 0.0), opt.out_dir / "rl.csv");
        const TimeGridSpec out_grid{0.0, cfg.evolution.t_max / 50.0, 51};
        const std::vector<ExpMode> decaying{{1.0, std::complex<double>(-1.0, 0.0)}};
        write_signal_csv(
            weyl_derivative_quadrature(signal_from_modes(decaying), order, 0, out_grid),
            opt.out_dir / "weyl.csv");
    }
    if (opt.formats.count("json") != 0) {
        const double shift = 10.0 * dt;
        const auto cap = commutation_residual(BaseFracKind::caputo, sig, shift, order);
        const auto rl = commutation_residual(BaseFracKind::riemann_liouville, sig, shift, order);
        const std::vector<ExpMode> decaying{{1.0, std::complex<double>(-1.0, 0.0)}};
        const auto weyl = weyl_commutation_residual(decaying, FracOrder(0.5), shift,
                                                    TimeGridSpec{0.0, 0.2, 11});
        nlohmann::ordered_json j;
        j["shift"] = shift;
        j["caputo"] = {{"naive_commutator", cap.naive_commutator},
                       {"shifted_base", cap.shifted_base}};
        j["riemann_liouville"] = {{"naive_commutator", rl.naive_commutator},
                                  {"shifted_base", rl.shifted_base}};
        j["weyl"] = {{"residual", weyl.naive_commutator}};
        std::ofstream out(opt.out_dir / "commutation.json");
        out << j.dump(2) << '\n';
    }
}

inline void run_dispersion_scan(const RunConfig& cfg, const RunOptions& opt) {
    const auto grid = make_grid(cfg);
    const auto rows = cfg.char_poly;
    CharPolynomial poly{static_cast<int>(rows.size()) - 1,
                        [rows](const Eigen::Vector2d& k) {
                            Eigen::VectorXcd c(static_cast<Eigen::Index>(rows.size()));
                            for (std::size_t jj = 0; jj < rows.size(); ++jj) {
                                double acc = 0.0, pw = 1.0;
                                for (const double a : rows[jj]) {
                                    acc += a * pw;
                                    pw *= k[0];
                                }
                                c[static_cast<Eigen::Index>(jj)] = acc;
                            }
                            return c;
                        }};
    Eigen::VectorXd k_set(grid.points_per_axis);
    for (int p = 0; p < grid.points_per_axis; ++p) k_set[p] = grid.wavenumber(p);
    const auto rel = find_dispersion(poly, k_set);
    if (opt.formats.count("csv") != 0)
        write_dispersion_csv(rel, opt.out_dir / "dispersion.csv");
    if (opt.formats.count("json") != 0) {
        int unique = 0, multiple = 0, nonsimple = 0, none = 0;
        for (const auto& e : rel.table()) {
            switch (e.status) {
                case UniquenessStatus::unique: ++unique; break;
                case UniquenessStatus::multiple_lhp_zeros: ++multiple; break;
                case UniquenessStatus::nonsimple_zero: ++nonsimple; break;
                case UniquenessStatus::no_lhp_zero: ++none; break;
            }
        }
        nlohmann::ordered_json j;
        j["k_count"] = rel.table().size();
        j["unique"] = unique;
        j["multiple_lhp_zeros"] = multiple;
        j["nonsimple_zero"] = nonsimple;
        j["no_lhp_zero"] = none;
        j["max_residual"] = rel.max_residual();
        std::ofstream out(opt.out_dir / "scan_summary.json");
        out << j.dump(2) << '\n';
    }
}

}  // namespace detail

/// Execute one configured experiment; artifacts land under opt.out_dir.
inline void run_experiment(const RunConfig& cfg, const RunOptions& opt) {
    detail::write_manifest(cfg, opt);
    if (cfg.experiment == "perturbative")
        detail::run_perturbative_experiment(cfg, opt);
    else if (cfg.experiment == "derivative_test")
        detail::run_derivative_test(cfg, opt);
    else if (cfg.experiment == "dispersion_scan")
        detail::run_dispersion_scan(cfg, opt);
    else
        detail::run_evolution_experiment(cfg, opt);
}

}  // namespace fracdiff::cli
