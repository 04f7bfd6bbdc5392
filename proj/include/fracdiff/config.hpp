#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracdiff/grid.hpp"

namespace fracdiff {

/// Configuration rejection; the message always names the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    std::string experiment;  // spectral | weyl | caputo_exact | caputo_l1 |
                             // perturbative | derivative_test | dispersion_scan
    struct Grid {
        int dim = 1;
        int n = 256;
        double length = 40.0;
    } grid;
    struct Initial {
        std::vector<double> mean{0.0};
        double sigma = 1.0;
    } initial;
    struct Evolution {
        double beta = 0.7;
        double epsilon = 0.05;
        double dt = 1e-3;
        double t_max = 1.0;
        int snapshot_stride = 1;
        double drift_v = 0.0;
        double diffusivity = 1.0;
        double mu3 = 0.0;
    } evolution;
    struct Analysis {
        int moment_orders = 2;
        bool has_fit_window = false;
        double fit_t_min = 0.0;
        double fit_t_max = 0.0;
        bool divergence_check = false;
    } analysis;
    struct Output {
        std::string directory = "out";
        std::vector<std::string> formats{"csv", "json"};
        bool snapshots = false;  // also export the full snapshot directory
    } output;
    // dispersion_scan only: coefficient of s^j is sum_i char_poly[j][i] k^i
    std::vector<std::vector<double>> char_poly;
    std::uint64_t seed = 12345;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& prefix) {
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw ConfigError(prefix + key + ": unknown key");
}

template <typename T>
T require_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": must be a number");
    return j.get<T>();
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::reject_unknown_keys;
    using detail::require_number;
    RunConfig cfg;
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(j, {"experiment", "grid", "initial", "evolution", "analysis", "output",
                            "char_poly", "seed"},
                        "");

    if (!j.contains("experiment") || !j["experiment"].is_string())
        throw ConfigError("experiment: required string");
    cfg.experiment = j["experiment"].get<std::string>();
    static const std::set<std::string> kExperiments{"spectral",    "weyl",
                                                    "caputo_exact", "caputo_l1",
                                                    "perturbative", "derivative_test",
                                                    "dispersion_scan"};
    if (!kExperiments.count(cfg.experiment))
        throw ConfigError("experiment: unknown experiment '" + cfg.experiment + "'");

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        reject_unknown_keys(g, {"dim", "n", "length"}, "grid.");
        if (g.contains("dim")) cfg.grid.dim = require_number<int>(g["dim"], "grid.dim");
        if (g.contains("n")) cfg.grid.n = require_number<int>(g["n"], "grid.n");
        if (g.contains("length"))
            cfg.grid.length = require_number<double>(g["length"], "grid.length");
    }
    if (cfg.grid.dim != 1 && cfg.grid.dim != 2) throw ConfigError("grid.dim: must be 1 or 2");
    if (cfg.grid.n < 8 || (cfg.grid.n & (cfg.grid.n - 1)) != 0)
        throw ConfigError("grid.n: must be a power of two >= 8");
    if (!(cfg.grid.length > 0.0)) throw ConfigError("grid.length: must be > 0");

    if (j.contains("initial")) {
        const auto& ini = j["initial"];
        reject_unknown_keys(ini, {"mean", "sigma"}, "initial.");
        if (ini.contains("mean")) {
            if (!ini["mean"].is_array()) throw ConfigError("initial.mean: must be an array");
            cfg.initial.mean.clear();
            for (const auto& v : ini["mean"])
                cfg.initial.mean.push_back(require_number<double>(v, "initial.mean"));
        }
        if (ini.contains("sigma"))
            cfg.initial.sigma = require_number<double>(ini["sigma"], "initial.sigma");
    }
    if (!(cfg.initial.sigma > 0.0)) throw ConfigError("initial.sigma: must be > 0");
    if (static_cast<int>(cfg.initial.mean.size()) != cfg.grid.dim)
        throw ConfigError("initial.mean: needs one entry per grid axis");
    for (const double m : cfg.initial.mean)
        if (!(std::abs(m) + 6.0 * cfg.initial.sigma < cfg.grid.length / 2.0))
            throw ConfigError("initial.mean/sigma: mean + 6 sigma must fit inside half the box");

    if (j.contains("evolution")) {
        const auto& e = j["evolution"];
        reject_unknown_keys(
            e, {"beta", "epsilon", "dt", "t_max", "snapshot_stride", "drift_v", "diffusivity",
                "mu3"},
            "evolution.");
        if (e.contains("beta")) cfg.evolution.beta = require_number<double>(e["beta"], "evolution.beta");
        if (e.contains("epsilon"))
            cfg.evolution.epsilon = require_number<double>(e["epsilon"], "evolution.epsilon");
        if (e.contains("dt")) cfg.evolution.dt = require_number<double>(e["dt"], "evolution.dt");
        if (e.contains("t_max"))
            cfg.evolution.t_max = require_number<double>(e["t_max"], "evolution.t_max");
        if (e.contains("snapshot_stride"))
            cfg.evolution.snapshot_stride =
                require_number<int>(e["snapshot_stride"], "evolution.snapshot_stride");
        if (e.contains("drift_v"))
            cfg.evolution.drift_v = require_number<double>(e["drift_v"], "evolution.drift_v");
        if (e.contains("diffusivity"))
            cfg.evolution.diffusivity =
                require_number<double>(e["diffusivity"], "evolution.diffusivity");
        if (e.contains("mu3")) cfg.evolution.mu3 = require_number<double>(e["mu3"], "evolution.mu3");
    }
    if (!(cfg.evolution.dt > 0.0)) throw ConfigError("evolution.dt: must be > 0");
    if (!(cfg.evolution.t_max >= cfg.evolution.dt))
        throw ConfigError("evolution.t_max: must be >= dt");
    if (cfg.evolution.snapshot_stride < 1)
        throw ConfigError("evolution.snapshot_stride: must be >= 1");
    {
        const double b = cfg.evolution.beta;
        bool ok = true;
        if (cfg.experiment == "weyl")
            ok = b > 0.0 && b < 2.0;
        else if (cfg.experiment == "caputo_exact")
            ok = b > 0.0 && b <= 1.0;
        else if (cfg.experiment == "caputo_l1" || cfg.experiment == "derivative_test")
            ok = b > 0.0 && b < 1.0;
        if (!ok)
            throw ConfigError(std::string("evolution.beta: out of range for ") + cfg.experiment);
    }
    if (cfg.experiment == "perturbative" &&
        !(cfg.evolution.epsilon >= 0.0 && cfg.evolution.epsilon <= 0.2))
        throw ConfigError("evolution.epsilon: must lie in [0, 0.2]");
    if (cfg.experiment == "spectral" && cfg.grid.dim == 2 &&
        (cfg.evolution.drift_v != 0.0 || cfg.evolution.mu3 != 0.0))
        throw ConfigError("evolution.drift_v/mu3: drift family is one-dimensional");

    if (j.contains("analysis")) {
        const auto& a = j["analysis"];
        reject_unknown_keys(a, {"moment_orders", "fit_window", "divergence_check"}, "analysis.");
        if (a.contains("moment_orders"))
            cfg.analysis.moment_orders =
                require_number<int>(a["moment_orders"], "analysis.moment_orders");
        if (a.contains("fit_window")) {
            const auto& w = a["fit_window"];
            if (!w.is_array() || w.size() != 2)
                throw ConfigError("analysis.fit_window: must be [t_min, t_max]");
            cfg.analysis.has_fit_window = true;
            cfg.analysis.fit_t_min = require_number<double>(w[0], "analysis.fit_window");
            cfg.analysis.fit_t_max = require_number<double>(w[1], "analysis.fit_window");
        }
        if (a.contains("divergence_check")) {
            if (!a["divergence_check"].is_boolean())
                throw ConfigError("analysis.divergence_check: must be a boolean");
            cfg.analysis.divergence_check = a["divergence_check"].get<bool>();
        }
    }
    if (cfg.analysis.moment_orders < 1 || cfg.analysis.moment_orders > 4)
        throw ConfigError("analysis.moment_orders: must lie in 1..4");
    if (cfg.analysis.has_fit_window) {
        if (!(cfg.analysis.fit_t_min >= 0.0) ||
            !(cfg.analysis.fit_t_max > cfg.analysis.fit_t_min) ||
            !(cfg.analysis.fit_t_max <= cfg.evolution.t_max + 1e-12))
            throw ConfigError("analysis.fit_window: must satisfy 0 <= t_min < t_max <= t_max");
    }

    if (j.contains("output")) {
        const auto& o = j["output"];
        reject_unknown_keys(o, {"directory", "formats", "snapshots"}, "output.");
        if (o.contains("snapshots")) {
            if (!o["snapshots"].is_boolean())
                throw ConfigError("output.snapshots: must be a boolean");
            cfg.output.snapshots = o["snapshots"].get<bool>();
        }
        if (o.contains("directory")) {
            if (!o["directory"].is_string()) throw ConfigError("output.directory: must be a string");
            cfg.output.directory = o["directory"].get<std::string>();
        }
        if (o.contains("formats")) {
            if (!o["formats"].is_array()) throw ConfigError("output.formats: must be an array");
            cfg.output.formats.clear();
            for (const auto& f : o["formats"]) {
                if (!f.is_string() ||
                    (f.get<std::string>() != "csv" && f.get<std::string>() != "json"))
                    throw ConfigError("output.formats: entries must be 'csv' or 'json'");
                cfg.output.formats.push_back(f.get<std::string>());
            }
            if (cfg.output.formats.empty()) throw ConfigError("output.formats: must be nonempty");
        }
    }

    if (j.contains("char_poly")) {
        if (!j["char_poly"].is_array() || j["char_poly"].size() < 2)
            throw ConfigError("char_poly: must be an array of >= 2 coefficient rows");
        for (const auto& row : j["char_poly"]) {
            if (!row.is_array() || row.empty())
                throw ConfigError("char_poly: each row must be a nonempty array of numbers");
            std::vector<double> r;
            for (const auto& v : row) r.push_back(require_number<double>(v, "char_poly"));
            cfg.char_poly.push_back(std::move(r));
        }
        bool leading_nonzero = false;
        for (const double c : cfg.char_poly.back())
            if (c != 0.0) leading_nonzero = true;
        if (!leading_nonzero)
            throw ConfigError("char_poly: leading (highest s power) row must be nonzero");
    } else if (cfg.experiment == "dispersion_scan") {
        throw ConfigError("char_poly: required for the dispersion_scan experiment");
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("seed: must be a nonnegative integer");
        const auto s = j["seed"].get<std::int64_t>();
        if (s < 0) throw ConfigError("seed: must be a nonnegative integer");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    return cfg;
}

/// Fully resolved configuration (defaults included) for the run manifest.
inline nlohmann::ordered_json resolved_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["experiment"] = cfg.experiment;
    j["grid"] = {{"dim", cfg.grid.dim}, {"n", cfg.grid.n}, {"length", cfg.grid.length}};
    j["initial"] = {{"mean", cfg.initial.mean}, {"sigma", cfg.initial.sigma}};
    j["evolution"] = {{"beta", cfg.evolution.beta},
                      {"epsilon", cfg.evolution.epsilon},
                      {"dt", cfg.evolution.dt},
                      {"t_max", cfg.evolution.t_max},
                      {"snapshot_stride", cfg.evolution.snapshot_stride},
                      {"drift_v", cfg.evolution.drift_v},
                      {"diffusivity", cfg.evolution.diffusivity},
                      {"mu3", cfg.evolution.mu3}};
    nlohmann::ordered_json analysis = {{"moment_orders", cfg.analysis.moment_orders},
                                       {"divergence_check", cfg.analysis.divergence_check}};
    if (cfg.analysis.has_fit_window)
        analysis["fit_window"] = {cfg.analysis.fit_t_min, cfg.analysis.fit_t_max};
    j["analysis"] = analysis;
    j["output"] = {{"directory", cfg.output.directory},
                   {"formats", cfg.output.formats},
                   {"snapshots", cfg.output.snapshots}};
    if (!cfg.char_poly.empty()) j["char_poly"] = cfg.char_poly;
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace fracdiff
