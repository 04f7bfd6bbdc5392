#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fracdiff/config.hpp"
#include "fracdiff/io.hpp"
#include "fracdiff/mittag_leffler.hpp"
#include "experiments.hpp"
#include "verify.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int default_threads() {
    if (const char* env = std::getenv("FRACDIFF_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

int cmd_run(const std::string& config_path, const std::string& out_override, int threads,
            const std::vector<std::string>& formats) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "config: cannot open " << config_path << "\n";
        return kExitConfig;
    }
    nlohmann::json raw;
    try {
        in >> raw;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config: invalid JSON: " << e.what() << "\n";
        return kExitConfig;
    }
    fracdiff::RunConfig cfg;
    try {
        cfg = fracdiff::parse_config(raw);
    } catch (const fracdiff::ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    }
    fracdiff::cli::RunOptions opt;
    opt.out_dir = out_override.empty() ? std::filesystem::path(cfg.output.directory)
                                       : std::filesystem::path(out_override);
    opt.threads = threads;
    opt.formats.clear();
    if (formats.empty()) {
        opt.formats.insert(cfg.output.formats.begin(), cfg.output.formats.end());
    } else {
        opt.formats.insert(formats.begin(), formats.end());
    }
    try {
        fracdiff::cli::run_experiment(cfg, opt);
    } catch (const fracdiff::ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure in experiment '" << cfg.experiment << "': " << e.what()
                  << "\n";
        return kExitNumerical;
    }
    std::cout << "artifacts written to " << opt.out_dir.string() << "\n";
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
    nlohmann::ordered_json report;
    try {
        report = fracdiff::cli::verify_suite(suite, seed);
    } catch (const fracdiff::ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure in verify suite '" << suite << "': " << e.what() << "\n";
        return kExitNumerical;
    }
    if (out_path.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        out << report.dump(2) << '\n';
    }
    return report["pass"].get<bool>() ? 0 : 1;
}

int cmd_fit(const std::string& input, double var0, double t_min, double t_max,
            const std::string& out_path) {
    try {
        const auto series = fracdiff::read_moment_series_csv(input);
        const fracdiff::PowerLawFit fit =
            t_max > t_min ? fracdiff::fit_power_law(series, var0, t_min, t_max)
                          : fracdiff::fit_power_law(series, var0);
        const auto j = fracdiff::fit_report_json(fit);
        if (out_path.empty()) {
            std::cout << j.dump(2) << "\n";
        } else {
            std::ofstream out(out_path);
            out << j.dump(2) << '\n';
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure in fit: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}

int cmd_ml_eval(double beta, double z_min, double z_max, int n, const std::string& out_path) {
    if (n < 2 || z_min > z_max || z_max > 0.0) {
        std::cerr << "config: ml-eval needs z_min <= z_max <= 0 and n >= 2\n";
        return kExitConfig;
    }
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        out = &file;
    }
    try {
        (*out) << "z,e_beta\n";
        for (int i = 0; i < n; ++i) {
            const double z = z_min + (z_max - z_min) * i / (n - 1);
            (*out) << fracdiff::format_number(z) << ','
                   << fracdiff::format_number(fracdiff::mittag_leffler(beta, z)) << '\n';
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracdiff: fractional-derivative diffusion laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    int threads = default_threads();
    std::vector<std::string> formats;
    auto* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("--config", config_path, "JSON configuration file")->required();
    run->add_option("--out", out_override, "output directory (overrides config)");
    run->add_option("--threads", threads, "worker threads (FRACDIFF_THREADS as fallback)");
    run->add_option("--format", formats, "restrict outputs to csv and/or json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string suite = "invariants", verify_out;
    std::uint64_t seed = 12345;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("--suite", suite, "commutation | convergence | invariants")->required();
    verify->add_option("--seed", seed, "seed for randomized invariant checks");
    verify->add_option("--out", verify_out, "report path (default: stdout)");

    std::string fit_input, fit_out;
    double var0 = 0.0, fit_t_min = 0.0, fit_t_max = 0.0;
    auto* fit = app.add_subcommand("fit", "re-fit a series CSV with a power law");
    fit->add_option("--input", fit_input, "moment-series CSV")->required();
    fit->add_option("--var0", var0, "baseline subtracted before fitting")->required();
    fit->add_option("--tmin", fit_t_min, "fit window start");
    fit->add_option("--tmax", fit_t_max, "fit window end");
    fit->add_option("--out", fit_out, "report path (default: stdout)");

    double beta = 0.5, z_min = -10.0, z_max = 0.0;
    int n_points = 101;
    std::string ml_out;
    auto* ml = app.add_subcommand("ml-eval", "tabulate the Mittag-Leffler function");
    ml->add_option("--beta", beta, "order in (0, 2)")->required();
    ml->add_option("--zmin", z_min, "left end of the z grid");
    ml->add_option("--zmax", z_max, "right end of the z grid (<= 0)");
    ml->add_option("--n", n_points, "number of grid points");
    ml->add_option("--out", ml_out, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (run->parsed()) return cmd_run(config_path, out_override, threads, formats);
    if (verify->parsed()) return cmd_verify(suite, seed, verify_out);
    if (fit->parsed()) return cmd_fit(fit_input, var0, fit_t_min, fit_t_max, fit_out);
    if (ml->parsed()) return cmd_ml_eval(beta, z_min, z_max, n_points, ml_out);
    return kExitConfig;
}
