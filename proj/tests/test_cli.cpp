#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

// FRACDIFF_CLI_PATH is injected by the build with the binary location.

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string(FRACDIFF_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "fracdiff_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_config(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(2);
}

nlohmann::json small_run_config(const fs::path& out_dir) {
    return nlohmann::json::parse(R"({
        "experiment": "caputo_exact",
        "grid": {"dim": 1, "n": 128, "length": 40.0},
        "initial": {"mean": [0.0], "sigma": 1.0},
        "evolution": {"beta": 0.7, "dt": 0.05, "t_max": 2.0, "snapshot_stride": 1},
        "analysis": {"moment_orders": 2},
        "output": {"directory": ")" +
                                out_dir.string() + R"("}
    })");
}

}  // namespace

TEST_CASE("malformed configuration exits with code 2 and a field-precise message") {
    const auto dir = work_dir();
    auto cfg = small_run_config(dir / "out_bad");
    cfg["initial"]["sigma"] = -1.0;
    write_config(dir / "bad.json", cfg);
    const int code = run_cli("run --config " + (dir / "bad.json").string(), dir / "bad.log");
    CHECK(code == 2);
    CHECK(slurp(dir / "bad.log").find("initial.sigma") != std::string::npos);

    auto unknown = small_run_config(dir / "out_bad");
    unknown["mystery"] = 1;
    write_config(dir / "unknown.json", unknown);
    CHECK(run_cli("run --config " + (dir / "unknown.json").string(), dir / "unknown.log") == 2);
    CHECK(slurp(dir / "unknown.log").find("mystery: unknown key") != std::string::npos);
}

TEST_CASE("a run produces the advertised artifacts and an accurate fit") {
    const auto dir = work_dir();
    const auto out = dir / "out_run";
    fs::remove_all(out);
    write_config(dir / "run.json", small_run_config(out));
    const int code = run_cli("run --config " + (dir / "run.json").string(), dir / "run.log");
    REQUIRE(code == 0);
    for (const char* name :
         {"manifest.json", "variance.csv", "cumulant_1.csv", "cumulant_2.csv", "fit.json"})
        CHECK(fs::exists(out / name));
    CHECK(fs::exists(out / "fields" / "final.csv"));

    std::ifstream fit_in(out / "fit.json");
    const auto fit = nlohmann::json::parse(fit_in);
    CHECK(std::abs(fit["alpha"].get<double>() - 0.7) < 0.01);

    std::ifstream manifest_in(out / "manifest.json");
    const auto manifest = nlohmann::json::parse(manifest_in);
    CHECK(manifest["config"]["experiment"] == "caputo_exact");
}

TEST_CASE("reruns are byte-identical") {
    const auto dir = work_dir();
    const auto out1 = dir / "rep1";
    const auto out2 = dir / "rep2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    write_config(dir / "rep.json", small_run_config(out1));
    REQUIRE(run_cli("run --config " + (dir / "rep.json").string(), dir / "rep1.log") == 0);
    REQUIRE(run_cli("run --config " + (dir / "rep.json").string() + " --out " + out2.string(),
                    dir / "rep2.log") == 0);
    for (const char* name : {"variance.csv", "cumulant_1.csv", "cumulant_2.csv", "fit.json"})
        CHECK(slurp(out1 / name) == slurp(out2 / name));
}

TEST_CASE("verify suites report machine-readable passes") {
    const auto dir = work_dir();
    const int code = run_cli("verify --suite convergence --out " +
                                 (dir / "conv.json").string(),
                             dir / "conv.log");
    CHECK(code == 0);
    std::ifstream in(dir / "conv.json");
    const auto report = nlohmann::json::parse(in);
    CHECK(report["pass"].get<bool>());
    CHECK(report["checks"].size() >= 5);

    // byte-for-byte reproducible with a fixed seed
    REQUIRE(run_cli("verify --suite invariants --seed 99 --out " + (dir / "inv1.json").string(),
                    dir / "inv1.log") == 0);
    REQUIRE(run_cli("verify --suite invariants --seed 99 --out " + (dir / "inv2.json").string(),
                    dir / "inv2.log") == 0);
    CHECK(slurp(dir / "inv1.json") == slurp(dir / "inv2.json"));

    CHECK(run_cli("verify --suite bogus", dir / "bogus.log") == 2);
}

TEST_CASE("fit and ml-eval round trip through files") {
    const auto dir = work_dir();
    const auto out = dir / "out_run";  // produced by the run test; recreate if absent
    if (!fs::exists(out / "variance.csv")) {
        write_config(dir / "run.json", small_run_config(out));
        REQUIRE(run_cli("run --config " + (dir / "run.json").string(), dir / "run.log") == 0);
    }
    const int code = run_cli("fit --input " + (out / "variance.csv").string() +
                                 " --var0 1.0 --out " + (dir / "refit.json").string(),
                             dir / "refit.log");
    REQUIRE(code == 0);
    std::ifstream in(dir / "refit.json");
    const auto fit = nlohmann::json::parse(in);
    CHECK(std::abs(fit["alpha"].get<double>() - 0.7) < 0.01);

    REQUIRE(run_cli("ml-eval --beta 1.0 --zmin -1 --zmax 0 --n 2 --out " +
                        (dir / "ml.csv").string(),
                    dir / "ml.log") == 0);
    const auto ml = slurp(dir / "ml.csv");
    CHECK(ml.find("z,e_beta") == 0);
    CHECK(ml.find("0.36787944117144233") != std::string::npos);  // exp(-1)

    CHECK(run_cli("ml-eval --beta 2.5", dir / "mlbad.log") == 2);
}

TEST_CASE("caputo_l1 pipeline recovers the anomalous exponent end to end") {
    const auto dir = work_dir();
    const auto out = dir / "out_l1";
    fs::remove_all(out);
    auto cfg = small_run_config(out);
    cfg["experiment"] = "caputo_l1";
    cfg["grid"]["n"] = 256;
    cfg["evolution"] = {{"beta", 0.7}, {"dt", 2e-3}, {"t_max", 2.0}, {"snapshot_stride", 50}};
    write_config(dir / "l1.json", cfg);
    REQUIRE(run_cli("run --config " + (dir / "l1.json").string(), dir / "l1.log") == 0);
    std::ifstream in(out / "fit.json");
    const auto fit = nlohmann::json::parse(in);
    CHECK(fit["alpha"].get<double>() >= 0.68);
    CHECK(fit["alpha"].get<double>() <= 0.72);
}

TEST_CASE("weyl experiment at beta = 1 is ordinary diffusion") {
    const auto dir = work_dir();
    const auto out = dir / "out_weyl1";
    fs::remove_all(out);
    auto cfg = small_run_config(out);
    cfg["experiment"] = "weyl";
    cfg["evolution"] = {{"beta", 1.0}, {"dt", 0.1}, {"t_max", 5.0}, {"snapshot_stride", 1}};
    write_config(dir / "weyl1.json", cfg);
    REQUIRE(run_cli("run --config " + (dir / "weyl1.json").string(), dir / "weyl1.log") == 0);
    std::ifstream in(out / "fit.json");
    const auto fit = nlohmann::json::parse(in);
    CHECK(fit["alpha"].get<double>() >= 0.995);
    CHECK(fit["alpha"].get<double>() <= 1.005);
    CHECK(std::abs(fit["C"].get<double>() - 2.0) <= 0.01);
}

TEST_CASE("FRACDIFF_THREADS is honored as the --threads fallback") {
    const auto dir = work_dir();
    const auto out = dir / "out_threads";
    fs::remove_all(out);
    write_config(dir / "threads.json", small_run_config(out));
    const std::string cmd = "FRACDIFF_THREADS=3 " + std::string(FRACDIFF_CLI_PATH) +
                            " run --config " + (dir / "threads.json").string() + " >" +
                            (dir / "threads.log").string() + " 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    std::ifstream in(out / "manifest.json");
    const auto manifest = nlohmann::json::parse(in);
    CHECK(manifest["threads"].get<int>() == 3);
}

TEST_CASE("dispersion scan writes the status table") {
    const auto dir = work_dir();
    auto cfg = small_run_config(dir / "out_scan");
    cfg["experiment"] = "dispersion_scan";
    cfg["char_poly"] = {{0.0, 0.0, 1.0}, {1.0}};  // f = s + k^2
    write_config(dir / "scan.json", cfg);
    fs::remove_all(dir / "out_scan");
    REQUIRE(run_cli("run --config " + (dir / "scan.json").string(), dir / "scan.log") == 0);
    const auto table = slurp(dir / "out_scan" / "dispersion.csv");
    CHECK(table.find("k,re_e,im_e,status") == 0);
    CHECK(table.find("unique") != std::string::npos);
    std::ifstream in(dir / "out_scan" / "scan_summary.json");
    const auto summary = nlohmann::json::parse(in);
    CHECK(summary["unique"].get<int>() == 128);
    CHECK(summary["max_residual"].get<double>() <= 1e-10);
}
