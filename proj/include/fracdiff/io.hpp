#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracdiff/dispersion.hpp"
#include "fracdiff/evolution.hpp"
#include "fracdiff/fractional.hpp"
#include "fracdiff/grid.hpp"
#include "fracdiff/moments.hpp"

namespace fracdiff {

/// 17 significant digits: doubles survive the round trip through text.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("io: cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace detail

/// Field snapshot CSV: axis coordinates, then re, im.
inline void write_field_csv(const DensityField<double>& field,
                            const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << (field.grid.dim == 1 ? "x,re,im\n" : "x,y,re,im\n");
    for (Eigen::Index flat = 0; flat < field.values.size(); ++flat) {
        const auto idx = field.grid.unflatten(flat);
        out << format_number(field.grid.coordinate(idx[0]));
        if (field.grid.dim == 2) out << ',' << format_number(field.grid.coordinate(idx[1]));
        out << ',' << format_number(field.values[flat].real()) << ','
            << format_number(field.values[flat].imag()) << '\n';
    }
}

/// Self-describing sidecar for a field snapshot: dim, N, L and the snapshot
/// time that produced it.
inline void write_field_header_json(const SpatialGrid<double>& grid, double time,
                                    const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["dim"] = grid.dim;
    j["points_per_axis"] = grid.points_per_axis;
    j["length_per_axis"] = grid.length;
    j["time"] = time;
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
}

/// TimeSignal CSV: t, re, im.
inline void write_signal_csv(const TimeSignal<double>& sig, const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "t,re,im\n";
    for (Eigen::Index i = 0; i < sig.size(); ++i)
        out << format_number(sig.time(i)) << ',' << format_number(sig.samples[i].real()) << ','
            << format_number(sig.samples[i].imag()) << '\n';
}

/// Dispersion table CSV: k, Re E, Im E, status.
inline void write_dispersion_csv(const DispersionRelation& rel,
                                 const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "k,re_e,im_e,status\n";
    for (const auto& e : rel.table()) {
        const Complex value = e.selected.value_or(
            Complex(std::numeric_limits<double>::quiet_NaN(), 0.0));
        out << format_number(e.k) << ',' << format_number(value.real()) << ','
            << format_number(value.imag()) << ',' << to_string(e.status) << '\n';
    }
}

/// Closed-form dispersions tabulated over an explicit k set.
inline void write_dispersion_csv(const DispersionRelation& rel, const Eigen::VectorXd& k_set,
                                 const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "k,re_e,im_e,status\n";
    for (Eigen::Index i = 0; i < k_set.size(); ++i) {
        const Complex value = rel.evaluate(k_set[i]);
        out << format_number(k_set[i]) << ',' << format_number(value.real()) << ','
            << format_number(value.imag()) << ",unique\n";
    }
}

/// MomentSeries CSV: t, value_re, value_im, divergent.
inline void write_moment_series_csv(const MomentSeries& series,
                                    const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "t,value_re,value_im,divergent\n";
    for (Eigen::Index i = 0; i < series.times.size(); ++i)
        out << format_number(series.times[i]) << ',' << format_number(series.values[i].real())
            << ',' << format_number(series.values[i].imag()) << ','
            << (series.divergent[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
}

/// Reads back a MomentSeries CSV written by write_moment_series_csv.
inline MomentSeries read_moment_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io: cannot open " + path.string() + " for reading");
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,value_re", 0) != 0)
        throw std::runtime_error("io: " + path.string() + " is not a moment-series CSV");
    std::vector<double> t, re, im;
    std::vector<bool> flags;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double a, b, c;
        int d = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%d", &a, &b, &c, &d) < 3)
            throw std::runtime_error("io: malformed row in " + path.string() + ": " + line);
        t.push_back(a);
        re.push_back(b);
        im.push_back(c);
        flags.push_back(d != 0);
    }
    MomentSeries series;
    series.times = Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    series.values.resize(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i)
        series.values[static_cast<Eigen::Index>(i)] = std::complex<double>(re[i], im[i]);
    series.divergent = flags;
    return series;
}

inline nlohmann::ordered_json fit_report_json(const PowerLawFit& fit) {
    nlohmann::ordered_json j;
    j["C"] = fit.amplitude;
    j["alpha"] = fit.exponent;
    j["r2"] = fit.r_squared;
    j["window"] = {fit.t_min, fit.t_max};
    return j;
}

inline void write_fit_report_json(const PowerLawFit& fit, const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << fit_report_json(fit).dump(2) << '\n';
}

/// EvolutionResult export: one CSV snapshot per retained time plus a JSON
/// manifest naming the solver and the files.
inline void write_evolution_result(const EvolutionResult& run, const std::filesystem::path& dir,
                                   const nlohmann::ordered_json& parameters = {}) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["solver"] = to_string(run.kind);
    if (!parameters.empty()) manifest["parameters"] = parameters;
    manifest["snapshots"] = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < run.times.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "snapshot_%04lld.csv", static_cast<long long>(i));
        const auto field = inverse_transform(run.snapshots[static_cast<std::size_t>(i)]);
        write_field_csv(field, dir / name);
        write_field_header_json(field.grid, run.times[i],
                                dir / (std::string(name, std::strlen(name) - 4) + ".json"));
        nlohmann::ordered_json entry;
        entry["file"] = name;
        entry["time"] = run.times[i];
        manifest["snapshots"].push_back(entry);
    }
    auto out = detail::open_output(dir / "snapshots.json");
    out << manifest.dump(2) << '\n';
}

}  // namespace fracdiff
