#include "spinbath/output.hpp"

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <fstream>

namespace spinbath {

using nlohmann::json;

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";  // folds -0
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw Error("format_number: conversion failed");
    return std::string(buf, end);
}

namespace {

std::string pair_suffix(int a, int b) { return std::to_string(a) + std::to_string(b); }

std::string pair_suffix_wide(int a, int b) { return std::to_string(a) + "_" + std::to_string(b); }

// Single-digit levels read as rho_01; separators only when they are needed.
std::string suffix(int dim, int a, int b) { return dim <= 10 ? pair_suffix(a, b) : pair_suffix_wide(a, b); }

}  // namespace

std::vector<std::string> csv_columns(const ObservableSeries& s) {
    std::vector<std::string> cols{"t"};
    for (int a = 0; a < s.dim; ++a)
        for (int b = 0; b < s.dim; ++b) {
            cols.push_back("re_rho_" + suffix(s.dim, a, b));
            cols.push_back("im_rho_" + suffix(s.dim, a, b));
        }
    for (const auto& n : s.names) cols.push_back(n);
    for (int a = 0; a < s.dim; ++a)
        for (int b = 0; b < s.dim; ++b) {
            cols.push_back("stderr_re_rho_" + suffix(s.dim, a, b));
            cols.push_back("stderr_im_rho_" + suffix(s.dim, a, b));
        }
    for (const auto& n : s.names) cols.push_back("stderr_" + n);
    return cols;
}

void write_series_csv(std::ostream& out, const ObservableSeries& s) {
    out << "# spinbath series schema_version=" << kOutputSchemaVersion << "\n";
    const auto cols = csv_columns(s);
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << "\n";
    for (std::size_t t = 0; t < s.times.size(); ++t) {
        std::string line = format_number(s.times[t]);
        const auto put = [&line](double x) {
            line += ',';
            line += format_number(x);
        };
        for (int a = 0; a < s.dim; ++a)
            for (int b = 0; b < s.dim; ++b) {
                put(s.rho[t](a, b).real());
                put(s.rho[t](a, b).imag());
            }
        for (std::size_t o = 0; o < s.names.size(); ++o) put(s.values[o][t]);
        for (int a = 0; a < s.dim; ++a)
            for (int b = 0; b < s.dim; ++b) {
                put(s.rho_stderr[t](a, b).real());
                put(s.rho_stderr[t](a, b).imag());
            }
        for (std::size_t o = 0; o < s.names.size(); ++o) put(s.stderrs[o][t]);
        out << line << "\n";
    }
}

json series_to_json(const ObservableSeries& s) {
    json rho = json::array();
    json rho_err = json::array();
    for (std::size_t t = 0; t < s.times.size(); ++t) {
        rho.push_back(matrix_to_json(s.rho[t]));
        rho_err.push_back(matrix_to_json(s.rho_stderr[t]));
    }
    json obs = json::object();
    for (std::size_t o = 0; o < s.names.size(); ++o)
        obs[s.names[o]] = {{"values", s.values[o]}, {"stderr", s.stderrs[o]}};
    return {{"schema_version", kOutputSchemaVersion},
            {"dim", s.dim},
            {"times", s.times},
            {"rho", rho},
            {"rho_stderr", rho_err},
            {"observables", obs},
            {"observable_order", s.names}};
}

json meta_to_json(const RunConfig& config, const ObservableSeries& s, const RunMeta& meta) {
    return {{"schema_version", kOutputSchemaVersion},
            {"spinbath_version", SPINBATH_VERSION},
            {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
            {"seed", meta.seed},
            {"workers", meta.workers},
            {"wall_time_s", meta.wall_time_s},
            {"n_traj", s.n_traj},
            {"n_used", s.n_used},
            {"n_dropped_degenerate", s.n_dropped},
            {"drop_reasons", s.drop_reasons},
            {"max_casimir_drift", s.max_casimir_drift},
            {"max_modulus_error", s.max_modulus_error},
            {"reanchors", s.reanchors},
            {"csv_columns", csv_columns(s)},
            {"config", to_json(config)}};
}

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const RunConfig& config,
                                                 const ObservableSeries& series, const RunMeta& meta) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto open = [&](const std::string& name) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        written.push_back(path);
        return out;
    };
    if (config.outputs.csv) {
        auto out = open("series.csv");
        write_series_csv(out, series);
    }
    if (config.outputs.json) {
        auto out = open("series.json");
        out << series_to_json(series).dump(1) << "\n";
    }
    auto out = open("meta.json");
    out << meta_to_json(config, series, meta).dump(2) << "\n";
    return written;
}

}  // namespace spinbath
