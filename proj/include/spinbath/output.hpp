#pragma once

// Writers for series.csv, series.json and meta.json.
//
// CSV layout (fixed): a "# spinbath series schema_version=1" line, then the
// header
//   t, re_rho_ab, im_rho_ab (all a, b in row-major level order),
//   <observables in registration order>,
//   stderr_re_rho_ab, stderr_im_rho_ab, stderr_<observable>
// Numbers are shortest round-trip decimal, so equal doubles give equal bytes.

#include "spinbath/config.hpp"
#include "spinbath/propagate.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace spinbath {

inline constexpr int kOutputSchemaVersion = 1;

std::string format_number(double x);

std::vector<std::string> csv_columns(const ObservableSeries& series);
void write_series_csv(std::ostream& out, const ObservableSeries& series);

nlohmann::json series_to_json(const ObservableSeries& series);

struct RunMeta {
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double wall_time_s = 0.0;
};

nlohmann::json meta_to_json(const RunConfig& config, const ObservableSeries& series, const RunMeta& meta);

// Creates the directory if needed and writes the files enabled in config.outputs
// (meta.json always). Returns the paths written.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const RunConfig& config,
                                                 const ObservableSeries& series, const RunMeta& meta);

}  // namespace spinbath
