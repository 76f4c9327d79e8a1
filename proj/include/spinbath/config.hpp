#pragma once

// JSON run configuration for `spinbath simulate`.
//
//   {
//     "schema_version": 1,
//     "model": {"preset": "qubit_isotropic", "delta": 1.0, "gamma": 0.2, "n_spins": 2}
//           or {"h_sub": M, "couplings": [{"gamma": g, "ops": [Mx, My, Mz]}, ...]},
//     "bath": {"field": [bx, by, bz], "exchange": [[...], ...]},          exchange optional
//     "ensemble": {"n_traj", "seed", "init": "uniform_sphere" | "thermal", "beta",
//                  "spin_length", "rho_init": M, "dt", "n_steps", "record_every"},
//     "observables": [{"name", "preset": "sigma_x" | "sigma_y" | "sigma_z" | "identity"}
//                     | {"name", "operator": M} | {"name", "kind": "energy"}],
//     "outputs": {"directory": "out", "formats": ["csv", "json"]}
//   }
//
// M is a list of rows; each entry is [re, im] or a bare real number.

#include "spinbath/propagate.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spinbath {

inline constexpr int kConfigSchemaVersion = 1;

// Validation failure; field() is the dotted path of the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct ObservableSpec {
    std::string name;
    bool energy = false;
    HermitianOperator op;  // unused for energy
    bool operator==(const ObservableSpec&) const = default;
};

struct OutputSpec {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
    bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    Model model;
    EnsembleSpec ensemble;
    std::vector<ObservableSpec> observables;
    OutputSpec outputs;

    ObservableRegistry registry() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

// Parses and validates; throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Explicit form (presets are expanded), so parse(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j, const std::string& field);

// "x,y,z;x,y,z;..." -> configuration. Throws ConfigError("spins", ...).
SpinConfiguration parse_spins(const std::string& text);

}  // namespace spinbath
