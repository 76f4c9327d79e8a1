#pragma once

// Subcommands behind the `spinbath` executable. Each returns the process exit
// code: 0 success, 1 check/tolerance failure or runtime error, 2 bad
// configuration or arguments, 3 every trajectory hit a degeneracy.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace spinbath {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegenerate = 3;

struct SimulateOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;     // overrides ensemble.seed
    std::optional<std::string> out_dir;    // overrides outputs.directory
    std::optional<unsigned> workers;       // default: SPINBATH_WORKERS or hardware
};

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct CheckCliOptions {
    bool inject_fault = false;
    std::uint64_t seed = 20240917;
    std::size_t points = 100;
};

int cmd_check(const CheckCliOptions& options, std::ostream& out, std::ostream& err);

int cmd_berry(double theta, std::size_t n_steps, std::ostream& out, std::ostream& err);

int cmd_dump_frame(const std::string& config_path, const std::string& spins, std::ostream& out, std::ostream& err);

}  // namespace spinbath
