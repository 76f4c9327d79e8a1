#include "spinbath/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace spinbath;
    CLI::App app{"Classical spin bath coupled to a quantum subsystem: adiabatic trajectory ensembles"};
    app.set_version_flag("--version", SPINBATH_VERSION);
    app.require_subcommand(1);

    SimulateOptions sim;
    std::uint64_t seed = 0;
    std::string out_dir;
    auto* simulate = app.add_subcommand("simulate", "run a trajectory ensemble from a JSON config");
    simulate->add_option("--config", sim.config_path, "config file")->required();
    auto* seed_opt = simulate->add_option("--seed", seed, "overrides ensemble.seed");
    auto* out_opt = simulate->add_option("--out", out_dir, "overrides outputs.directory");

    CheckCliOptions chk;
    auto* check = app.add_subcommand("check", "run the built-in invariant suite");
    check->add_flag("--inject-fault", chk.inject_fault, "perturb the Hellmann-Feynman tensor by 1e-3");
    check->add_option("--seed", chk.seed, "random seed");
    check->add_option("--points", chk.points, "random points per check")->check(CLI::PositiveNumber);

    double theta = 0.0;
    std::size_t steps = 10000;
    auto* berry = app.add_subcommand("berry", "geometric phase around a cone loop");
    berry->add_option("--theta", theta, "polar angle, 0 < theta < pi")->required();
    berry->add_option("--steps", steps, "steps per loop");

    std::string frame_config, spins;
    auto* dump = app.add_subcommand("dump-frame", "print the adiabatic frame and coupling tensor as JSON");
    dump->add_option("--config", frame_config, "config file")->required();
    dump->add_option("--spins", spins, "\"x,y,z;x,y,z;...\"")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) {
            if (*seed_opt) sim.seed = seed;
            if (*out_opt) sim.out_dir = out_dir;
            return cmd_simulate(sim, std::cout, std::cerr);
        }
        if (*check) return cmd_check(chk, std::cout, std::cerr);
        if (*berry) return cmd_berry(theta, steps, std::cout, std::cerr);
        if (*dump) return cmd_dump_frame(frame_config, spins, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
