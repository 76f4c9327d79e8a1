#include "spinbath/cli.hpp"

#include "spinbath/berry.hpp"
#include "spinbath/checks.hpp"
#include "spinbath/config.hpp"
#include "spinbath/output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace spinbath {

using nlohmann::json;

namespace {

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

}  // namespace

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        config = load_config(options.config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (options.seed) config.ensemble.seed = *options.seed;
    if (options.out_dir) config.outputs.directory = *options.out_dir;

    try {
        const unsigned workers = options.workers ? *options.workers : workers_from_environment();
        const auto t0 = std::chrono::steady_clock::now();
        const ObservableSeries series = run_ensemble(config.ensemble, config.model, config.registry(), workers);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (series.n_used == 0) {
            err << "all " << series.n_traj << " trajectories hit a degeneracy";
            if (!series.drop_reasons.empty()) err << " (first: " << series.drop_reasons.front() << ")";
            err << "\n";
            return kExitDegenerate;
        }
        const auto written = write_outputs(config.outputs.directory, config, series,
                                           RunMeta{config.ensemble.seed, workers, wall});
        out << "trajectories " << series.n_used << "/" << series.n_traj << " used, " << series.n_dropped
            << " dropped (degenerate)\n";
        for (const auto& p : written) out << "wrote " << p.string() << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

int cmd_check(const CheckCliOptions& options, std::ostream& out, std::ostream&) {
    CheckOptions co;
    co.seed = options.seed;
    co.points = options.points;
    co.perturb_couplings = options.inject_fault;
    bool all = true;
    for (const auto& r : run_invariant_checks(co)) {
        char line[160];
        std::snprintf(line, sizeof line, "%-4s %-32s residual %.3e  tol %.1e\n", r.passed ? "PASS" : "FAIL",
                      r.name.c_str(), r.residual, r.tolerance);
        out << line;
        all = all && r.passed;
    }
    return all ? kExitOk : kExitFailure;
}

int cmd_berry(double theta, std::size_t n_steps, std::ostream& out, std::ostream& err) {
    if (!(theta > 0.0 && theta < std::numbers::pi)) {
        err << "theta must lie in (0, pi)\n";
        return kExitConfig;
    }
    if (n_steps < 1) {
        err << "steps must be positive\n";
        return kExitConfig;
    }
    ConeLoopResult r;
    try {
        r = run_cone_loop(theta, n_steps);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    out << "theta " << format_number(theta) << "\n";
    out << "steps " << n_steps << "\n";
    out << "geometric_phase " << format_number(r.phase) << "\n";
    out << "analytic " << format_number(r.analytic) << "\n";
    out << "error " << sci(r.error) << "\n";
    out << "dynamical_phase " << format_number(r.dynamical_phase) << "\n";
    out << "# open-path profile: t phase\n";
    for (std::size_t k = 0; k < r.times.size(); ++k)
        out << format_number(r.times[k]) << " " << format_number(r.profile[k]) << "\n";
    const bool ok = r.error < 1e-3;
    out << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kExitOk : kExitFailure;
}

int cmd_dump_frame(const std::string& config_path, const std::string& spins, std::ostream& out, std::ostream& err) {
    RunConfig config;
    SpinConfiguration point;
    try {
        config = load_config(config_path);
        point = parse_spins(spins);
        if (point.size() != config.model.n_spins())
            throw ConfigError("spins", "got " + std::to_string(point.size()) + " spins, model has " +
                                           std::to_string(config.model.n_spins()));
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const auto in = SuperoperatorInputs::evaluate(config.model.quantum, config.model.bath, point);
        const auto& f = in.frame;
        json states = json::array();
        for (int a = 0; a < f.dim(); ++a) {
            json col = json::array();
            for (int r = 0; r < f.dim(); ++r) col.push_back({f.states(r, a).real(), f.states(r, a).imag()});
            states.push_back(col);
        }
        json tensor = json::array();
        for (std::size_t i = 0; i < point.size(); ++i) {
            json per_axis = json::array();
            for (int axis = 0; axis < 3; ++axis) per_axis.push_back(matrix_to_json(in.couplings.at(i, axis)));
            tensor.push_back(per_axis);
        }
        std::vector<double> energies(f.energies.data(), f.energies.data() + f.dim());
        json spin_list = json::array();
        for (std::size_t i = 0; i < point.size(); ++i) spin_list.push_back({point[i].x(), point[i].y(), point[i].z()});
        const json d = {{"schema_version", kOutputSchemaVersion},
                        {"spins", spin_list},
                        {"energies", energies},
                        {"states", states},
                        {"couplings", tensor},
                        {"layout", "states[a][r] = <r|a>; couplings[i][I][a][b] = <a|d/dS_iI|b>"}};
        out << d.dump(2) << "\n";
        return kExitOk;
    } catch (const DegeneracyError& e) {
        err << "degenerate spectrum: " << e.what() << "\n";
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace spinbath
