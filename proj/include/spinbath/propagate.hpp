#pragma once

// Weak-coupling propagation of density-matrix elements along classical spin
// characteristics:
//
//   rho_ab(t) = rho_ab(t0) exp(-i int omega_ab dt') exp(-int (<a|d/dt'|a> - <b|d/dt'|b>) dt')
//
// with the bath point carried forward by S_dot = B(S) grad(H_SB + (E_a + E_b)/2).

#include "spinbath/adiabatic.hpp"
#include "spinbath/quantum_model.hpp"
#include "spinbath/spin_bath.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace spinbath {

struct Model {
    QuantumModelSpec quantum;
    BathSpec bath;

    std::size_t n_spins() const { return quantum.n_spins(); }
    int dim() const { return quantum.dim(); }
    void validate() const;
};

// One characteristic of the propagator. The frame is kept in the anchored
// gauge (see GaugeAnchor); when an anchored component becomes small the anchor
// moves to the largest component with the frame left unchanged.
struct TrajectoryState {
    SpinConfiguration config;
    int alpha = 0;
    int alpha_p = 0;
    double time = 0.0;
    double dyn_phase = 0.0;     // int omega_{alpha alpha'} dt
    Complex geo_exponent = 0.0; // int (<a|d/dt a> - <a'|d/dt a'>) dt, purely imaginary
    Complex rho0 = 0.0;

    AdiabaticFrame frame;
    GaugeAnchor anchor;
    SpinField drift;            // characteristic velocity at config
    double omega = 0.0;         // E_alpha - E_alpha' at config
    Complex connection = 0.0;   // integrand of geo_exponent at config
    int reanchors = 0;

    Complex geometric_factor() const { return std::exp(-geo_exponent); }
    Complex dynamical_factor() const { return std::polar(1.0, -dyn_phase); }
    Complex value() const { return rho0 * dynamical_factor() * geometric_factor(); }
};

// Reusable stepping engine with preallocated scratch space. Not thread-safe;
// use one per worker.
class ElementPropagator {
public:
    explicit ElementPropagator(const Model& model);
    ~ElementPropagator();
    ElementPropagator(const ElementPropagator&) = delete;
    ElementPropagator& operator=(const ElementPropagator&) = delete;

    // Frame at `config` in its largest-component gauge, anchored there.
    TrajectoryState start(const SpinConfiguration& config, int alpha, int alpha_p, Complex rho0);

    // One RK4 step of the characteristic plus trapezoid phase updates.
    // Throws DegeneracyError on a gap below kGapTol or a level reordering.
    void step(TrajectoryState& state, double dt);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

TrajectoryState start_trajectory(const Model& model, const SpinConfiguration& config, int alpha, int alpha_p, Complex rho0);
TrajectoryState propagate_element(TrajectoryState state, const Model& model, double dt, std::size_t n_steps);

enum class InitialDistribution { UniformSphere, Thermal };

struct EnsembleSpec {
    std::size_t n_traj = 1;
    std::uint64_t seed = 0;
    InitialDistribution init = InitialDistribution::UniformSphere;
    double beta = 0.0;         // thermal only
    double spin_length = 1.0;  // |S_i| of sampled spins
    HermitianOperator rho_init;
    double dt = 1e-3;
    std::size_t n_steps = 0;
    std::size_t record_every = 1;

    // n_traj >= 1, dt > 0, record_every >= 1, beta >= 0, rho_init a density matrix.
    void validate() const;
};

// Bath point for trajectory `index`; depends only on (seed, index).
SpinConfiguration sample_point(const EnsembleSpec& spec, const BathSpec& bath, std::size_t n_spins, std::size_t index);
std::vector<SpinConfiguration> sample_initial(const EnsembleSpec& spec, const BathSpec& bath, std::size_t n_spins);

// Metropolis sweeps used for thermal sampling: 10 N ceil(beta |b| + 1).
std::size_t thermal_sweeps(double beta, const BathSpec& bath, std::size_t n_spins);

class ObservableRegistry {
public:
    enum class Kind { Operator, Energy };
    struct Entry {
        std::string name;
        Kind kind;
        HermitianOperator op;
    };

    // Returns the column index. Throws Error on a duplicate name.
    std::size_t add(const std::string& name, const HermitianOperator& op);
    // Population-weighted adiabatic energy sum_a rho_aa (E_a + H_SB) on each
    // population's own characteristic.
    std::size_t add_energy(const std::string& name);

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<Entry> entries_;
};

struct ObservableSeries {
    int dim = 0;
    std::vector<double> times;
    std::vector<CMatrix> rho;          // reduced density matrix, fixed basis
    std::vector<CMatrix> rho_stderr;   // (stderr of Re, stderr of Im) packed as complex
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;   // [observable][time]
    std::vector<std::vector<double>> stderrs;  // [observable][time]

    std::size_t n_traj = 0;
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
    std::vector<std::string> drop_reasons;  // first few diagnostics
    double max_casimir_drift = 0.0;
    double max_modulus_error = 0.0;  // max | |rho_ab(t)| - |rho_ab(0)| |
    std::size_t reanchors = 0;
};

// Number of workers from SPINBATH_WORKERS, or hardware concurrency when unset.
// Throws Error on a malformed value.
unsigned workers_from_environment();

// Trajectory ensemble. Results are bit-identical for any worker count:
// trajectories are reduced in fixed blocks, in index order.
ObservableSeries run_ensemble(const EnsembleSpec& spec, const Model& model, const ObservableRegistry& observables,
                              unsigned workers = 1);

}  // namespace spinbath
