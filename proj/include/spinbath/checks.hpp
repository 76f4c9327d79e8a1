#pragma once

// Built-in invariant suite behind `spinbath check`, plus the random model
// generators it draws from.

#include "spinbath/adiabatic.hpp"
#include "spinbath/propagate.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace spinbath {

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct CheckOptions {
    std::uint64_t seed = 20240917;
    std::size_t points = 100;
    // Fault injection: scale the Hellmann-Feynman tensor by (1 + 1e-3) before
    // comparing it with finite differences.
    bool perturb_couplings = false;
};

std::vector<CheckResult> run_invariant_checks(const CheckOptions& options = {});

double uniform_real(std::mt19937_64& rng, double lo, double hi);
HermitianOperator random_hermitian(std::mt19937_64& rng, int n, bool complex_entries = true);
SpinConfiguration random_configuration(std::mt19937_64& rng, std::size_t n_spins, double radius = 1.0);
QuantumModelSpec random_model(std::mt19937_64& rng, int n_levels, std::size_t n_spins, bool complex_entries = true);
BathSpec random_bath(std::mt19937_64& rng, std::size_t n_spins);

// Draws configurations until the adiabatic spectrum has min gap >= min_gap.
SpinConfiguration random_gapped_configuration(std::mt19937_64& rng, const QuantumModelSpec& spec, double min_gap = 0.2);

}  // namespace spinbath
