#pragma once

// Classical spin phase space: the antisymmetric bracket matrix, the spin
// equations of motion S_dot = B(S) dH/dS and integrators that respect them.

#include "spinbath/types.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace spinbath {

// Ordered set of classical spins with the Casimirs S_i.S_i cached at
// construction. Integrators overwrite spins in place and keep the cache, so
// casimir_drift() measures accumulated error.
class SpinConfiguration {
public:
    SpinConfiguration() = default;
    explicit SpinConfiguration(std::vector<Vec3> spins);

    std::size_t size() const { return spins_.size(); }
    const Vec3& operator[](std::size_t i) const { return spins_[i]; }
    Vec3& operator[](std::size_t i) { return spins_[i]; }

    const std::vector<Vec3>& spins() const { return spins_; }
    std::vector<Vec3>& spins() { return spins_; }

    double casimir(std::size_t i) const { return casimirs_[i]; }
    const std::vector<double>& casimirs() const { return casimirs_; }

    // max_i |S_i.S_i - C2_i|
    double casimir_drift() const;

    bool finite() const;

    // Flattened 3N component vector, spin-major.
    Eigen::VectorXd flatten() const;

private:
    std::vector<Vec3> spins_;
    std::vector<double> casimirs_;
};

// H_SB = -sum_i b.S_i - sum_{i<j} J_ij S_i.S_j
struct BathSpec {
    Vec3 field = Vec3::Zero();
    Eigen::MatrixXd exchange;

    static BathSpec zeeman(const Vec3& b, std::size_t n_spins);

    std::size_t n_spins() const { return static_cast<std::size_t>(exchange.rows()); }

    // Throws DimensionError unless exchange is n x n, symmetric and zero on the diagonal.
    void validate(std::size_t n_spins) const;
};

Matrix3 b_matrix(const Vec3& s);

// {A,B} = sum_i gradA_i . B(S_i) gradB_i
double spin_bracket(std::span<const Vec3> grad_a, std::span<const Vec3> grad_b, const SpinConfiguration& config);

double bath_energy(const SpinConfiguration& config, const BathSpec& spec);
SpinField bath_gradient(const SpinConfiguration& config, const BathSpec& spec);
void bath_gradient(const SpinConfiguration& config, const BathSpec& spec, SpinField& out);

SpinField spin_time_derivative(const SpinConfiguration& config, std::span<const Vec3> grad);
void spin_time_derivative(const SpinConfiguration& config, std::span<const Vec3> grad, SpinField& out);

using GradientFn = std::function<SpinField(const SpinConfiguration&)>;
using DriftFn = std::function<void(const SpinConfiguration&, SpinField&)>;

GradientFn bath_gradient_fn(const BathSpec& spec);

// Rotates v about `axis` by `angle` (right-handed). axis need not be normalized;
// a zero axis leaves v unchanged.
Vec3 rodrigues_rotate(const Vec3& v, const Vec3& axis, double angle);

// Symmetric sequential splitting over single spins: spins 0..N-2 advance dt/2,
// spin N-1 advances dt, then N-2..0 advance dt/2. Each sub-step is the exact
// rotation S_i -> R(g_i, |g_i| dt) S_i about g_i = dH/dS_i with all other spins
// frozen. For N = 2 this is the even/odd sublattice scheme. Norms are
// preserved to rounding; energy is preserved exactly whenever g_i does not
// depend on S_i (Zeeman plus zero-diagonal exchange).
SpinConfiguration precession_step(const SpinConfiguration& config, const GradientFn& field, double dt);

// Classical RK4 for S_dot = B(S) grad(S).
SpinConfiguration rk4_step(const SpinConfiguration& config, const GradientFn& grad, double dt);

// Scratch buffers for repeated in-place RK4 steps.
struct Rk4Workspace {
    SpinField k2, k3, k4;
    SpinConfiguration stage;
    void resize(const SpinConfiguration& like);
};

// In-place RK4 step with the stage-one drift k1 supplied by the caller.
void rk4_advance(SpinConfiguration& config, const DriftFn& drift, const SpinField& k1, double dt, Rk4Workspace& ws);

// kappa = sum_{i,I} d(S_dot_iI)/dS_iI by central differences.
double compressibility(const SpinConfiguration& config, const GradientFn& grad, double step = 1e-5);

}  // namespace spinbath
