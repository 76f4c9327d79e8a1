#pragma once

// Adiabatic eigenframe of h(S), gauge handling, nonadiabatic coupling
// tensors d^{iI}_{ab} = <a;S| d/dS_iI |b;S>, geometric phase rates and the
// transition superoperators of the adiabatic-basis master equation.

#include "spinbath/quantum_model.hpp"
#include "spinbath/spin_bath.hpp"
#include "spinbath/types.hpp"

#include <array>
#include <cstddef>
#include <functional>

namespace spinbath {

inline constexpr double kGapTol = 1e-8;
inline constexpr double kDiagonalStep = 1e-5;
inline constexpr double kJacobiThreshold = 1e-14;
inline constexpr int kJacobiMaxSweeps = 100;

struct AdiabaticFrame {
    RVector energies;  // ascending
    CMatrix states;    // column a is |a;S>
    RMatrix bohr;      // bohr(a, b) = E_a - E_b

    int dim() const { return static_cast<int>(energies.size()); }
    auto state(int a) const { return states.col(a); }

    // Smallest gap between adjacent levels; +inf for an empty frame.
    double min_gap() const;
};

// Jacobi rotations (closed form for 2x2). Eigenvalues ascending; each
// eigenvector's largest-modulus component is made real and positive (ties go
// to the lowest index). Throws ConvergenceError if the sweep cap is exceeded.
AdiabaticFrame eigendecompose(const HermitianOperator& h);
AdiabaticFrame eigendecompose(const CMatrix& h);
void eigendecompose_into(const CMatrix& h, AdiabaticFrame& out);

void require_nondegenerate(const AdiabaticFrame& frame, double gap_tol = kGapTol);

// Multiplies each column of `frame` by the unit phase that makes
// <reference_a|a> real and positive. Throws DegeneracyError if either frame has
// a gap below gap_tol or an overlap vanishes (the levels were reordered).
AdiabaticFrame gauge_align(const AdiabaticFrame& frame, const AdiabaticFrame& reference, double gap_tol = kGapTol);

// Single-valued local gauge: for each level a, component index[a] of |a> is
// held at the fixed phase phase[a]. Unlike gauge_align this defines the basis
// as a function of S, which is what diagonal couplings are measured in.
struct GaugeAnchor {
    int dim = 0;
    std::array<int, kMaxLevels> index{};
    std::array<double, kMaxLevels> phase{};

    // Largest-modulus component of each state with its current phase.
    static GaugeAnchor of(const AdiabaticFrame& frame);

    // Smallest |component| over the anchored entries of `frame`.
    double min_weight(const AdiabaticFrame& frame) const;
};

void apply_anchor(AdiabaticFrame& frame, const GaugeAnchor& anchor);

class CouplingTensor {
public:
    CouplingTensor() = default;
    CouplingTensor(std::size_t n_spins, int dim);

    std::size_t n_spins() const { return n_spins_; }
    int dim() const { return dim_; }

    CMatrix& at(std::size_t spin, int axis) { return d_[3 * spin + axis]; }
    const CMatrix& at(std::size_t spin, int axis) const { return d_[3 * spin + axis]; }

    Complex operator()(std::size_t spin, int axis, int a, int b) const { return d_[3 * spin + axis](a, b); }

    // Per-spin 3-vector (d^{i,x}_{ab}, d^{i,y}_{ab}, d^{i,z}_{ab}).
    CVec3 vector(std::size_t spin, int a, int b) const;

    CouplingTensor off_diagonal_part() const;
    CouplingTensor diagonal_part() const;

    CouplingTensor& operator+=(const CouplingTensor& other);
    CouplingTensor& operator*=(double s);

    double max_abs() const;

private:
    std::size_t n_spins_ = 0;
    int dim_ = 0;
    std::vector<CMatrix> d_;
};

CouplingTensor operator+(CouplingTensor a, const CouplingTensor& b);
CouplingTensor operator*(double s, CouplingTensor t);

// phi^{iI}_a = -i d^{iI}_{aa}
class GeometricPhaseRates {
public:
    GeometricPhaseRates() = default;
    GeometricPhaseRates(std::size_t n_spins, int dim);

    // Real part of -i d_aa; the discarded imaginary part is reported by max_residual().
    static GeometricPhaseRates from_diagonal(const CouplingTensor& d);

    std::size_t n_spins() const { return n_spins_; }
    int dim() const { return dim_; }

    double& at(std::size_t spin, int axis, int a) { return phi_[3 * spin + axis](a); }
    double at(std::size_t spin, int axis, int a) const { return phi_[3 * spin + axis](a); }
    Vec3 vector(std::size_t spin, int a) const;

    // max |Re d_aa| seen when built from a tensor.
    double max_residual() const { return residual_; }

private:
    std::size_t n_spins_ = 0;
    int dim_ = 0;
    std::vector<RVector> phi_;
    double residual_ = 0.0;
};

// Hellmann-Feynman form d_ab = <a|dh|b> / (E_b - E_a) for a != b; diagonal zero.
CouplingTensor coupling_offdiagonal(const AdiabaticFrame& frame, const QuantumModelSpec& spec, double gap_tol = kGapTol);

// Per-level phase function chi_a(S) applied as |a> -> exp(i chi_a)|a>.
using GaugeTwist = std::function<RVector(const SpinConfiguration&)>;

// Full tensor by central differences of eigenvectors held in the anchor gauge
// of the frame at `config`, optionally twisted. Independent of the
// Hellmann-Feynman route.
CouplingTensor coupling_finite_difference(const QuantumModelSpec& spec, const SpinConfiguration& config,
                                          double step = kDiagonalStep, const GaugeTwist& twist = {});

// Diagonal couplings d^{iI}_{aa} by central differences of eigenvectors held in
// the anchor gauge of the frame at `config` (optionally twisted). Only the
// diagonal entries of the returned tensor are filled.
CouplingTensor coupling_diagonal_tensor(const QuantumModelSpec& spec, const SpinConfiguration& config,
                                        double step = kDiagonalStep, const GaugeTwist& twist = {});
GeometricPhaseRates coupling_diagonal(const QuantumModelSpec& spec, const SpinConfiguration& config,
                                      double step = kDiagonalStep, const GaugeTwist& twist = {});

// Closed-form diagonal couplings in the anchored gauge, from the off-diagonal
// tensor: d_aa = -i Im(e^{-i chi_a} sum_{b != a} <k_a|b> d_ba) / |<k_a|a>|.
CouplingTensor coupling_diagonal_analytic(const AdiabaticFrame& frame, const CouplingTensor& offdiag,
                                          const GaugeAnchor& anchor);

// dE_a/dS_iI = Re <a| gamma_i A_I |a>; result[a][i].
std::vector<SpinField> energy_gradients(const AdiabaticFrame& frame, const QuantumModelSpec& spec);

// Gradient of H_SB + (E_a + E_b)/2 with the frame taken at `config`.
SpinField average_surface_gradient(const AdiabaticFrame& frame, const QuantumModelSpec& spec, const BathSpec& bath,
                                   const SpinConfiguration& config, int a, int b, double gap_tol = kGapTol);
SpinField average_surface_gradient(const QuantumModelSpec& spec, const BathSpec& bath, const SpinConfiguration& config,
                                   int a, int b, double gap_tol = kGapTol);

// Characteristic flow S_dot = B(S) grad H^S_ab.
SpinField liouville_drift(const AdiabaticFrame& frame, const QuantumModelSpec& spec, const BathSpec& bath,
                          const SpinConfiguration& config, int a, int b, double gap_tol = kGapTol);
SpinField liouville_drift(const QuantumModelSpec& spec, const BathSpec& bath, const SpinConfiguration& config, int a,
                          int b, double gap_tol = kGapTol);

// x^T B(S_i) y summed over spins.
Complex b_contract(const SpinConfiguration& config, std::span<const CVec3> x, std::span<const CVec3> y);

// First-order transition superoperator. Acting on a smooth element field f,
// (J f)_{ab,cd} = scalar(a,b,c,d) f + sum_{i,J} coefficient(a,b,c,d,i)_J df/dS_iJ.
class JSuperoperator {
public:
    JSuperoperator(int dim, std::size_t n_spins);

    int dim() const { return n_; }
    std::size_t n_spins() const { return n_spins_; }

    Complex& scalar(int a, int b, int c, int d) { return scalar_[index(a, b, c, d)]; }
    Complex scalar(int a, int b, int c, int d) const { return scalar_[index(a, b, c, d)]; }
    CVec3& coefficient(int a, int b, int c, int d, std::size_t spin) { return coeff_[index(a, b, c, d) * n_spins_ + spin]; }
    const CVec3& coefficient(int a, int b, int c, int d, std::size_t spin) const {
        return coeff_[index(a, b, c, d) * n_spins_ + spin];
    }

    // Applies element (a,b,c,d) to a test function with value f and gradient grad_f.
    Complex apply(int a, int b, int c, int d, Complex f, std::span<const CVec3> grad_f) const;

    double max_abs_coefficient() const;

private:
    std::size_t index(int a, int b, int c, int d) const { return ((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d; }

    int n_;
    std::size_t n_spins_;
    std::vector<Complex> scalar_;
    std::vector<CVec3> coeff_;
};

class SSuperoperator {
public:
    explicit SSuperoperator(int dim);

    int dim() const { return n_; }
    Complex& operator()(int a, int b, int c, int d) { return v_[index(a, b, c, d)]; }
    Complex operator()(int a, int b, int c, int d) const { return v_[index(a, b, c, d)]; }

private:
    std::size_t index(int a, int b, int c, int d) const { return ((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d; }

    int n_;
    std::vector<Complex> v_;
};

// Everything the superoperators need at one bath point.
struct SuperoperatorInputs {
    SpinConfiguration config;
    SpinField bath_grad;
    AdiabaticFrame frame;
    std::vector<SpinField> energy_grads;
    CouplingTensor couplings;  // off-diagonal and diagonal parts

    // Frame in its anchor gauge, Hellmann-Feynman off-diagonals plus
    // closed-form diagonals.
    static SuperoperatorInputs evaluate(const QuantumModelSpec& spec, const BathSpec& bath, const SpinConfiguration& config);
};

JSuperoperator j_superoperator(const SpinConfiguration& config, std::span<const Vec3> bath_grad,
                               const AdiabaticFrame& frame, const CouplingTensor& d);
SSuperoperator s_superoperator(const SpinConfiguration& config, const AdiabaticFrame& frame,
                               const std::vector<SpinField>& energy_grads, const CouplingTensor& d);

// Element-diagonal adiabatic limits: result(a, b) multiplies rho_ab.
//   J^ad_ab = i sum_i (phi_a - phi_b)^T B(S_i) dH_SB/dS_i
//   S^ad_ab = -(i/2) sum_i (phi_a - phi_b)^T B(S_i) d(E_a + E_b)/dS_i
CMatrix j_adiabatic(const SpinConfiguration& config, std::span<const Vec3> bath_grad, const GeometricPhaseRates& phases);
CMatrix s_adiabatic(const SpinConfiguration& config, const std::vector<SpinField>& energy_grads,
                    const GeometricPhaseRates& phases);

}  // namespace spinbath
