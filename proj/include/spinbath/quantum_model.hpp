#pragma once

// Quantum subsystem coupled to the spin bath:
//   h(S) = H + sum_i gamma_i sum_I S_iI A^(i)_I,   H_total(S) = h(S) + H_SB(S)

#include "spinbath/spin_bath.hpp"
#include "spinbath/types.hpp"

#include <array>
#include <cstddef>

namespace spinbath {

class HermitianOperator {
public:
    HermitianOperator() = default;
    // Throws DimensionError if m is not square with 2 <= n <= kMaxLevels, and
    // Error if m deviates from Hermitian by more than tol (relative to its size).
    // The stored matrix is the exact Hermitian part (m + m^dagger)/2.
    explicit HermitianOperator(const CMatrix& m, double tol = 1e-12);

    static HermitianOperator zero(int n);
    static HermitianOperator identity(int n);

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }

    Complex operator()(int a, int b) const { return m_(a, b); }

    friend bool operator==(const HermitianOperator& a, const HermitianOperator& b) {
        return a.m_.rows() == b.m_.rows() && a.m_.cols() == b.m_.cols() && a.m_ == b.m_;
    }

private:
    CMatrix m_;
};

HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

struct SpinCoupling {
    double gamma = 0.0;
    std::array<HermitianOperator, 3> axis_ops;
};

struct QuantumModelSpec {
    HermitianOperator h_sub;
    std::vector<SpinCoupling> couplings;  // one entry per bath spin

    int dim() const { return h_sub.dim(); }
    std::size_t n_spins() const { return couplings.size(); }

    // All operators share dim(); there is one coupling per spin.
    void validate() const;
    void validate(std::size_t n_spins) const;
};

// H = -delta sigma_x, A_I = sigma_I on every spin.
QuantumModelSpec qubit_isotropic(double delta, double gamma, std::size_t n_spins);
// H = -delta sigma_x, A_z = sigma_z, A_x = A_y = 0.
QuantumModelSpec qubit_dephasing(double delta, double gamma, std::size_t n_spins);

HermitianOperator h_of_s(const QuantumModelSpec& spec, const SpinConfiguration& config);

// Allocation-free variant for hot loops; out must not alias spec storage.
void assemble_h(const QuantumModelSpec& spec, const SpinConfiguration& config, CMatrix& out);

// dh/dS_iI = gamma_i A^(i)_I, independent of the configuration.
HermitianOperator dh_ds(const QuantumModelSpec& spec, std::size_t spin, Axis axis);

// Tr[rho h(S)] + H_SB(S). rho must have unit trace to 1e-8.
double total_energy(const QuantumModelSpec& spec, const BathSpec& bath, const SpinConfiguration& config,
                    const HermitianOperator& rho);

}  // namespace spinbath
