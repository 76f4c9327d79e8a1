#include "spinbath/quantum_model.hpp"

#include <cmath>
#include <string>

namespace spinbath {

HermitianOperator::HermitianOperator(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) throw DimensionError("operator must be square");
    if (m.rows() < 2 || m.rows() > kMaxLevels)
        throw DimensionError("operator dimension must be between 2 and " + std::to_string(kMaxLevels));
    if (!m.allFinite()) throw Error("operator has non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double skew = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (skew > tol * scale) throw Error("operator is not Hermitian (max |m - m^dagger| = " + std::to_string(skew) + ")");
    m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::zero(int n) { return HermitianOperator(CMatrix::Zero(n, n)); }

HermitianOperator HermitianOperator::identity(int n) { return HermitianOperator(CMatrix::Identity(n, n)); }

HermitianOperator pauli_x() {
    CMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return HermitianOperator(m);
}

HermitianOperator pauli_y() {
    const Complex i(0.0, 1.0);
    CMatrix m(2, 2);
    m << 0.0, -i, i, 0.0;
    return HermitianOperator(m);
}

HermitianOperator pauli_z() {
    CMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return HermitianOperator(m);
}

void QuantumModelSpec::validate() const {
    const int n = dim();
    if (n < 2) throw DimensionError("quantum model has no subsystem Hamiltonian");
    for (std::size_t i = 0; i < couplings.size(); ++i) {
        if (!std::isfinite(couplings[i].gamma)) throw Error("coupling strength must be finite");
        for (const auto& op : couplings[i].axis_ops)
            if (op.dim() != n)
                throw DimensionError("coupling operator for spin " + std::to_string(i) + " has dimension " +
                                     std::to_string(op.dim()) + ", expected " + std::to_string(n));
    }
}

void QuantumModelSpec::validate(std::size_t n_spins) const {
    validate();
    if (couplings.size() != n_spins)
        throw DimensionError("quantum model couples " + std::to_string(couplings.size()) + " spins, bath has " +
                             std::to_string(n_spins));
}

namespace {

QuantumModelSpec qubit_model(double delta, double gamma, std::size_t n_spins, bool isotropic) {
    QuantumModelSpec spec;
    spec.h_sub = HermitianOperator(-delta * pauli_x().matrix());
    const auto zero = HermitianOperator::zero(2);
    SpinCoupling c;
    c.gamma = gamma;
    c.axis_ops = isotropic ? std::array{pauli_x(), pauli_y(), pauli_z()} : std::array{zero, zero, pauli_z()};
    spec.couplings.assign(n_spins, c);
    return spec;
}

}  // namespace

QuantumModelSpec qubit_isotropic(double delta, double gamma, std::size_t n_spins) {
    return qubit_model(delta, gamma, n_spins, true);
}

QuantumModelSpec qubit_dephasing(double delta, double gamma, std::size_t n_spins) {
    return qubit_model(delta, gamma, n_spins, false);
}

void assemble_h(const QuantumModelSpec& spec, const SpinConfiguration& config, CMatrix& out) {
    if (config.size() != spec.n_spins())
        throw DimensionError("configuration has " + std::to_string(config.size()) + " spins, model couples " +
                             std::to_string(spec.n_spins()));
    out = spec.h_sub.matrix();
    for (std::size_t i = 0; i < config.size(); ++i) {
        const auto& c = spec.couplings[i];
        if (c.gamma == 0.0) continue;
        for (int axis = 0; axis < 3; ++axis) out += (c.gamma * config[i][axis]) * c.axis_ops[axis].matrix();
    }
}

HermitianOperator h_of_s(const QuantumModelSpec& spec, const SpinConfiguration& config) {
    CMatrix h;
    assemble_h(spec, config, h);
    return HermitianOperator(h);
}

HermitianOperator dh_ds(const QuantumModelSpec& spec, std::size_t spin, Axis axis) {
    const int a = static_cast<int>(axis);
    if (spin >= spec.n_spins() || a < 0 || a > 2) throw DimensionError("dh_ds: spin or axis index out of range");
    const auto& c = spec.couplings[spin];
    return HermitianOperator(c.gamma * c.axis_ops[a].matrix());
}

double total_energy(const QuantumModelSpec& spec, const BathSpec& bath, const SpinConfiguration& config,
                    const HermitianOperator& rho) {
    if (rho.dim() != spec.dim()) throw DimensionError("density matrix dimension does not match the model");
    const Complex tr = rho.matrix().trace();
    if (std::abs(tr - 1.0) > 1e-8) throw Error("density matrix trace differs from 1");
    CMatrix h;
    assemble_h(spec, config, h);
    return (rho.matrix() * h).trace().real() + bath_energy(config, bath);
}

}  // namespace spinbath
