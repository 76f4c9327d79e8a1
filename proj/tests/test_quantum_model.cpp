#include <doctest.h>

#include "spinbath/checks.hpp"
#include "spinbath/quantum_model.hpp"

#include <cmath>
#include <random>

using namespace spinbath;

namespace {

SpinConfiguration one(const Vec3& s) { return SpinConfiguration({s}); }

QuantumModelSpec pauli_model() { return qubit_isotropic(0.0, 1.0, 1); }

}  // namespace

TEST_CASE("HermitianOperator validation") {
    CMatrix m(2, 2);
    m << Complex(1, 0), Complex(0, 1), Complex(0, -1), Complex(2, 0);
    CHECK_NOTHROW(HermitianOperator{m});
    m(0, 1) = Complex(0, 2);
    CHECK_THROWS_AS(HermitianOperator{m}, Error);
    CHECK_THROWS_AS(HermitianOperator(CMatrix::Identity(1, 1)), DimensionError);
    CHECK_THROWS_AS(HermitianOperator(CMatrix::Zero(2, 3)), DimensionError);
    CMatrix nan = CMatrix::Identity(2, 2);
    nan(1, 1) = Complex(NAN, 0);
    CHECK_THROWS_AS(HermitianOperator{nan}, Error);
    // Rounding-level skew is absorbed into the exact Hermitian part.
    CMatrix near = CMatrix::Identity(2, 2);
    near(0, 1) = Complex(1e-15, 0);
    CHECK(HermitianOperator(near).matrix().isApprox(HermitianOperator(near).matrix().adjoint()));
}

TEST_CASE("Pauli matrices") {
    CHECK((pauli_x().matrix() * pauli_x().matrix()).isIdentity());
    CHECK((pauli_y().matrix() * pauli_y().matrix()).isIdentity());
    CHECK((pauli_x().matrix() * pauli_y().matrix()).isApprox(Complex(0, 1) * pauli_z().matrix()));
}

TEST_CASE("h_of_s examples") {
    QuantumModelSpec decoupled = qubit_isotropic(0.7, 0.0, 2);
    const SpinConfiguration c2({Vec3(0.1, 0.2, 0.3), Vec3(-1, 0, 0)});
    CHECK(h_of_s(decoupled, c2) == decoupled.h_sub);
    CHECK(h_of_s(pauli_model(), one(Vec3(0, 0, 1))).matrix().isApprox(pauli_z().matrix()));
    CHECK_THROWS_AS(h_of_s(pauli_model(), c2), DimensionError);

    // bilinear: h(2S) - h(S) = sum gamma S_I A_I
    std::mt19937_64 rng(11);
    const QuantumModelSpec spec = random_model(rng, 3, 2);
    const SpinConfiguration c = random_configuration(rng, 2);
    SpinConfiguration c_twice = c;
    for (auto& s : c_twice.spins()) s *= 2.0;
    CMatrix coupling = CMatrix::Zero(3, 3);
    for (std::size_t i = 0; i < 2; ++i)
        for (int axis = 0; axis < 3; ++axis)
            coupling += spec.couplings[i].gamma * c[i][axis] * spec.couplings[i].axis_ops[axis].matrix();
    CHECK((h_of_s(spec, c_twice).matrix() - h_of_s(spec, c).matrix() - coupling).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("h_of_s is Hermitian for random models") {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 50; ++k) {
        const QuantumModelSpec spec = random_model(rng, 2 + k % 4, 1 + k % 3);
        const CMatrix h = h_of_s(spec, random_configuration(rng, spec.n_spins(), 3.0)).matrix();
        CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("dh_ds: exact, configuration independent, matches finite differences") {
    CHECK(dh_ds(qubit_isotropic(1.0, 0.0, 1), 0, Axis::X) == HermitianOperator::zero(2));
    CHECK(dh_ds(pauli_model(), 0, Axis::Z).matrix().isApprox(pauli_z().matrix()));
    CHECK_THROWS_AS(dh_ds(pauli_model(), 1, Axis::Z), DimensionError);

    std::mt19937_64 rng(13);
    const QuantumModelSpec spec = random_model(rng, 3, 2);
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        SpinConfiguration c = random_configuration(rng, 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (int axis = 0; axis < 3; ++axis) {
                const CMatrix exact = dh_ds(spec, i, static_cast<Axis>(axis)).matrix();
                const double x0 = c[i][axis];
                c.spins()[i][axis] = x0 + h;
                const CMatrix plus = h_of_s(spec, c).matrix();
                c.spins()[i][axis] = x0 - h;
                const CMatrix minus = h_of_s(spec, c).matrix();
                c.spins()[i][axis] = x0;
                const CMatrix fd = (plus - minus) / (2 * h);
                CHECK((fd - exact).cwiseAbs().maxCoeff() <= 1e-8 * exact.cwiseAbs().maxCoeff());
            }
    }
}

TEST_CASE("total_energy examples") {
    const BathSpec bath = BathSpec::zeeman(Vec3(0.2, 0, 0.5), 1);
    const SpinConfiguration c = one(Vec3(0, 0, 1));
    const double hsb = bath_energy(c, bath);

    // decoupled, ground projector of -delta sigma_x: |+x>, energy -delta
    const QuantumModelSpec dec = qubit_isotropic(0.8, 0.0, 1);
    CMatrix ground(2, 2);
    ground.setConstant(Complex(0.5, 0));
    CHECK(total_energy(dec, bath, c, HermitianOperator(ground)) == doctest::Approx(-0.8 + hsb));

    std::mt19937_64 rng(14);
    const QuantumModelSpec spec = random_model(rng, 3, 1);
    const CMatrix mixed = CMatrix::Identity(3, 3) / 3.0;
    CHECK(total_energy(spec, bath, c, HermitianOperator(mixed)) ==
          doctest::Approx(h_of_s(spec, c).matrix().trace().real() / 3.0 + hsb));

    CMatrix up = CMatrix::Zero(2, 2);
    up(0, 0) = 1.0;
    CHECK(total_energy(pauli_model(), bath, c, HermitianOperator(up)) == doctest::Approx(1.0 + hsb));
    CHECK_THROWS_AS(total_energy(pauli_model(), bath, c, HermitianOperator(2.0 * up)), Error);
}

TEST_CASE("presets") {
    const QuantumModelSpec iso = qubit_isotropic(0.5, 0.3, 2);
    CHECK(iso.dim() == 2);
    CHECK(iso.n_spins() == 2);
    CHECK(iso.h_sub.matrix().isApprox(-0.5 * pauli_x().matrix()));
    CHECK(iso.couplings[1].axis_ops[1] == pauli_y());
    const QuantumModelSpec deph = qubit_dephasing(0.5, 0.3, 1);
    CHECK(deph.couplings[0].axis_ops[0] == HermitianOperator::zero(2));
    CHECK(deph.couplings[0].axis_ops[2] == pauli_z());
    CHECK_NOTHROW(iso.validate(2));
    CHECK_THROWS_AS(iso.validate(3), DimensionError);
}
