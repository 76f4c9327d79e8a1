#include <doctest.h>

#include "spinbath/adiabatic.hpp"
#include "spinbath/checks.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace spinbath;

namespace {

SpinConfiguration one(const Vec3& s) { return SpinConfiguration({s}); }

SpinConfiguration on_cone(double theta, double phi) {
    return one(Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)));
}

double wrap(double x) {
    const double two_pi = 2.0 * std::numbers::pi;
    x = std::fmod(x, two_pi);
    if (x <= -std::numbers::pi) x += two_pi;
    if (x > std::numbers::pi) x -= two_pi;
    return x;
}

// Loop integral of (phi_1 - phi_0).dS on a cone about z, periodic trapezoid.
double cone_phase(const QuantumModelSpec& spec, double theta, int m, double step = kDiagonalStep) {
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * std::numbers::pi * k / m;
        const Vec3 tangent(-std::sin(theta) * std::sin(t), std::sin(theta) * std::cos(t), 0.0);
        const auto phi = coupling_diagonal(spec, on_cone(theta, t), step);
        sum += (phi.vector(0, 1) - phi.vector(0, 0)).dot(tangent);
    }
    return sum * 2.0 * std::numbers::pi / m;
}

}  // namespace

TEST_CASE("eigendecompose examples") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    const AdiabaticFrame fd = eigendecompose(d);
    CHECK(fd.energies(0) == -1.0);
    CHECK(fd.energies(1) == 1.0);
    CHECK(std::abs(fd.states(1, 0)) == 1.0);
    CHECK(std::abs(fd.states(0, 1)) == 1.0);

    const AdiabaticFrame fx = eigendecompose(pauli_x());
    CHECK(fx.energies(0) == doctest::Approx(-1.0));
    CHECK(fx.energies(1) == doctest::Approx(1.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(fx.states(0, 0) - r) < 1e-15);
    CHECK(std::abs(fx.states(1, 0) + r) < 1e-15);
    CHECK(std::abs(fx.states(0, 1) - r) < 1e-15);
    CHECK(std::abs(fx.states(1, 1) - r) < 1e-15);

    const QuantumModelSpec pauli = qubit_isotropic(0.0, 1.0, 1);
    for (double theta : {0.1, 1.0, 2.5}) {
        const AdiabaticFrame f = eigendecompose(h_of_s(pauli, on_cone(theta, 0.0)));
        CHECK(f.energies(0) == doctest::Approx(-1.0));
        CHECK(f.energies(1) == doctest::Approx(1.0));
    }
}

TEST_CASE("eigendecompose agrees with a reference eigensolver") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 200; ++k) {
        const int n = 2 + k % 7;
        const HermitianOperator h = random_hermitian(rng, n);
        const AdiabaticFrame f = eigendecompose(h);
        const Eigen::MatrixXcd dense = h.matrix();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(dense);
        const double scale = dense.norm();
        CHECK((Eigen::VectorXd(f.energies) - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12 * scale);
        for (int a = 0; a < n; ++a) {
            CHECK((h.matrix() * f.state(a) - f.energies(a) * f.state(a)).norm() < 1e-10 * scale);
            // gauge: largest component real and positive
            Eigen::Index k_max;
            f.states.col(a).cwiseAbs().maxCoeff(&k_max);
            CHECK(f.states(k_max, a).imag() == 0.0);
            CHECK(f.states(k_max, a).real() > 0.0);
        }
        CHECK((f.states.adjoint() * f.states - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
        for (int a = 0; a < n; ++a) {
            CHECK(f.bohr(a, a) == 0.0);
            for (int b = 0; b < n; ++b) CHECK(f.bohr(a, b) == -f.bohr(b, a));
        }
        if (n > 1) CHECK(f.energies(n - 1) >= f.energies(0));
    }
}

TEST_CASE("gauge_align") {
    std::mt19937_64 rng(22);
    const QuantumModelSpec spec = random_model(rng, 3, 1);
    const SpinConfiguration c = random_gapped_configuration(rng, spec);
    const AdiabaticFrame f = eigendecompose(h_of_s(spec, c));
    const AdiabaticFrame same = gauge_align(f, f);
    CHECK((same.states - f.states).cwiseAbs().maxCoeff() < 1e-15);

    AdiabaticFrame twisted = f;
    twisted.states.col(1) *= std::polar(1.0, 2.1);
    twisted.states.col(2) *= std::polar(1.0, -0.4);
    CHECK((gauge_align(twisted, f).states - f.states).cwiseAbs().maxCoeff() < 1e-14);

    // continuity: the aligned jump is O(dt)
    auto jump = [&](double dt) {
        SpinConfiguration moved = c;
        moved.spins()[0] += dt * Vec3(0.3, -0.5, 0.2);
        const AdiabaticFrame g = gauge_align(eigendecompose(h_of_s(spec, moved)), f);
        return (g.states - f.states).norm();
    };
    CHECK(jump(1e-3) / jump(5e-4) == doctest::Approx(2.0).epsilon(0.01));

    CMatrix deg = CMatrix::Identity(2, 2);
    CHECK_THROWS_AS(gauge_align(eigendecompose(deg), eigendecompose(deg)), DegeneracyError);
    CHECK_THROWS_AS(require_nondegenerate(eigendecompose(deg)), DegeneracyError);
}

TEST_CASE("coupling_offdiagonal examples") {
    const QuantumModelSpec decoupled = qubit_isotropic(1.0, 0.0, 1);
    const SpinConfiguration c = one(Vec3(0.2, 0.1, 0.9));
    CHECK(coupling_offdiagonal(eigendecompose(h_of_s(decoupled, c)), decoupled).max_abs() == 0.0);

    const QuantumModelSpec pauli = qubit_isotropic(0.0, 1.0, 1);
    const SpinConfiguration up = one(Vec3(0, 0, 1));
    const CouplingTensor d = coupling_offdiagonal(eigendecompose(h_of_s(pauli, up)), pauli);
    CHECK(std::abs(d(0, 0, 1, 0)) == doctest::Approx(0.5));
    CHECK(std::abs(d(0, 0, 0, 1)) == doctest::Approx(0.5));
    // and by finite differences
    const CouplingTensor fd = coupling_finite_difference(pauli, up);
    CHECK(std::abs(fd(0, 0, 1, 0)) == doctest::Approx(0.5).epsilon(1e-8));

    CHECK_THROWS_AS(coupling_offdiagonal(eigendecompose(h_of_s(pauli, one(Vec3::Zero()))), pauli), DegeneracyError);
}

TEST_CASE("Hellmann-Feynman tensor: anti-Hermitian and equal to finite differences") {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 40; ++k) {
        const int n = 2 + k % 3;
        const QuantumModelSpec spec = random_model(rng, n, 1 + k % 2);
        const SpinConfiguration c = random_gapped_configuration(rng, spec);
        const CouplingTensor hf = coupling_offdiagonal(eigendecompose(h_of_s(spec, c)), spec);
        const CouplingTensor fd = coupling_finite_difference(spec, c);
        const double floor = 1e-2 * fd.off_diagonal_part().max_abs();
        for (std::size_t i = 0; i < c.size(); ++i)
            for (int axis = 0; axis < 3; ++axis)
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        CHECK(std::abs(fd(i, axis, a, b) + std::conj(fd(i, axis, b, a))) < 1e-8);
                        if (a == b) continue;
                        CHECK(std::abs(hf(i, axis, a, b) + std::conj(hf(i, axis, b, a))) < 1e-12);
                        CHECK(std::abs(hf(i, axis, a, b) - fd(i, axis, a, b)) <
                              1e-6 * std::max(std::abs(fd(i, axis, a, b)), floor));
                    }
    }
}

TEST_CASE("coupling_diagonal: imaginary, zero for real bases, step robust") {
    std::mt19937_64 rng(24);
    for (int k = 0; k < 40; ++k) {
        const QuantumModelSpec spec = random_model(rng, 2 + k % 3, 1 + k % 2);
        const SpinConfiguration c = random_gapped_configuration(rng, spec);
        const CouplingTensor d = coupling_diagonal_tensor(spec, c);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (int axis = 0; axis < 3; ++axis)
                for (int a = 0; a < spec.dim(); ++a) CHECK(std::abs(d(i, axis, a, a).real()) < 1e-10);
        const auto p4 = coupling_diagonal(spec, c, 1e-4);
        const auto p5 = coupling_diagonal(spec, c, 1e-5);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (int a = 0; a < spec.dim(); ++a) CHECK((p4.vector(i, a) - p5.vector(i, a)).norm() < 1e-6);
    }

    // Real operators only: the anchored basis stays real.
    const QuantumModelSpec deph = qubit_dephasing(0.7, 1.0, 2);
    const SpinConfiguration c({Vec3(0.3, 0.4, 0.5), Vec3(-0.2, 0.1, 0.8)});
    const auto phi = coupling_diagonal(deph, c);
    for (std::size_t i = 0; i < 2; ++i)
        for (int a = 0; a < 2; ++a) CHECK(phi.vector(i, a).norm() == 0.0);

    // No sigma_y coupling and S_y = 0: phases vanish even for the full Pauli set minus A_y.
    QuantumModelSpec no_y = qubit_isotropic(0.4, 1.0, 1);
    no_y.couplings[0].axis_ops[1] = HermitianOperator::zero(2);
    const auto phi_y = coupling_diagonal(no_y, one(Vec3(0.6, 0.0, 0.5)));
    CHECK(phi_y.vector(0, 0).norm() == 0.0);
    CHECK(phi_y.vector(0, 1).norm() == 0.0);
}

TEST_CASE("closed-form diagonal couplings match finite differences") {
    std::mt19937_64 rng(25);
    for (int k = 0; k < 40; ++k) {
        const QuantumModelSpec spec = random_model(rng, 2 + k % 3, 1 + k % 2);
        const SpinConfiguration c = random_gapped_configuration(rng, spec);
        const AdiabaticFrame f = eigendecompose(h_of_s(spec, c));
        const CouplingTensor an = coupling_diagonal_analytic(f, coupling_offdiagonal(f, spec), GaugeAnchor::of(f));
        const CouplingTensor fd = coupling_diagonal_tensor(spec, c);
        CHECK((an + (-1.0) * fd).max_abs() < 1e-6);
    }
}

TEST_CASE("Berry phase of the Pauli model from loop integrals of diagonal couplings") {
    const QuantumModelSpec pauli = qubit_isotropic(0.0, 1.0, 1);
    for (double theta : {std::numbers::pi / 4, std::numbers::pi / 3, 1.2}) {
        const double expected = wrap(2.0 * std::numbers::pi * (1.0 - std::cos(theta)));
        CHECK(std::abs(wrap(cone_phase(pauli, theta, 128) - expected)) < 1e-6);
    }
}

TEST_CASE("gauge covariance under a phase twist") {
    std::mt19937_64 rng(26);
    for (int k = 0; k < 20; ++k) {
        const int n = 2 + k % 2;
        const QuantumModelSpec spec = random_model(rng, n, 1);
        const SpinConfiguration c = random_gapped_configuration(rng, spec);
        // chi_a(S) = c_a . S + sin(S_z) a
        Eigen::MatrixXd w(n, 3);
        for (Eigen::Index j = 0; j < w.size(); ++j) w.data()[j] = uniform_real(rng, -1.5, 1.5);
        const GaugeTwist twist = [w](const SpinConfiguration& s) {
            RVector chi(w.rows());
            for (Eigen::Index a = 0; a < w.rows(); ++a) chi(a) = w.row(a).dot(s[0]) + std::sin(s[0].z()) * a;
            return chi;
        };
        const CouplingTensor plain = coupling_finite_difference(spec, c);
        const CouplingTensor tw = coupling_finite_difference(spec, c, kDiagonalStep, twist);
        for (int axis = 0; axis < 3; ++axis)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    if (a != b) {
                        CHECK(std::abs(std::abs(tw(0, axis, a, b)) - std::abs(plain(0, axis, a, b))) < 1e-6);
                    } else {
                        const double dchi = w(a, axis) + (axis == 2 ? std::cos(c[0].z()) * a : 0.0);
                        CHECK(std::abs(tw(0, axis, a, a) - plain(0, axis, a, a) - Complex(0.0, dchi)) < 1e-6);
                    }
                }
    }
}

TEST_CASE("average_surface_gradient and liouville_drift") {
    std::mt19937_64 rng(27);
    const BathSpec bath = random_bath(rng, 2);
    const SpinConfiguration c = random_configuration(rng, 2);
    const QuantumModelSpec decoupled = qubit_isotropic(0.9, 0.0, 2);
    const SpinField g = average_surface_gradient(decoupled, bath, c, 0, 1);
    const SpinField gb = bath_gradient(c, bath);
    for (int i = 0; i < 2; ++i) CHECK((g[i] - gb[i]).norm() == 0.0);
    const SpinField drift = liouville_drift(decoupled, bath, c, 1, 0);
    const SpinField bare = spin_time_derivative(c, gb);
    for (int i = 0; i < 2; ++i) CHECK((drift[i] - bare[i]).norm() < 1e-15);

    // Ground surface of the Pauli model: dE/dS = -S/|S|.
    const QuantumModelSpec pauli = qubit_isotropic(0.0, 1.0, 1);
    const SpinConfiguration s = one(Vec3(0.3, -0.4, 1.1));
    const SpinField ge = average_surface_gradient(pauli, BathSpec::zeeman(Vec3::Zero(), 1), s, 0, 0);
    CHECK((ge[0] + s[0] / s[0].norm()).norm() < 1e-14);

    // Finite differences of E_a.
    const QuantumModelSpec spec = random_model(rng, 3, 2);
    SpinConfiguration p = random_gapped_configuration(rng, spec);
    const auto grads = energy_gradients(eigendecompose(h_of_s(spec, p)), spec);
    const double h = 1e-6;
    for (std::size_t i = 0; i < 2; ++i)
        for (int axis = 0; axis < 3; ++axis) {
            const double x0 = p[i][axis];
            p.spins()[i][axis] = x0 + h;
            const RVector ep = eigendecompose(h_of_s(spec, p)).energies;
            p.spins()[i][axis] = x0 - h;
            const RVector em = eigendecompose(h_of_s(spec, p)).energies;
            p.spins()[i][axis] = x0;
            for (int a = 0; a < 3; ++a) {
                const double fd = (ep(a) - em(a)) / (2 * h);
                CHECK(std::abs(fd - grads[a][i][axis]) < 1e-6 * std::max(1.0, std::abs(fd)));
            }
        }

    const SpinField dr = liouville_drift(spec, bath, p, 0, 2);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(dr[i].dot(p[i])) < 1e-12 * dr[i].norm() * p[i].norm() + 1e-300);
}

TEST_CASE("J and S superoperators: adiabatic limits") {
    std::mt19937_64 rng(28);
    for (int k = 0; k < 100; ++k) {
        const int n = 2 + k % 2;
        const std::size_t ns = 1 + k % 2;
        const QuantumModelSpec spec = random_model(rng, n, ns);
        const BathSpec bath = random_bath(rng, ns);
        const auto in = SuperoperatorInputs::evaluate(spec, bath, random_gapped_configuration(rng, spec));
        const CouplingTensor diag = in.couplings.diagonal_part();
        const auto phases = GeometricPhaseRates::from_diagonal(diag);
        const JSuperoperator j = j_superoperator(in.config, in.bath_grad, in.frame, diag);
        const SSuperoperator s = s_superoperator(in.config, in.frame, in.energy_grads, diag);
        const CMatrix jad = j_adiabatic(in.config, in.bath_grad, phases);
        const CMatrix sad = s_adiabatic(in.config, in.energy_grads, phases);
        CHECK(j.max_abs_coefficient() == 0.0);
        for (int a = 0; a < n; ++a) {
            CHECK(jad(a, a) == 0.0);
            CHECK(sad(a, a) == 0.0);
            for (int ap = 0; ap < n; ++ap) {
                CHECK(jad(a, ap).real() == 0.0);
                for (int b = 0; b < n; ++b)
                    for (int bp = 0; bp < n; ++bp) {
                        const bool same = (a == b && ap == bp);
                        CHECK(std::abs(j.scalar(a, ap, b, bp) - (same ? jad(a, ap) : 0.0)) <= 1e-13);
                        CHECK(std::abs(s(a, ap, b, bp) - (same ? sad(a, ap) : 0.0)) <= 1e-13);
                    }
            }
        }
    }
}

TEST_CASE("J and S superoperators: decoupled, linear, real-basis cases") {
    std::mt19937_64 rng(29);
    const BathSpec bath = random_bath(rng, 1);
    const QuantumModelSpec decoupled = qubit_isotropic(1.0, 0.0, 1);
    const auto in0 = SuperoperatorInputs::evaluate(decoupled, bath, random_configuration(rng, 1));
    CHECK(in0.couplings.max_abs() == 0.0);
    const SSuperoperator s0 = s_superoperator(in0.config, in0.frame, in0.energy_grads, in0.couplings);
    const JSuperoperator j0 = j_superoperator(in0.config, in0.bath_grad, in0.frame, in0.couplings);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    CHECK(s0(a, b, c, d) == 0.0);
                    CHECK(j0.scalar(a, b, c, d) == 0.0);
                }

    // J is linear in d at fixed frame and bath gradient.
    const QuantumModelSpec spec = random_model(rng, 2, 1);
    const auto in = SuperoperatorInputs::evaluate(spec, bath, random_gapped_configuration(rng, spec));
    const JSuperoperator j1 = j_superoperator(in.config, in.bath_grad, in.frame, in.couplings);
    const JSuperoperator j2 = j_superoperator(in.config, in.bath_grad, in.frame, 2.0 * in.couplings);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    CHECK(std::abs(j2.scalar(a, b, c, d) - 2.0 * j1.scalar(a, b, c, d)) < 1e-14);
                    CHECK((j2.coefficient(a, b, c, d, 0) - 2.0 * j1.coefficient(a, b, c, d, 0)).norm() < 1e-14);
                }

    // apply() = scalar f + coefficient . grad f
    const std::vector<CVec3> grad_f{CVec3(Complex(0.3, 0.1), Complex(-0.2, 0.0), Complex(0.0, 0.5))};
    const Complex f(0.7, -0.2);
    const Complex manual = j1.scalar(1, 0, 0, 1) * f + (j1.coefficient(1, 0, 0, 1, 0).array() * grad_f[0].array()).sum();
    CHECK(std::abs(j1.apply(1, 0, 0, 1, f, grad_f) - manual) < 1e-15);

    // Real basis: no geometric phase, so both adiabatic forms vanish; S on
    // population-to-population elements cancels.
    const QuantumModelSpec deph = qubit_dephasing(0.5, 0.8, 1);
    const auto inr = SuperoperatorInputs::evaluate(deph, bath, random_configuration(rng, 1));
    const auto phr = GeometricPhaseRates::from_diagonal(inr.couplings.diagonal_part());
    CHECK(j_adiabatic(inr.config, inr.bath_grad, phr).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s_adiabatic(inr.config, inr.energy_grads, phr).cwiseAbs().maxCoeff() == 0.0);
    const SSuperoperator sr = s_superoperator(inr.config, inr.frame, inr.energy_grads, inr.couplings);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(std::abs(sr(a, a, b, b)) < 1e-14);
}

TEST_CASE("coupling tensor arithmetic") {
    CouplingTensor t(2, 3);
    t.at(1, 2)(0, 1) = Complex(1, 2);
    t.at(1, 2)(2, 2) = Complex(0, 3);
    CHECK(t.off_diagonal_part().max_abs() == doctest::Approx(std::sqrt(5.0)));
    CHECK(t.diagonal_part().max_abs() == doctest::Approx(3.0));
    CHECK((t + t).max_abs() == doctest::Approx(6.0));
    CHECK(t.vector(1, 0, 1) == CVec3(0, 0, Complex(1, 2)));
    CHECK_THROWS_AS(t += CouplingTensor(1, 3), DimensionError);
}
