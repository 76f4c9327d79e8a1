#include <doctest.h>

#include "spinbath/checks.hpp"
#include "spinbath/spin_bath.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace spinbath;

namespace {

SpinConfiguration one(const Vec3& s) { return SpinConfiguration({s}); }

double max_diff(const SpinConfiguration& a, const SpinConfiguration& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return m;
}

// S_dot = S x b for H = -b.S; closed form for b along z.
Vec3 larmor(const Vec3& s0, double bz, double t) {
    const double c = std::cos(bz * t), s = std::sin(bz * t);
    return Vec3(s0.x() * c + s0.y() * s, s0.y() * c - s0.x() * s, s0.z());
}

}  // namespace

TEST_CASE("b_matrix matches the bracket matrix by substitution") {
    Matrix3 expect;
    expect << 0, 3, -2, -3, 0, 1, 2, -1, 0;
    CHECK(b_matrix(Vec3(1, 2, 3)) == expect);
    CHECK(b_matrix(Vec3::Zero()) == Matrix3::Zero());
    Matrix3 z;
    z << 0, 1, 0, -1, 0, 0, 0, 0, 0;
    CHECK(b_matrix(Vec3(0, 0, 1)) == z);
}

TEST_CASE("b_matrix is antisymmetric with s in its null space") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 200; ++k) {
        const Vec3 s = random_configuration(rng, 1, uniform_real(rng, 0.1, 5.0))[0];
        const Matrix3 m = b_matrix(s);
        CHECK((m + m.transpose()).isZero(0.0));
        CHECK((m * s).isZero(0.0));
    }
}

TEST_CASE("spin_bracket: {Sx, Sy} = Sz and antisymmetry") {
    const SpinConfiguration c = one(Vec3(1, 2, 3));
    const std::vector<Vec3> ex{Vec3::UnitX()}, ey{Vec3::UnitY()};
    CHECK(spin_bracket(ex, ey, c) == doctest::Approx(3.0));
    CHECK(spin_bracket(ex, ex, c) == 0.0);

    std::mt19937_64 rng(2);
    const BathSpec bath = random_bath(rng, 3);
    const SpinConfiguration c3 = random_configuration(rng, 3);
    const SpinField gh = bath_gradient(c3, bath);
    SpinField gc(3);
    for (int i = 0; i < 3; ++i) gc[i] = 2.0 * c3[i];  // grad of S.S
    CHECK(std::abs(spin_bracket(gh, gc, c3)) < 1e-14);
    CHECK(spin_bracket(gh, gc, c3) == doctest::Approx(-spin_bracket(gc, gh, c3)));
    CHECK_THROWS_AS(spin_bracket(ex, gc, c3), DimensionError);
}

TEST_CASE("bath_energy examples") {
    CHECK(bath_energy(one(Vec3(0, 0, 1)), BathSpec::zeeman(Vec3(0, 0, 1), 1)) == -1.0);
    BathSpec pair = BathSpec::zeeman(Vec3::Zero(), 2);
    pair.exchange(0, 1) = pair.exchange(1, 0) = 1.0;
    CHECK(bath_energy(SpinConfiguration({Vec3(0, 0, 1), Vec3(0, 0, 1)}), pair) == -1.0);
    CHECK(bath_energy(one(Vec3(1, 0, 0)), BathSpec::zeeman(Vec3(0, 0, 1), 1)) == 0.0);
}

TEST_CASE("bath_gradient examples and finite-difference oracle") {
    const SpinField g = bath_gradient(one(Vec3(0.3, -0.2, 0.9)), BathSpec::zeeman(Vec3(0, 0, 1), 1));
    CHECK(g[0] == Vec3(0, 0, -1));
    BathSpec pair = BathSpec::zeeman(Vec3::Zero(), 2);
    pair.exchange(0, 1) = pair.exchange(1, 0) = 2.0;
    CHECK(bath_gradient(SpinConfiguration({Vec3(0, 0, 1), Vec3(1, 0, 0)}), pair)[0] == Vec3(-2, 0, 0));

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const BathSpec bath = random_bath(rng, 4);
        SpinConfiguration c = random_configuration(rng, 4);
        const SpinField an = bath_gradient(c, bath);
        const double h = 1e-6;
        for (std::size_t i = 0; i < 4; ++i)
            for (int axis = 0; axis < 3; ++axis) {
                const double x0 = c[i][axis];
                c.spins()[i][axis] = x0 + h;
                const double ep = bath_energy(c, bath);
                c.spins()[i][axis] = x0 - h;
                const double em = bath_energy(c, bath);
                c.spins()[i][axis] = x0;
                const double fd = (ep - em) / (2 * h);
                CHECK(std::abs(fd - an[i][axis]) <= 1e-8 * std::max(1.0, std::abs(an[i][axis])));
            }
    }
}

TEST_CASE("bath spec validation") {
    BathSpec b = BathSpec::zeeman(Vec3(0, 0, 1), 2);
    b.exchange(0, 1) = 1.0;  // not symmetric
    CHECK_THROWS_AS(b.validate(2), DimensionError);
    b.exchange(1, 0) = 1.0;
    CHECK_NOTHROW(b.validate(2));
    b.exchange(0, 0) = 0.5;
    CHECK_THROWS_AS(b.validate(2), DimensionError);
    CHECK_THROWS_AS(SpinConfiguration(std::vector<Vec3>{}), Error);
    CHECK_THROWS_AS(one(Vec3(NAN, 0, 0)), Error);
}

TEST_CASE("spin_time_derivative examples and orthogonality") {
    const SpinField grad{Vec3(0, 0, 1)};
    CHECK(spin_time_derivative(one(Vec3(1, 0, 0)), grad)[0].isApprox(Vec3(0, 1, 0)));
    CHECK(spin_time_derivative(one(Vec3(0, 0, 1)), grad)[0].isZero(0.0));
    CHECK(spin_time_derivative(one(Vec3(0, 0, 2)), grad)[0].isZero(0.0));

    std::mt19937_64 rng(4);
    for (int k = 0; k < 100; ++k) {
        const SpinConfiguration c = random_configuration(rng, 3, 1.7);
        const BathSpec bath = random_bath(rng, 3);
        const SpinField g = bath_gradient(c, bath);
        const SpinField d = spin_time_derivative(c, g);
        for (int i = 0; i < 3; ++i) {
            // independent oracle: B(S) g = g x S
            CHECK((d[i] - g[i].cross(c[i])).norm() < 1e-14);
            CHECK(std::abs(d[i].dot(c[i])) <= 1e-12 * d[i].norm() * c[i].norm() + 1e-300);
        }
    }
}

TEST_CASE("precession_step reproduces Larmor precession") {
    const BathSpec bath = BathSpec::zeeman(Vec3(0, 0, 1.3), 1);
    const auto field = bath_gradient_fn(bath);
    const double period = 2.0 * std::numbers::pi / 1.3;
    const int steps = 1000;
    SpinConfiguration c = one(Vec3(1, 0, 0));
    for (int k = 0; k < steps; ++k) c = precession_step(c, field, period / steps);
    CHECK((c[0] - Vec3(1, 0, 0)).norm() < 1e-10);

    SpinConfiguration d = one(Vec3(0.6, 0.0, 0.8));
    for (int k = 0; k < 77; ++k) d = precession_step(d, field, 0.01);
    CHECK((d[0] - larmor(Vec3(0.6, 0, 0.8), 1.3, 0.77)).norm() < 1e-12);
}

TEST_CASE("precession_step: tiny dt leaves the configuration unchanged, dt <= 0 rejected") {
    std::mt19937_64 rng(5);
    const BathSpec bath = random_bath(rng, 3);
    const SpinConfiguration c = random_configuration(rng, 3);
    CHECK(max_diff(precession_step(c, bath_gradient_fn(bath), 1e-300), c) == 0.0);
    CHECK_THROWS_AS(precession_step(c, bath_gradient_fn(bath), 0.0), Error);
    CHECK_THROWS_AS(precession_step(c, bath_gradient_fn(bath), -1e-3), Error);
}

TEST_CASE("precession_step conserves norms per step and energy over 1e4 steps") {
    std::mt19937_64 rng(6);
    const BathSpec bath = random_bath(rng, 4);
    SpinConfiguration c = random_configuration(rng, 4);
    const double e0 = bath_energy(c, bath);
    const auto field = bath_gradient_fn(bath);
    double worst_step = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const SpinConfiguration prev = c;
        c = precession_step(c, field, 0.01);
        for (std::size_t i = 0; i < 4; ++i) worst_step = std::max(worst_step, std::abs(c[i].norm() - prev[i].norm()));
    }
    CHECK(worst_step < 1e-14);
    CHECK(c.casimir_drift() < 1e-12);
    CHECK(std::abs(bath_energy(c, bath) - e0) < 1e-8);
}

TEST_CASE("precession_step: no systematic Casimir drift over 1e5 steps") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const Vec3 b = random_configuration(rng, 1, uniform_real(rng, 0.2, 3.0))[0];
        const auto field = bath_gradient_fn(BathSpec::zeeman(b, 1));
        SpinConfiguration c = random_configuration(rng, 1, uniform_real(rng, 0.5, 2.0));
        const double c0 = c[0].squaredNorm();
        double worst = 0.0;
        for (int k = 0; k < 100000; ++k) {
            c = precession_step(c, field, 0.01 / b.norm());
            worst = std::max(worst, std::abs(c[0].squaredNorm() - c0));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("rk4_step: Larmor accuracy, fourth order, energy and Casimir") {
    const BathSpec bath = BathSpec::zeeman(Vec3(0, 0, 1.0), 1);
    const auto grad = bath_gradient_fn(bath);
    const double period = 2.0 * std::numbers::pi;
    const Vec3 s0(0.6, 0.0, 0.8);
    auto run = [&](int steps) {
        SpinConfiguration c = one(s0);
        for (int k = 0; k < steps; ++k) c = rk4_step(c, grad, period / steps);
        return (c[0] - larmor(s0, 1.0, period)).norm();
    };
    CHECK(run(1000) < 1e-9);
    // Coarse enough that rounding does not mask the truncation error.
    const double ratio = run(50) / run(100);
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.2));

    const SpinConfiguration still = one(Vec3(0.1, 0.2, 0.3));
    const GradientFn zero = [](const SpinConfiguration& c) { return SpinField(c.size(), Vec3::Zero()); };
    CHECK(max_diff(rk4_step(still, zero, 0.1), still) == 0.0);
    CHECK_THROWS_AS(rk4_step(still, zero, 0.0), Error);

    std::mt19937_64 rng(7);
    const BathSpec b3 = random_bath(rng, 3);
    SpinConfiguration c = random_configuration(rng, 3);
    const double e0 = bath_energy(c, b3);
    for (int k = 0; k < 10000; ++k) c = rk4_step(c, bath_gradient_fn(b3), 0.005);
    CHECK(std::abs(bath_energy(c, b3) - e0) < 1e-8);
    CHECK(c.casimir_drift() < 1e-6);
}

TEST_CASE("compressibility vanishes for bath flows") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 50; ++k) {
        const BathSpec bath = random_bath(rng, 3);
        const SpinConfiguration c = random_configuration(rng, 3);
        CHECK(std::abs(compressibility(c, bath_gradient_fn(bath))) < 1e-7);
    }
    const SpinConfiguration c = random_configuration(rng, 2);
    CHECK(compressibility(c, bath_gradient_fn(BathSpec::zeeman(Vec3::Zero(), 2))) == 0.0);
}

TEST_CASE("rodrigues_rotate") {
    CHECK(rodrigues_rotate(Vec3(1, 0, 0), Vec3(0, 0, 2), std::numbers::pi / 2).isApprox(Vec3(0, 1, 0)));
    CHECK(rodrigues_rotate(Vec3(1, 2, 3), Vec3::Zero(), 1.0) == Vec3(1, 2, 3));
}
