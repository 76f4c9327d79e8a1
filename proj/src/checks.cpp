#include "spinbath/checks.hpp"

#include "spinbath/berry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spinbath {

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

HermitianOperator random_hermitian(std::mt19937_64& rng, int n, bool complex_entries) {
    CMatrix m(n, n);
    for (int a = 0; a < n; ++a) {
        m(a, a) = uniform_real(rng, -1.0, 1.0);
        for (int b = a + 1; b < n; ++b) {
            const double re = uniform_real(rng, -1.0, 1.0);
            const double im = complex_entries ? uniform_real(rng, -1.0, 1.0) : 0.0;
            m(a, b) = Complex(re, im);
            m(b, a) = Complex(re, -im);
        }
    }
    return HermitianOperator(m);
}

SpinConfiguration random_configuration(std::mt19937_64& rng, std::size_t n_spins, double radius) {
    std::vector<Vec3> spins(n_spins);
    for (auto& s : spins) {
        const double z = uniform_real(rng, -1.0, 1.0);
        const double phi = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
        const double r = std::sqrt(1.0 - z * z);
        s = radius * Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
    return SpinConfiguration(std::move(spins));
}

QuantumModelSpec random_model(std::mt19937_64& rng, int n_levels, std::size_t n_spins, bool complex_entries) {
    QuantumModelSpec spec;
    spec.h_sub = random_hermitian(rng, n_levels, complex_entries);
    spec.couplings.resize(n_spins);
    for (auto& c : spec.couplings) {
        c.gamma = uniform_real(rng, 0.3, 1.0);
        for (auto& op : c.axis_ops) op = random_hermitian(rng, n_levels, complex_entries);
    }
    return spec;
}

BathSpec random_bath(std::mt19937_64& rng, std::size_t n_spins) {
    BathSpec bath = BathSpec::zeeman(Vec3(uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), uniform_real(rng, -1, 1)),
                                     n_spins);
    for (std::size_t i = 0; i < n_spins; ++i)
        for (std::size_t j = i + 1; j < n_spins; ++j) bath.exchange(i, j) = bath.exchange(j, i) = uniform_real(rng, -1, 1);
    return bath;
}

SpinConfiguration random_gapped_configuration(std::mt19937_64& rng, const QuantumModelSpec& spec, double min_gap) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        SpinConfiguration c = random_configuration(rng, spec.n_spins());
        if (eigendecompose(h_of_s(spec, c)).min_gap() >= min_gap) return c;
    }
    throw Error("could not find a gapped configuration for the model");
}

namespace {

CheckResult make(std::string name, double residual, double tolerance) {
    return {std::move(name), residual, tolerance, residual < tolerance};
}

CheckResult casimir_precession(std::mt19937_64& rng) {
    const BathSpec bath = BathSpec::zeeman(Vec3(uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), 1.0), 1);
    SpinConfiguration c = random_configuration(rng, 1);
    const auto field = bath_gradient_fn(bath);
    const double dt = 0.01 / bath.field.norm();
    double worst = 0.0;
    for (int k = 0; k < 100000; ++k) {
        c = precession_step(c, field, dt);
        worst = std::max(worst, c.casimir_drift());
    }
    return make("casimir_precession", worst, 1e-12);
}

CheckResult energy_precession(std::mt19937_64& rng) {
    const BathSpec bath = random_bath(rng, 3);
    SpinConfiguration c = random_configuration(rng, 3);
    const auto field = bath_gradient_fn(bath);
    const double e0 = bath_energy(c, bath);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        c = precession_step(c, field, 0.01);
        worst = std::max(worst, std::abs(bath_energy(c, bath) - e0));
    }
    return make("energy_precession", worst, 1e-8);
}

CheckResult bracket_antisymmetry(std::mt19937_64& rng, std::size_t points) {
    double worst = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        const SpinConfiguration c = random_configuration(rng, 3, uniform_real(rng, 0.5, 2.0));
        SpinField a(3), b(3);
        for (int i = 0; i < 3; ++i) {
            a[i] = random_configuration(rng, 1)[0] * uniform_real(rng, 0.1, 3.0);
            b[i] = random_configuration(rng, 1)[0] * uniform_real(rng, 0.1, 3.0);
        }
        worst = std::max(worst, std::abs(spin_bracket(a, b, c) + spin_bracket(b, a, c)));
    }
    return make("bracket_antisymmetry", worst, 1e-12);
}

CheckResult null_space(std::mt19937_64& rng, std::size_t points) {
    double worst = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        const Vec3 s = random_configuration(rng, 1, uniform_real(rng, 0.1, 10.0))[0];
        worst = std::max(worst, (b_matrix(s) * s).cwiseAbs().maxCoeff());
    }
    return make("b_matrix_null_space", worst, 1e-300);
}

CheckResult compressibility_check(std::mt19937_64& rng, std::size_t points) {
    double worst = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        const std::size_t ns = 1 + p % 3;
        const BathSpec bath = random_bath(rng, ns);
        const SpinConfiguration c = random_configuration(rng, ns);
        worst = std::max(worst, std::abs(compressibility(c, bath_gradient_fn(bath))));
        const QuantumModelSpec model = random_model(rng, 2 + static_cast<int>(p % 2), ns);
        const SpinConfiguration g = random_gapped_configuration(rng, model);
        const int a = static_cast<int>(p % 2);
        const GradientFn surface = [&](const SpinConfiguration& x) {
            return average_surface_gradient(model, bath, x, a, 1);
        };
        worst = std::max(worst, std::abs(compressibility(g, surface)));
    }
    return make("zero_compressibility", worst, 1e-6);
}

CheckResult hellmann_feynman(std::mt19937_64& rng, std::size_t points, bool perturb) {
    double worst = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        const int n = 2 + static_cast<int>(p % 2);
        const QuantumModelSpec model = random_model(rng, n, 1 + p % 2);
        const SpinConfiguration c = random_gapped_configuration(rng, model);
        CouplingTensor hf = coupling_offdiagonal(eigendecompose(h_of_s(model, c)), model);
        if (perturb) hf *= 1.0 + 1e-3;
        const CouplingTensor fd = coupling_finite_difference(model, c);
        const double floor = 1e-2 * fd.off_diagonal_part().max_abs();
        for (std::size_t i = 0; i < c.size(); ++i)
            for (int axis = 0; axis < 3; ++axis)
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        if (a == b) continue;
                        const double ref = std::max(std::abs(fd(i, axis, a, b)), floor);
                        worst = std::max(worst, std::abs(hf(i, axis, a, b) - fd(i, axis, a, b)) / ref);
                    }
    }
    return make("hellmann_feynman_couplings", worst, 1e-6);
}

CheckResult diagonal_imaginary(std::mt19937_64& rng, std::size_t points) {
    double worst = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        const QuantumModelSpec model = random_model(rng, 2 + static_cast<int>(p % 2), 1 + p % 2);
        const SpinConfiguration c = random_gapped_configuration(rng, model);
        worst = std::max(worst, coupling_diagonal(model, c).max_residual());
    }
    return make("diagonal_couplings_imaginary", worst, 1e-10);
}

std::pair<CheckResult, CheckResult> limit_equivalence(std::mt19937_64& rng, std::size_t points) {
    double worst_j = 0.0;
    double worst_s = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        const int n = 2 + static_cast<int>(p % 2);
        const std::size_t ns = 1 + p % 2;
        const QuantumModelSpec model = random_model(rng, n, ns);
        const BathSpec bath = random_bath(rng, ns);
        const auto in = SuperoperatorInputs::evaluate(model, bath, random_gapped_configuration(rng, model));
        const CouplingTensor diag = in.couplings.diagonal_part();
        const auto phases = GeometricPhaseRates::from_diagonal(diag);
        const JSuperoperator j = j_superoperator(in.config, in.bath_grad, in.frame, diag);
        const SSuperoperator s = s_superoperator(in.config, in.frame, in.energy_grads, diag);
        const CMatrix jad = j_adiabatic(in.config, in.bath_grad, phases);
        const CMatrix sad = s_adiabatic(in.config, in.energy_grads, phases);
        worst_j = std::max(worst_j, j.max_abs_coefficient());
        for (int a = 0; a < n; ++a)
            for (int ap = 0; ap < n; ++ap)
                for (int b = 0; b < n; ++b)
                    for (int bp = 0; bp < n; ++bp) {
                        const bool same = (a == b && ap == bp);
                        worst_j = std::max(worst_j, std::abs(j.scalar(a, ap, b, bp) - (same ? jad(a, ap) : 0.0)));
                        worst_s = std::max(worst_s, std::abs(s(a, ap, b, bp) - (same ? sad(a, ap) : 0.0)));
                    }
    }
    return {make("adiabatic_limit_J", worst_j, 1e-13), make("adiabatic_limit_S", worst_s, 1e-13)};
}

// chi_a(S) = sum_k c_ak S_k with S flattened.
GaugeTwist linear_twist(const Eigen::MatrixXd& coeff) {
    return [coeff](const SpinConfiguration& c) {
        const Eigen::VectorXd chi = coeff * c.flatten();
        RVector out(chi.size());
        for (Eigen::Index a = 0; a < chi.size(); ++a) out(a) = chi(a);
        return out;
    };
}

std::pair<CheckResult, CheckResult> gauge_covariance(std::mt19937_64& rng, std::size_t points) {
    double worst_off = 0.0;
    double worst_diag = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        const int n = 2 + static_cast<int>(p % 2);
        const std::size_t ns = 1 + p % 2;
        const QuantumModelSpec model = random_model(rng, n, ns);
        const SpinConfiguration c = random_gapped_configuration(rng, model);
        Eigen::MatrixXd coeff(n, 3 * ns);
        for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff.data()[k] = uniform_real(rng, -2.0, 2.0);
        const CouplingTensor plain = coupling_finite_difference(model, c);
        const CouplingTensor twisted = coupling_finite_difference(model, c, kDiagonalStep, linear_twist(coeff));
        for (std::size_t i = 0; i < ns; ++i)
            for (int axis = 0; axis < 3; ++axis)
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        if (a == b) {
                            const Complex shift(0.0, coeff(a, 3 * i + axis));
                            worst_diag = std::max(
                                worst_diag, std::abs(twisted(i, axis, a, a) - plain(i, axis, a, a) - shift));
                        } else {
                            worst_off = std::max(worst_off,
                                                 std::abs(std::abs(twisted(i, axis, a, b)) - std::abs(plain(i, axis, a, b))));
                        }
                    }
    }
    return {make("gauge_covariance_offdiagonal", worst_off, 1e-6),
            make("gauge_covariance_diagonal", worst_diag, 1e-6)};
}

// Loop integral of (phi_1 - phi_0).dS around a cone about z, by periodic trapezoid.
double loop_phase(const QuantumModelSpec& model, double theta, std::size_t m, const GaugeTwist& twist) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
        const SpinConfiguration c({Vec3(std::sin(theta) * std::cos(t), std::sin(theta) * std::sin(t), std::cos(theta))});
        const Vec3 tangent(-std::sin(theta) * std::sin(t), std::sin(theta) * std::cos(t), 0.0);
        const auto phi = coupling_diagonal(model, c, kDiagonalStep, twist);
        sum += (phi.vector(0, 1) - phi.vector(0, 0)).dot(tangent);
    }
    return sum * 2.0 * std::numbers::pi / static_cast<double>(m);
}

CheckResult closed_loop_invariance(std::mt19937_64& rng) {
    double worst = 0.0;
    for (int p = 0; p < 4; ++p) {
        const QuantumModelSpec model = random_model(rng, 2, 1);
        Eigen::MatrixXd coeff(2, 3);
        for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff.data()[k] = uniform_real(rng, -2.0, 2.0);
        const double theta = uniform_real(rng, 0.3, 1.2);
        try {
            const double plain = loop_phase(model, theta, 256, {});
            const double twisted = loop_phase(model, theta, 256, linear_twist(coeff));
            worst = std::max(worst, std::abs(plain - twisted));
        } catch (const DegeneracyError&) {
            --p;
        }
    }
    return make("closed_loop_gauge_invariance", worst, 1e-6);
}

CheckResult berry_cone() {
    const ConeLoopResult r = run_cone_loop(std::numbers::pi / 3.0, 10000, 1);
    return make("berry_phase_cone_loop", r.error, 1e-3);
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(const CheckOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::vector<CheckResult> out;
    out.push_back(casimir_precession(rng));
    out.push_back(energy_precession(rng));
    out.push_back(bracket_antisymmetry(rng, options.points));
    out.push_back(null_space(rng, options.points));
    out.push_back(compressibility_check(rng, options.points));
    out.push_back(hellmann_feynman(rng, options.points, options.perturb_couplings));
    out.push_back(diagonal_imaginary(rng, options.points));
    auto [j, s] = limit_equivalence(rng, options.points);
    out.push_back(j);
    out.push_back(s);
    auto [off, diag] = gauge_covariance(rng, options.points);
    out.push_back(off);
    out.push_back(diag);
    out.push_back(closed_loop_invariance(rng));
    out.push_back(berry_cone());
    return out;
}

}  // namespace spinbath
