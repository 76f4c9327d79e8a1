#include "spinbath/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace spinbath {

double AdiabaticFrame::min_gap() const {
    double gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a + 1 < dim(); ++a) gap = std::min(gap, energies(a + 1) - energies(a));
    return gap;
}

namespace {

void eigen_2x2(const CMatrix& h, RVector& energies, CMatrix& states) {
    const double a = h(0, 0).real();
    const double d = h(1, 1).real();
    const Complex c = h(0, 1);
    const double mean = 0.5 * (a + d);
    const double half = 0.5 * (a - d);
    const double r = std::hypot(half, std::abs(c));
    energies.resize(2);
    states.resize(2, 2);
    energies << mean - r, mean + r;
    if (r == 0.0) {
        states.setIdentity();
        return;
    }
    // Pick the row of (h - E) that gives the better-conditioned null vector.
    CVector lower(2), upper(2);
    if (half >= 0.0) {
        lower << c, Complex(-r - half);
        upper << Complex(r + half), std::conj(c);
    } else {
        lower << Complex(-r + half), std::conj(c);
        upper << c, Complex(r - half);
    }
    states.col(0) = lower / lower.norm();
    states.col(1) = upper / upper.norm();
}

// Cyclic complex Jacobi: each rotation U = diag(1, e^{-i phi}) R(c, s) zeroes one
// off-diagonal pair. On return a is diagonal and h = v a v^dagger.
void jacobi(CMatrix& a, CMatrix& v) {
    const int n = static_cast<int>(a.rows());
    v.setIdentity(n, n);
    const double scale = a.norm();
    if (scale == 0.0) return;
    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                if (p != q) off += std::norm(a(p, q));
        if (std::sqrt(off) <= kJacobiThreshold * scale) {
            for (int p = 0; p < n; ++p) a(p, p) = a(p, p).real();
            return;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double r = std::abs(a(p, q));
                if (r == 0.0) continue;
                const Complex phase = a(p, q) / r;
                const Complex cphase = std::conj(phase);
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * r);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = c * akp - s * cphase * akq;
                    a(k, q) = s * akp + c * cphase * akq;
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = c * vkp - s * cphase * vkq;
                    v(k, q) = s * vkp + c * cphase * vkq;
                }
                for (int k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = c * apk - s * phase * aqk;
                    a(q, k) = s * apk + c * phase * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }
    throw ConvergenceError("Jacobi eigensolver did not converge in " + std::to_string(kJacobiMaxSweeps) + " sweeps");
}

void fix_largest_component_gauge(CMatrix& states) {
    for (int a = 0; a < states.cols(); ++a) {
        int k = 0;
        double best = -1.0;
        for (int r = 0; r < states.rows(); ++r) {
            const double m = std::norm(states(r, a));
            if (m > best) {
                best = m;
                k = r;
            }
        }
        if (best > 0.0) {
            states.col(a) *= std::conj(states(k, a)) / std::sqrt(best);
            states(k, a) = states(k, a).real();
        }
    }
}

void fill_bohr(AdiabaticFrame& f) {
    const int n = f.dim();
    f.bohr.resize(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) f.bohr(a, b) = f.energies(a) - f.energies(b);
}

}  // namespace

void eigendecompose_into(const CMatrix& h, AdiabaticFrame& out) {
    const int n = static_cast<int>(h.rows());
    if (h.cols() != n || n < 1) throw DimensionError("eigendecompose: matrix must be square");
    if (!h.allFinite()) throw Error("eigendecompose: non-finite matrix entries");
    if (n == 2) {
        eigen_2x2(h, out.energies, out.states);
    } else {
        CMatrix a = h;
        CMatrix v;
        jacobi(a, v);
        std::array<int, kMaxLevels> order{};
        std::iota(order.begin(), order.begin() + n, 0);
        std::stable_sort(order.begin(), order.begin() + n,
                         [&a](int x, int y) { return a(x, x).real() < a(y, y).real(); });
        out.energies.resize(n);
        out.states.resize(n, n);
        for (int k = 0; k < n; ++k) {
            out.energies(k) = a(order[k], order[k]).real();
            out.states.col(k) = v.col(order[k]);
        }
    }
    fix_largest_component_gauge(out.states);
    fill_bohr(out);
}

AdiabaticFrame eigendecompose(const CMatrix& h) {
    AdiabaticFrame f;
    eigendecompose_into(h, f);
    return f;
}

AdiabaticFrame eigendecompose(const HermitianOperator& h) { return eigendecompose(h.matrix()); }

void require_nondegenerate(const AdiabaticFrame& frame, double gap_tol) {
    const double gap = frame.min_gap();
    if (gap < gap_tol)
        throw DegeneracyError("adiabatic levels are degenerate (gap " + std::to_string(gap) + " below " +
                                  std::to_string(gap_tol) + ")",
                              gap);
}

AdiabaticFrame gauge_align(const AdiabaticFrame& frame, const AdiabaticFrame& reference, double gap_tol) {
    if (frame.dim() != reference.dim()) throw DimensionError("gauge_align: frames have different dimensions");
    require_nondegenerate(frame, gap_tol);
    require_nondegenerate(reference, gap_tol);
    AdiabaticFrame out = frame;
    for (int a = 0; a < out.dim(); ++a) {
        const Complex overlap = reference.state(a).dot(out.state(a));
        const double m = std::abs(overlap);
        if (m < 1e-6) throw DegeneracyError("gauge_align: level " + std::to_string(a) + " lost overlap with reference", m);
        out.states.col(a) *= std::conj(overlap) / m;
    }
    return out;
}

GaugeAnchor GaugeAnchor::of(const AdiabaticFrame& frame) {
    GaugeAnchor g;
    g.dim = frame.dim();
    for (int a = 0; a < g.dim; ++a) {
        int k = 0;
        double best = -1.0;
        for (int r = 0; r < g.dim; ++r) {
            const double m = std::abs(frame.states(r, a));
            if (m > best) {
                best = m;
                k = r;
            }
        }
        g.index[a] = k;
        g.phase[a] = std::arg(frame.states(k, a));
    }
    return g;
}

double GaugeAnchor::min_weight(const AdiabaticFrame& frame) const {
    double w = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim; ++a) w = std::min(w, std::abs(frame.states(index[a], a)));
    return w;
}

void apply_anchor(AdiabaticFrame& frame, const GaugeAnchor& anchor) {
    if (anchor.dim != frame.dim()) throw DimensionError("apply_anchor: dimension mismatch");
    for (int a = 0; a < frame.dim(); ++a) {
        const Complex v = frame.states(anchor.index[a], a);
        const double m = std::abs(v);
        if (m == 0.0) throw DegeneracyError("apply_anchor: anchored component vanished", 0.0);
        frame.states.col(a) *= std::polar(1.0, anchor.phase[a]) * std::conj(v) / m;
    }
}

CouplingTensor::CouplingTensor(std::size_t n_spins, int dim)
    : n_spins_(n_spins), dim_(dim), d_(3 * n_spins, CMatrix::Zero(dim, dim)) {}

CVec3 CouplingTensor::vector(std::size_t spin, int a, int b) const {
    return CVec3(d_[3 * spin](a, b), d_[3 * spin + 1](a, b), d_[3 * spin + 2](a, b));
}

CouplingTensor CouplingTensor::off_diagonal_part() const {
    CouplingTensor out = *this;
    for (auto& m : out.d_) m.diagonal().setZero();
    return out;
}

CouplingTensor CouplingTensor::diagonal_part() const {
    CouplingTensor out = *this;
    for (auto& m : out.d_) {
        const CVector diag = m.diagonal();
        m.setZero();
        m.diagonal() = diag;
    }
    return out;
}

CouplingTensor& CouplingTensor::operator+=(const CouplingTensor& other) {
    if (other.n_spins_ != n_spins_ || other.dim_ != dim_) throw DimensionError("coupling tensor shapes differ");
    for (std::size_t k = 0; k < d_.size(); ++k) d_[k] += other.d_[k];
    return *this;
}

CouplingTensor& CouplingTensor::operator*=(double s) {
    for (auto& m : d_) m *= s;
    return *this;
}

double CouplingTensor::max_abs() const {
    double m = 0.0;
    for (const auto& x : d_) m = std::max(m, x.cwiseAbs().maxCoeff());
    return m;
}

CouplingTensor operator+(CouplingTensor a, const CouplingTensor& b) { return a += b; }

CouplingTensor operator*(double s, CouplingTensor t) { return t *= s; }

GeometricPhaseRates::GeometricPhaseRates(std::size_t n_spins, int dim)
    : n_spins_(n_spins), dim_(dim), phi_(3 * n_spins, RVector::Zero(dim)) {}

GeometricPhaseRates GeometricPhaseRates::from_diagonal(const CouplingTensor& d) {
    GeometricPhaseRates out(d.n_spins(), d.dim());
    for (std::size_t i = 0; i < d.n_spins(); ++i)
        for (int axis = 0; axis < 3; ++axis)
            for (int a = 0; a < d.dim(); ++a) {
                const Complex daa = d(i, axis, a, a);
                out.at(i, axis, a) = daa.imag();
                out.residual_ = std::max(out.residual_, std::abs(daa.real()));
            }
    return out;
}

Vec3 GeometricPhaseRates::vector(std::size_t spin, int a) const {
    return Vec3(phi_[3 * spin](a), phi_[3 * spin + 1](a), phi_[3 * spin + 2](a));
}

CouplingTensor coupling_offdiagonal(const AdiabaticFrame& frame, const QuantumModelSpec& spec, double gap_tol) {
    require_nondegenerate(frame, gap_tol);
    const int n = frame.dim();
    if (n != spec.dim()) throw DimensionError("coupling_offdiagonal: frame and model dimensions differ");
    CouplingTensor d(spec.n_spins(), n);
    for (std::size_t i = 0; i < spec.n_spins(); ++i) {
        const auto& c = spec.couplings[i];
        if (c.gamma == 0.0) continue;
        for (int axis = 0; axis < 3; ++axis) {
            const CMatrix w = c.gamma * (frame.states.adjoint() * c.axis_ops[axis].matrix() * frame.states);
            CMatrix& out = d.at(i, axis);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    if (a != b) out(a, b) = w(a, b) / (frame.energies(b) - frame.energies(a));
        }
    }
    return d;
}

namespace {

void twist_frame(AdiabaticFrame& f, const GaugeTwist& twist, const SpinConfiguration& config) {
    if (!twist) return;
    const RVector chi = twist(config);
    if (chi.size() != f.dim()) throw DimensionError("gauge twist returned the wrong number of phases");
    for (int a = 0; a < f.dim(); ++a) f.states.col(a) *= std::polar(1.0, chi(a));
}

}  // namespace

CouplingTensor coupling_finite_difference(const QuantumModelSpec& spec, const SpinConfiguration& config, double step,
                                          const GaugeTwist& twist) {
    if (!(step > 0.0)) throw Error("finite-difference step must be positive");
    CMatrix h;
    assemble_h(spec, config, h);
    AdiabaticFrame center = eigendecompose(h);
    require_nondegenerate(center);
    const GaugeAnchor anchor = GaugeAnchor::of(center);
    twist_frame(center, twist, config);

    const int n = center.dim();
    CouplingTensor d(config.size(), n);
    SpinConfiguration probe = config;
    AdiabaticFrame plus, minus;
    for (std::size_t i = 0; i < config.size(); ++i) {
        for (int axis = 0; axis < 3; ++axis) {
            const double x0 = config[i][axis];
            if (x0 + step == x0 || x0 - step == x0) throw Error("finite-difference step underflows the spin component");
            probe[i][axis] = x0 + step;
            assemble_h(spec, probe, h);
            eigendecompose_into(h, plus);
            require_nondegenerate(plus);
            apply_anchor(plus, anchor);
            twist_frame(plus, twist, probe);
            probe[i][axis] = x0 - step;
            assemble_h(spec, probe, h);
            eigendecompose_into(h, minus);
            require_nondegenerate(minus);
            apply_anchor(minus, anchor);
            twist_frame(minus, twist, probe);
            probe[i][axis] = x0;
            plus.states.colwise().normalize();
            minus.states.colwise().normalize();
            // The true spacing (x0 + step) - (x0 - step) can differ from 2 step by rounding.
            const double width = (x0 + step) - (x0 - step);
            // Midpoint bra: <p+m|p-m> is exactly antihermitian on the diagonal, so
            // Re d_aa carries only rounding error. Still second order in step.
            d.at(i, axis) = (0.5 * (plus.states + minus.states)).adjoint() * (plus.states - minus.states) / width;
        }
    }
    return d;
}

CouplingTensor coupling_diagonal_tensor(const QuantumModelSpec& spec, const SpinConfiguration& config, double step,
                                        const GaugeTwist& twist) {
    return coupling_finite_difference(spec, config, step, twist).diagonal_part();
}

GeometricPhaseRates coupling_diagonal(const QuantumModelSpec& spec, const SpinConfiguration& config, double step,
                                      const GaugeTwist& twist) {
    return GeometricPhaseRates::from_diagonal(coupling_diagonal_tensor(spec, config, step, twist));
}

CouplingTensor coupling_diagonal_analytic(const AdiabaticFrame& frame, const CouplingTensor& offdiag,
                                          const GaugeAnchor& anchor) {
    const int n = frame.dim();
    if (offdiag.dim() != n || anchor.dim != n) throw DimensionError("coupling_diagonal_analytic: dimension mismatch");
    CouplingTensor d(offdiag.n_spins(), n);
    for (int a = 0; a < n; ++a) {
        const int k = anchor.index[a];
        const double weight = std::abs(frame.states(k, a));
        if (weight == 0.0) throw DegeneracyError("coupling_diagonal_analytic: anchored component vanished", 0.0);
        const Complex unphase = std::polar(1.0, -anchor.phase[a]);
        for (std::size_t i = 0; i < offdiag.n_spins(); ++i)
            for (int axis = 0; axis < 3; ++axis) {
                const CMatrix& m = offdiag.at(i, axis);
                Complex sum = 0.0;
                for (int b = 0; b < n; ++b)
                    if (b != a) sum += frame.states(k, b) * m(b, a);
                d.at(i, axis)(a, a) = Complex(0.0, -(unphase * sum).imag() / weight);
            }
    }
    return d;
}

std::vector<SpinField> energy_gradients(const AdiabaticFrame& frame, const QuantumModelSpec& spec) {
    const int n = frame.dim();
    std::vector<SpinField> out(n, SpinField(spec.n_spins(), Vec3::Zero()));
    for (std::size_t i = 0; i < spec.n_spins(); ++i) {
        const auto& c = spec.couplings[i];
        if (c.gamma == 0.0) continue;
        for (int axis = 0; axis < 3; ++axis) {
            const CMatrix& op = c.axis_ops[axis].matrix();
            for (int a = 0; a < n; ++a)
                out[a][i][axis] = c.gamma * frame.state(a).dot(op * frame.state(a)).real();
        }
    }
    return out;
}

SpinField average_surface_gradient(const AdiabaticFrame& frame, const QuantumModelSpec& spec, const BathSpec& bath,
                                   const SpinConfiguration& config, int a, int b, double gap_tol) {
    require_nondegenerate(frame, gap_tol);
    if (a < 0 || b < 0 || a >= frame.dim() || b >= frame.dim()) throw DimensionError("level index out of range");
    SpinField g = bath_gradient(config, bath);
    const auto eg = energy_gradients(frame, spec);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 0.5 * (eg[a][i] + eg[b][i]);
    return g;
}

SpinField average_surface_gradient(const QuantumModelSpec& spec, const BathSpec& bath, const SpinConfiguration& config,
                                   int a, int b, double gap_tol) {
    return average_surface_gradient(eigendecompose(h_of_s(spec, config)), spec, bath, config, a, b, gap_tol);
}

SpinField liouville_drift(const AdiabaticFrame& frame, const QuantumModelSpec& spec, const BathSpec& bath,
                          const SpinConfiguration& config, int a, int b, double gap_tol) {
    return spin_time_derivative(config, average_surface_gradient(frame, spec, bath, config, a, b, gap_tol));
}

SpinField liouville_drift(const QuantumModelSpec& spec, const BathSpec& bath, const SpinConfiguration& config, int a,
                          int b, double gap_tol) {
    return spin_time_derivative(config, average_surface_gradient(spec, bath, config, a, b, gap_tol));
}

Complex b_contract(const SpinConfiguration& config, std::span<const CVec3> x, std::span<const CVec3> y) {
    Complex sum = 0.0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        const Matrix3 b = b_matrix(config[i]);
        sum += (x[i].array() * (b.cast<Complex>() * y[i]).array()).sum();
    }
    return sum;
}

JSuperoperator::JSuperoperator(int dim, std::size_t n_spins)
    : n_(dim),
      n_spins_(n_spins),
      scalar_(static_cast<std::size_t>(dim) * dim * dim * dim, Complex(0.0)),
      coeff_(scalar_.size() * n_spins, CVec3::Zero()) {}

Complex JSuperoperator::apply(int a, int b, int c, int d, Complex f, std::span<const CVec3> grad_f) const {
    Complex out = scalar(a, b, c, d) * f;
    for (std::size_t i = 0; i < n_spins_; ++i) out += (coefficient(a, b, c, d, i).array() * grad_f[i].array()).sum();
    return out;
}

double JSuperoperator::max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& c : coeff_) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
}

SSuperoperator::SSuperoperator(int dim) : n_(dim), v_(static_cast<std::size_t>(dim) * dim * dim * dim, Complex(0.0)) {}

namespace {

std::vector<CVec3> per_spin(const CouplingTensor& d, int a, int b, bool conjugate) {
    std::vector<CVec3> v(d.n_spins());
    for (std::size_t i = 0; i < d.n_spins(); ++i) v[i] = conjugate ? d.vector(i, a, b).conjugate().eval() : d.vector(i, a, b);
    return v;
}

std::vector<CVec3> complexify(std::span<const Vec3> g) {
    std::vector<CVec3> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = g[i].cast<Complex>();
    return v;
}

void check_superoperator_shapes(const SpinConfiguration& config, const AdiabaticFrame& frame, const CouplingTensor& d) {
    require_nondegenerate(frame);
    if (d.dim() != frame.dim() || d.n_spins() != config.size())
        throw DimensionError("superoperator: coupling tensor does not match frame/configuration");
}

}  // namespace

JSuperoperator j_superoperator(const SpinConfiguration& config, std::span<const Vec3> bath_grad,
                               const AdiabaticFrame& frame, const CouplingTensor& d) {
    check_superoperator_shapes(config, frame, d);
    if (bath_grad.size() != config.size()) throw DimensionError("j_superoperator: bath gradient length mismatch");
    const int n = frame.dim();
    const std::size_t ns = config.size();
    const auto g = complexify(bath_grad);
    std::vector<Matrix3> bt(ns);
    for (std::size_t i = 0; i < ns; ++i) bt[i] = b_matrix(config[i]).transpose();

    JSuperoperator j(n, ns);
    for (int a = 0; a < n; ++a)
        for (int ap = 0; ap < n; ++ap)
            for (int b = 0; b < n; ++b)
                for (int bp = 0; bp < n; ++bp) {
                    Complex scalar = 0.0;
                    if (bp == ap) scalar += b_contract(config, per_spin(d, a, b, false), g);
                    if (b == a) scalar += b_contract(config, per_spin(d, ap, bp, true), g);
                    j.scalar(a, ap, b, bp) = scalar;
                    // Coefficient of d/dS_iJ: sum_I B_IJ (...)^I = (B^T (...))_J.
                    for (std::size_t i = 0; i < ns; ++i) {
                        CVec3 coeff = CVec3::Zero();
                        if (bp == ap) coeff += 0.5 * frame.bohr(a, b) * (bt[i].cast<Complex>() * d.vector(i, a, b));
                        if (b == a)
                            coeff += 0.5 * frame.bohr(ap, bp) *
                                     (bt[i].cast<Complex>() * d.vector(i, ap, bp).conjugate());
                        j.coefficient(a, ap, b, bp, i) = coeff;
                    }
                }
    return j;
}

SSuperoperator s_superoperator(const SpinConfiguration& config, const AdiabaticFrame& frame,
                               const std::vector<SpinField>& energy_grads, const CouplingTensor& d) {
    check_superoperator_shapes(config, frame, d);
    const int n = frame.dim();
    if (static_cast<int>(energy_grads.size()) != n) throw DimensionError("s_superoperator: need one energy gradient per level");
    const std::size_t ns = config.size();

    // Cache per-spin coupling vectors and their conjugates.
    std::vector<std::vector<CVec3>> dv(static_cast<std::size_t>(n) * n), dc(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            dv[a * n + b] = per_spin(d, a, b, false);
            dc[a * n + b] = per_spin(d, a, b, true);
        }
    auto dvec = [&](int a, int b) -> std::span<const CVec3> { return dv[a * n + b]; };
    auto dconj = [&](int a, int b) -> std::span<const CVec3> { return dc[a * n + b]; };

    SSuperoperator s(n);
    std::vector<CVec3> esum(ns);
    for (int a = 0; a < n; ++a)
        for (int ap = 0; ap < n; ++ap) {
            for (std::size_t i = 0; i < ns; ++i) esum[i] = (energy_grads[a][i] + energy_grads[ap][i]).cast<Complex>();
            for (int b = 0; b < n; ++b)
                for (int bp = 0; bp < n; ++bp) {
                    Complex v = 0.0;
                    if (ap == bp) {
                        v += 0.5 * b_contract(config, esum, dvec(a, b));
                        for (int sg = 0; sg < n; ++sg)
                            v -= 0.5 * frame.bohr(a, sg) * b_contract(config, dvec(a, sg), dvec(sg, b));
                    }
                    if (a == b) {
                        v += 0.5 * b_contract(config, esum, dconj(ap, bp));
                        for (int sg = 0; sg < n; ++sg)
                            v -= 0.5 * frame.bohr(ap, sg) * b_contract(config, dconj(ap, sg), dconj(sg, bp));
                    }
                    v -= 0.5 * frame.bohr(a, b) * b_contract(config, dvec(a, b), dconj(ap, bp));
                    v -= 0.5 * frame.bohr(ap, bp) * b_contract(config, dconj(ap, bp), dvec(a, b));
                    s(a, ap, b, bp) = v;
                }
        }
    return s;
}

CMatrix j_adiabatic(const SpinConfiguration& config, std::span<const Vec3> bath_grad, const GeometricPhaseRates& phases) {
    if (bath_grad.size() != config.size() || phases.n_spins() != config.size())
        throw DimensionError("j_adiabatic: input lengths differ from the configuration");
    const int n = phases.dim();
    CMatrix out = CMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double sum = 0.0;
            for (std::size_t i = 0; i < config.size(); ++i)
                sum += (phases.vector(i, a) - phases.vector(i, b)).dot(b_matrix(config[i]) * bath_grad[i]);
            out(a, b) = Complex(0.0, sum);
        }
    return out;
}

CMatrix s_adiabatic(const SpinConfiguration& config, const std::vector<SpinField>& energy_grads,
                    const GeometricPhaseRates& phases) {
    const int n = phases.dim();
    if (phases.n_spins() != config.size() || static_cast<int>(energy_grads.size()) != n)
        throw DimensionError("s_adiabatic: input lengths differ from the configuration");
    CMatrix out = CMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double sum = 0.0;
            for (std::size_t i = 0; i < config.size(); ++i)
                sum += (phases.vector(i, a) - phases.vector(i, b))
                           .dot(b_matrix(config[i]) * (energy_grads[a][i] + energy_grads[b][i]));
            out(a, b) = Complex(0.0, -0.5 * sum);
        }
    return out;
}

SuperoperatorInputs SuperoperatorInputs::evaluate(const QuantumModelSpec& spec, const BathSpec& bath,
                                                  const SpinConfiguration& config) {
    spec.validate(config.size());
    SuperoperatorInputs in;
    in.config = config;
    in.bath_grad = bath_gradient(config, bath);
    in.frame = eigendecompose(h_of_s(spec, config));
    require_nondegenerate(in.frame);
    in.energy_grads = energy_gradients(in.frame, spec);
    const CouplingTensor off = coupling_offdiagonal(in.frame, spec);
    in.couplings = off + coupling_diagonal_analytic(in.frame, off, GaugeAnchor::of(in.frame));
    return in;
}

}  // namespace spinbath
