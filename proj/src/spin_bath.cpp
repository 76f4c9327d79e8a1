#include "spinbath/spin_bath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spinbath {

SpinConfiguration::SpinConfiguration(std::vector<Vec3> spins) : spins_(std::move(spins)) {
    if (spins_.empty()) throw DimensionError("spin configuration needs at least one spin");
    if (!finite()) throw Error("spin configuration has non-finite components");
    casimirs_.reserve(spins_.size());
    for (const auto& s : spins_) casimirs_.push_back(s.squaredNorm());
}

double SpinConfiguration::casimir_drift() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < spins_.size(); ++i)
        worst = std::max(worst, std::abs(spins_[i].squaredNorm() - casimirs_[i]));
    return worst;
}

bool SpinConfiguration::finite() const {
    return std::all_of(spins_.begin(), spins_.end(), [](const Vec3& s) { return s.allFinite(); });
}

Eigen::VectorXd SpinConfiguration::flatten() const {
    Eigen::VectorXd out(3 * spins_.size());
    for (std::size_t i = 0; i < spins_.size(); ++i) out.segment<3>(3 * i) = spins_[i];
    return out;
}

BathSpec BathSpec::zeeman(const Vec3& b, std::size_t n_spins) {
    BathSpec spec;
    spec.field = b;
    spec.exchange = Eigen::MatrixXd::Zero(n_spins, n_spins);
    return spec;
}

void BathSpec::validate(std::size_t n) const {
    if (static_cast<std::size_t>(exchange.rows()) != n || static_cast<std::size_t>(exchange.cols()) != n)
        throw DimensionError("exchange matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    if (!field.allFinite() || !exchange.allFinite()) throw Error("bath parameters must be finite");
    for (std::size_t i = 0; i < n; ++i) {
        if (exchange(i, i) != 0.0) throw DimensionError("exchange matrix must have zero diagonal");
        for (std::size_t j = i + 1; j < n; ++j)
            if (exchange(i, j) != exchange(j, i)) throw DimensionError("exchange matrix must be symmetric");
    }
}

Matrix3 b_matrix(const Vec3& s) {
    Matrix3 m;
    m << 0.0, s.z(), -s.y(),
        -s.z(), 0.0, s.x(),
        s.y(), -s.x(), 0.0;
    return m;
}

double spin_bracket(std::span<const Vec3> grad_a, std::span<const Vec3> grad_b, const SpinConfiguration& config) {
    if (grad_a.size() != config.size() || grad_b.size() != config.size())
        throw DimensionError("spin_bracket: gradient lists must have one entry per spin");
    double sum = 0.0;
    for (std::size_t i = 0; i < config.size(); ++i) sum += grad_a[i].dot(b_matrix(config[i]) * grad_b[i]);
    return sum;
}

double bath_energy(const SpinConfiguration& config, const BathSpec& spec) {
    const std::size_t n = config.size();
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e -= spec.field.dot(config[i]);
        for (std::size_t j = i + 1; j < n; ++j) e -= spec.exchange(i, j) * config[i].dot(config[j]);
    }
    return e;
}

void bath_gradient(const SpinConfiguration& config, const BathSpec& spec, SpinField& g) {
    const std::size_t n = config.size();
    g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = -spec.field;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) g[i] -= spec.exchange(i, j) * config[j];
    }
}

SpinField bath_gradient(const SpinConfiguration& config, const BathSpec& spec) {
    SpinField g;
    bath_gradient(config, spec, g);
    return g;
}

GradientFn bath_gradient_fn(const BathSpec& spec) {
    return [spec](const SpinConfiguration& c) { return bath_gradient(c, spec); };
}

void spin_time_derivative(const SpinConfiguration& config, std::span<const Vec3> grad, SpinField& out) {
    if (grad.size() != config.size()) throw DimensionError("spin_time_derivative: gradient list must have one entry per spin");
    out.resize(config.size());
    // B(S) g = g x S
    for (std::size_t i = 0; i < config.size(); ++i) out[i] = grad[i].cross(config[i]);
}

SpinField spin_time_derivative(const SpinConfiguration& config, std::span<const Vec3> grad) {
    SpinField out;
    spin_time_derivative(config, grad, out);
    return out;
}

Vec3 rodrigues_rotate(const Vec3& v, const Vec3& axis, double angle) {
    const double norm = axis.norm();
    if (norm == 0.0 || angle == 0.0) return v;
    const Vec3 k = axis / norm;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
}

namespace {

void require_positive_dt(double dt) {
    if (!(dt > 0.0)) throw Error("time step must be positive");
}

// S_dot = g x S is a rotation about g with angular speed |g|.
void rotate_single(SpinConfiguration& config, std::size_t i, const GradientFn& field, double dt) {
    const Vec3 g = field(config)[i];
    const double norm = g.norm();
    if (norm == 0.0) return;
    // Extended precision: a rounded (cos, sin) pair reused every step would
    // otherwise bias |S| linearly in the step count.
    using L = long double;
    const L angle = static_cast<L>(norm) * dt;
    const L c = std::cos(angle), s = std::sin(angle);
    const L k[3] = {L(g.x()) / norm, L(g.y()) / norm, L(g.z()) / norm};
    const Vec3& v = config[i];
    const L x[3] = {v.x(), v.y(), v.z()};
    const L kx[3] = {k[1] * x[2] - k[2] * x[1], k[2] * x[0] - k[0] * x[2], k[0] * x[1] - k[1] * x[0]};
    const L kv = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) * (1.0L - c);
    Vec3 r;
    for (int j = 0; j < 3; ++j) r[j] = static_cast<double>(x[j] * c + kx[j] * s + k[j] * kv);
    config[i] = r;
}

}  // namespace

SpinConfiguration precession_step(const SpinConfiguration& config, const GradientFn& field, double dt) {
    require_positive_dt(dt);
    SpinConfiguration out = config;
    const std::size_t n = out.size();
    if (n == 1) {
        rotate_single(out, 0, field, dt);
        return out;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) rotate_single(out, i, field, 0.5 * dt);
    rotate_single(out, n - 1, field, dt);
    for (std::size_t i = n - 1; i-- > 0;) rotate_single(out, i, field, 0.5 * dt);
    return out;
}

void Rk4Workspace::resize(const SpinConfiguration& like) {
    k2.resize(like.size());
    k3.resize(like.size());
    k4.resize(like.size());
    if (stage.size() != like.size()) stage = like;
}

void rk4_advance(SpinConfiguration& config, const DriftFn& drift, const SpinField& k1, double dt, Rk4Workspace& ws) {
    require_positive_dt(dt);
    ws.resize(config);
    const std::size_t n = config.size();
    auto& stage = ws.stage.spins();
    for (std::size_t i = 0; i < n; ++i) stage[i] = config[i] + 0.5 * dt * k1[i];
    drift(ws.stage, ws.k2);
    for (std::size_t i = 0; i < n; ++i) stage[i] = config[i] + 0.5 * dt * ws.k2[i];
    drift(ws.stage, ws.k3);
    for (std::size_t i = 0; i < n; ++i) stage[i] = config[i] + dt * ws.k3[i];
    drift(ws.stage, ws.k4);
    for (std::size_t i = 0; i < n; ++i)
        config[i] += (dt / 6.0) * (k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

SpinConfiguration rk4_step(const SpinConfiguration& config, const GradientFn& grad, double dt) {
    require_positive_dt(dt);
    const DriftFn drift = [&grad](const SpinConfiguration& c, SpinField& out) {
        const SpinField g = grad(c);
        spin_time_derivative(c, g, out);
    };
    SpinConfiguration out = config;
    SpinField k1;
    drift(config, k1);
    Rk4Workspace ws;
    rk4_advance(out, drift, k1, dt, ws);
    return out;
}

double compressibility(const SpinConfiguration& config, const GradientFn& grad, double step) {
    double kappa = 0.0;
    SpinConfiguration probe = config;
    for (std::size_t i = 0; i < config.size(); ++i) {
        for (int axis = 0; axis < 3; ++axis) {
            probe[i][axis] = config[i][axis] + step;
            const double plus = spin_time_derivative(probe, grad(probe))[i][axis];
            probe[i][axis] = config[i][axis] - step;
            const double minus = spin_time_derivative(probe, grad(probe))[i][axis];
            probe[i][axis] = config[i][axis];
            kappa += (plus - minus) / (2.0 * step);
        }
    }
    return kappa;
}

}  // namespace spinbath
