#include "spinbath/propagate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <thread>

namespace spinbath {

void Model::validate() const {
    quantum.validate(quantum.n_spins());
    if (quantum.n_spins() == 0) throw DimensionError("model has no bath spins");
    bath.validate(quantum.n_spins());
}

namespace {

// An anchored component is abandoned once it falls below this fraction of the
// state's largest component.
constexpr double kReanchorRatio = 0.5;
// Minimum |<a(t)|a(t+dt)>| before a step is treated as a level reordering.
constexpr double kContinuityFloor = 0.5;

// Hand-rolled for n <= 8; Eigen's generic GEMV dominates the step otherwise.
template <class V>
void small_matvec(const CMatrix& m, const V& v, CVector& out) {
    const Eigen::Index n = m.rows();
    out.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        Complex acc = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) acc += m(r, c) * v(c);
        out(r) = acc;
    }
}

// <v|m|v> for Hermitian m, in real arithmetic.
template <class V>
double expectation(const CMatrix& m, const V& v) {
    const Eigen::Index n = m.rows();
    double diag = 0.0;
    double off = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        const double vr = v(r).real(), vi = v(r).imag();
        diag += m(r, r).real() * (vr * vr + vi * vi);
        for (Eigen::Index c = r + 1; c < n; ++c) {
            // Re(conj(v_r) m_rc v_c)
            const double mr = m(r, c).real(), mi = m(r, c).imag();
            const double wr = mr * v(c).real() - mi * v(c).imag();
            const double wi = mr * v(c).imag() + mi * v(c).real();
            off += vr * wr + vi * wi;
        }
    }
    return diag + 2.0 * off;
}

}  // namespace

struct ElementPropagator::Impl {
    explicit Impl(const Model& m) : model(m) {
        model.validate();
        const std::size_t ns = model.n_spins();
        ops.resize(3 * ns);
        active.assign(3 * ns, 0);
        for (std::size_t i = 0; i < ns; ++i) {
            const auto& c = model.quantum.couplings[i];
            for (int axis = 0; axis < 3; ++axis) {
                ops[3 * i + axis] = c.gamma * c.axis_ops[axis].matrix();
                active[3 * i + axis] = (c.gamma != 0.0 && !c.axis_ops[axis].matrix().isZero(0.0)) ? 1 : 0;
            }
        }
    }

    Model model;
    std::vector<CMatrix> ops;  // gamma_i A^(i)_I, index 3 i + I
    std::vector<char> active;

    CMatrix h;
    AdiabaticFrame scratch;
    SpinField grad;
    SpinField next_drift;
    Rk4Workspace ws;
    CVector work;

    void frame_at(const SpinConfiguration& c, AdiabaticFrame& out) {
        assemble_h(model.quantum, c, h);
        eigendecompose_into(h, out);
        require_nondegenerate(out);
    }

    void drift(const SpinConfiguration& c, const AdiabaticFrame& f, int a, int b, SpinField& out) {
        bath_gradient(c, model.bath, grad);
        for (std::size_t k = 0; k < ops.size(); ++k) {
            if (!active[k]) continue;
            double de = expectation(ops[k], f.state(a));
            if (b != a) {
                de += expectation(ops[k], f.state(b));
            } else {
                de *= 2.0;
            }
            grad[k / 3][static_cast<int>(k % 3)] += 0.5 * de;
        }
        spin_time_derivative(c, grad, out);
    }

    // Im d^k_aa in the anchored gauge.
    double diagonal_rate(const AdiabaticFrame& f, const GaugeAnchor& anchor, int a, std::size_t k) {
        const int n = f.dim();
        const int row = anchor.index[a];
        small_matvec(ops[k], f.state(a), work);
        Complex sum = 0.0;
        for (int c = 0; c < n; ++c) {
            if (c == a) continue;
            Complex overlap = 0.0;
            for (int r = 0; r < n; ++r) overlap += std::conj(f.states(r, c)) * work(r);
            const Complex dca = overlap / (f.energies(a) - f.energies(c));
            sum += f.states(row, c) * dca;
        }
        return -(std::polar(1.0, -anchor.phase[a]) * sum).imag() / std::abs(f.states(row, a));
    }

    Complex connection(const AdiabaticFrame& f, const GaugeAnchor& anchor, int a, int b, const SpinField& velocity) {
        if (a == b) return 0.0;
        double x = 0.0;
        for (std::size_t k = 0; k < ops.size(); ++k) {
            if (!active[k]) continue;
            const double v = velocity[k / 3][static_cast<int>(k % 3)];
            if (v == 0.0) continue;
            x += (diagonal_rate(f, anchor, a, k) - diagonal_rate(f, anchor, b, k)) * v;
        }
        return Complex(0.0, x);
    }

    static double anchor_ratio(const AdiabaticFrame& f, const GaugeAnchor& anchor) {
        double worst = 1.0;
        for (int a = 0; a < f.dim(); ++a) {
            const double top = f.states.col(a).cwiseAbs2().maxCoeff();
            worst = std::min(worst, std::norm(f.states(anchor.index[a], a)) / top);
        }
        return std::sqrt(worst);
    }
};

ElementPropagator::ElementPropagator(const Model& model) : impl_(std::make_unique<Impl>(model)) {}

ElementPropagator::~ElementPropagator() = default;

TrajectoryState ElementPropagator::start(const SpinConfiguration& config, int alpha, int alpha_p, Complex rho0) {
    auto& im = *impl_;
    const int n = im.model.dim();
    if (alpha < 0 || alpha_p < 0 || alpha >= n || alpha_p >= n) throw DimensionError("element index out of range");
    if (config.size() != im.model.n_spins()) throw DimensionError("configuration size does not match the model");
    TrajectoryState s;
    s.config = config;
    s.alpha = alpha;
    s.alpha_p = alpha_p;
    s.rho0 = rho0;
    im.frame_at(config, s.frame);
    s.anchor = GaugeAnchor::of(s.frame);
    im.drift(config, s.frame, alpha, alpha_p, s.drift);
    s.omega = s.frame.bohr(alpha, alpha_p);
    s.connection = im.connection(s.frame, s.anchor, alpha, alpha_p, s.drift);
    return s;
}

void ElementPropagator::step(TrajectoryState& s, double dt) {
    auto& im = *impl_;
    const int a = s.alpha;
    const int b = s.alpha_p;
    const DriftFn flow = [&im, a, b](const SpinConfiguration& c, SpinField& out) {
        im.frame_at(c, im.scratch);
        im.drift(c, im.scratch, a, b, out);
    };
    rk4_advance(s.config, flow, s.drift, dt, im.ws);

    AdiabaticFrame& next = im.scratch;
    im.frame_at(s.config, next);
    for (int level : {a, b}) {
        const double overlap = std::abs(s.frame.state(level).dot(next.state(level)));
        if (overlap < kContinuityFloor)
            throw DegeneracyError("level " + std::to_string(level) + " changed character within one step", overlap);
    }
    apply_anchor(next, s.anchor);
    im.drift(s.config, next, a, b, im.next_drift);
    const double omega = next.bohr(a, b);
    const Complex conn = im.connection(next, s.anchor, a, b, im.next_drift);

    s.dyn_phase += 0.5 * dt * (s.omega + omega);
    s.geo_exponent += 0.5 * dt * (s.connection + conn);
    s.time += dt;
    std::swap(s.frame, next);
    std::swap(s.drift, im.next_drift);
    s.omega = omega;
    s.connection = conn;

    if (Impl::anchor_ratio(s.frame, s.anchor) < kReanchorRatio) {
        // The frame itself is unchanged; only the gauge used from here on moves.
        s.anchor = GaugeAnchor::of(s.frame);
        s.connection = im.connection(s.frame, s.anchor, a, b, s.drift);
        ++s.reanchors;
    }
}

TrajectoryState start_trajectory(const Model& model, const SpinConfiguration& config, int alpha, int alpha_p,
                                 Complex rho0) {
    ElementPropagator p(model);
    return p.start(config, alpha, alpha_p, rho0);
}

TrajectoryState propagate_element(TrajectoryState state, const Model& model, double dt, std::size_t n_steps) {
    ElementPropagator p(model);
    for (std::size_t k = 0; k < n_steps; ++k) p.step(state, dt);
    return state;
}

void EnsembleSpec::validate() const {
    if (n_traj < 1) throw Error("ensemble.n_traj must be at least 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("ensemble.dt must be positive");
    if (record_every < 1) throw Error("ensemble.record_every must be at least 1");
    if (init == InitialDistribution::Thermal && !(beta >= 0.0)) throw Error("ensemble.beta must be non-negative");
    if (!(spin_length > 0.0) || !std::isfinite(spin_length)) throw Error("ensemble.spin_length must be positive");
    if (rho_init.dim() < 2) throw Error("ensemble.rho_init is missing");
    if (std::abs(rho_init.matrix().trace() - 1.0) > 1e-10) throw Error("ensemble.rho_init must have unit trace");
    const AdiabaticFrame f = eigendecompose(rho_init);
    if (f.energies(0) < -1e-10) throw Error("ensemble.rho_init must be positive semidefinite");
}

namespace {

class PointRng {
public:
    PointRng(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    Vec3 on_sphere(double radius) {
        const double z = 2.0 * uniform() - 1.0;
        const double phi = 2.0 * std::numbers::pi * uniform();
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return radius * Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace

std::size_t thermal_sweeps(double beta, const BathSpec& bath, std::size_t n_spins) {
    return 10 * n_spins * static_cast<std::size_t>(std::ceil(beta * bath.field.norm() + 1.0));
}

SpinConfiguration sample_point(const EnsembleSpec& spec, const BathSpec& bath, std::size_t n_spins, std::size_t index) {
    if (spec.init == InitialDistribution::Thermal && !(spec.beta >= 0.0)) throw Error("thermal sampling needs beta >= 0");
    PointRng rng(spec.seed, index);
    std::vector<Vec3> spins(n_spins);
    for (auto& s : spins) s = rng.on_sphere(spec.spin_length);
    if (spec.init == InitialDistribution::Thermal) {
        bath.validate(n_spins);
        const std::size_t sweeps = thermal_sweeps(spec.beta, bath, n_spins);
        for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
            for (std::size_t i = 0; i < n_spins; ++i) {
                Vec3 local = bath.field;
                for (std::size_t j = 0; j < n_spins; ++j)
                    if (j != i) local += bath.exchange(i, j) * spins[j];
                const Vec3 trial = rng.on_sphere(spec.spin_length);
                const double delta_e = -local.dot(trial - spins[i]);
                const double u = rng.uniform();
                if (delta_e <= 0.0 || u < std::exp(-spec.beta * delta_e)) spins[i] = trial;
            }
        }
    }
    return SpinConfiguration(std::move(spins));
}

std::vector<SpinConfiguration> sample_initial(const EnsembleSpec& spec, const BathSpec& bath, std::size_t n_spins) {
    std::vector<SpinConfiguration> out;
    out.reserve(spec.n_traj);
    for (std::size_t k = 0; k < spec.n_traj; ++k) out.push_back(sample_point(spec, bath, n_spins, k));
    return out;
}

std::size_t ObservableRegistry::add(const std::string& name, const HermitianOperator& op) {
    if (name.empty()) throw Error("observable name must not be empty");
    for (const auto& e : entries_)
        if (e.name == name) throw Error("duplicate observable name '" + name + "'");
    if (!entries_.empty() && entries_.front().kind == Kind::Operator && entries_.front().op.dim() != op.dim())
        throw DimensionError("observable '" + name + "' has a different dimension");
    entries_.push_back({name, Kind::Operator, op});
    return entries_.size() - 1;
}

std::size_t ObservableRegistry::add_energy(const std::string& name) {
    if (name.empty()) throw Error("observable name must not be empty");
    for (const auto& e : entries_)
        if (e.name == name) throw Error("duplicate observable name '" + name + "'");
    entries_.push_back({name, Kind::Energy, HermitianOperator{}});
    return entries_.size() - 1;
}

unsigned workers_from_environment() {
    const char* raw = std::getenv("SPINBATH_WORKERS");
    if (raw == nullptr) return std::max(1u, std::thread::hardware_concurrency());
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || v < 1 || v > 4096)
        throw Error("SPINBATH_WORKERS must be a positive integer, got '" + std::string(raw) + "'");
    return static_cast<unsigned>(v);
}

namespace {

constexpr std::size_t kBlockSize = 16;
constexpr std::size_t kMaxDropReasons = 8;

struct BlockResult {
    std::vector<double> mean;  // running mean and sum of squared deviations
    std::vector<double> m2;
    std::size_t used = 0;
    std::size_t dropped = 0;
    double casimir = 0.0;
    double modulus = 0.0;
    std::size_t reanchors = 0;
    std::vector<std::string> reasons;
};

struct Layout {
    int n = 0;
    std::size_t n_obs = 0;
    std::size_t n_records = 0;
    std::size_t n_cols() const { return 2 * static_cast<std::size_t>(n) * n + n_obs; }
    std::size_t rho_col(int a, int b, int part) const { return 2 * (static_cast<std::size_t>(a) * n + b) + part; }
    std::size_t obs_col(std::size_t k) const { return 2 * static_cast<std::size_t>(n) * n + k; }
};

struct TrajectoryOutcome {
    double casimir = 0.0;
    double modulus = 0.0;
    std::size_t reanchors = 0;
};

// Fills contrib (n_records x n_cols) for one trajectory.
TrajectoryOutcome run_trajectory(const EnsembleSpec& spec, const Model& model, const ObservableRegistry& obs,
                                 const Layout& layout, ElementPropagator& prop, std::size_t index,
                                 std::vector<double>& contrib) {
    std::fill(contrib.begin(), contrib.end(), 0.0);
    const SpinConfiguration start = sample_point(spec, model.bath, model.n_spins(), index);
    AdiabaticFrame frame0 = eigendecompose(h_of_s(model.quantum, start));
    require_nondegenerate(frame0);
    const CMatrix rho_ad = frame0.states.adjoint() * spec.rho_init.matrix() * frame0.states;

    TrajectoryOutcome out;
    const int n = layout.n;
    const std::size_t cols = layout.n_cols();
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            TrajectoryState s = prop.start(start, a, b, rho_ad(a, b));
            const double modulus0 = std::abs(s.rho0);
            for (std::size_t k = 0, rec = 0; k <= spec.n_steps; ++k) {
                if (k % spec.record_every == 0) {
                    // (b, a) shares this characteristic and carries the conjugate value.
                    const Complex v = s.value();
                    out.modulus = std::max(out.modulus, std::abs(std::abs(v) - modulus0));
                    double* row = contrib.data() + rec * cols;
                    const CVector& va = s.frame.state(a);
                    const CVector& vb = s.frame.state(b);
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q) {
                            Complex e = v * va(p) * std::conj(vb(q));
                            if (a != b) e += std::conj(v) * vb(p) * std::conj(va(q));
                            row[layout.rho_col(p, q, 0)] += e.real();
                            row[layout.rho_col(p, q, 1)] += e.imag();
                        }
                    for (std::size_t o = 0; o < obs.size(); ++o) {
                        const auto& entry = obs.entries()[o];
                        double x = 0.0;
                        if (entry.kind == ObservableRegistry::Kind::Operator) {
                            const Complex a_ba = vb.dot(entry.op.matrix() * va);
                            x = (a == b) ? (a_ba * v).real() : 2.0 * (a_ba * v).real();
                        } else if (a == b) {
                            x = v.real() * (s.frame.energies(a) + bath_energy(s.config, model.bath));
                        }
                        row[layout.obs_col(o)] += x;
                    }
                    ++rec;
                }
                if (k < spec.n_steps) prop.step(s, spec.dt);
            }
            out.casimir = std::max(out.casimir, s.config.casimir_drift());
            out.reanchors += static_cast<std::size_t>(s.reanchors);
        }
    }
    return out;
}

}  // namespace

ObservableSeries run_ensemble(const EnsembleSpec& spec, const Model& model, const ObservableRegistry& observables,
                              unsigned workers) {
    spec.validate();
    model.validate();
    if (spec.rho_init.dim() != model.dim()) throw DimensionError("rho_init dimension does not match the model");
    for (const auto& e : observables.entries())
        if (e.kind == ObservableRegistry::Kind::Operator && e.op.dim() != model.dim())
            throw DimensionError("observable '" + e.name + "' dimension does not match the model");

    Layout layout;
    layout.n = model.dim();
    layout.n_obs = observables.size();
    layout.n_records = spec.n_steps / spec.record_every + 1;
    const std::size_t width = layout.n_records * layout.n_cols();

    const std::size_t n_blocks = (spec.n_traj + kBlockSize - 1) / kBlockSize;
    std::vector<BlockResult> blocks(n_blocks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        try {
            ElementPropagator prop(model);
            std::vector<double> contrib(width);
            for (std::size_t blk = next++; blk < n_blocks; blk = next++) {
                BlockResult& r = blocks[blk];
                r.mean.assign(width, 0.0);
                r.m2.assign(width, 0.0);
                const std::size_t end = std::min(spec.n_traj, (blk + 1) * kBlockSize);
                for (std::size_t idx = blk * kBlockSize; idx < end; ++idx) {
                    TrajectoryOutcome o;
                    try {
                        o = run_trajectory(spec, model, observables, layout, prop, idx, contrib);
                    } catch (const DegeneracyError& e) {
                        ++r.dropped;
                        if (r.reasons.size() < kMaxDropReasons)
                            r.reasons.push_back("trajectory " + std::to_string(idx) + ": " + e.what());
                        continue;
                    }
                    ++r.used;
                    const double inv = 1.0 / static_cast<double>(r.used);
                    r.casimir = std::max(r.casimir, o.casimir);
                    r.modulus = std::max(r.modulus, o.modulus);
                    r.reanchors += o.reanchors;
                    for (std::size_t k = 0; k < width; ++k) {
                        const double delta = contrib[k] - r.mean[k];
                        r.mean[k] += delta * inv;
                        r.m2[k] += delta * (contrib[k] - r.mean[k]);
                    }
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n_blocks;
        }
    };

    const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_blocks)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Pairwise merge of block moments, always in block order.
    std::vector<double> avg(width, 0.0), m2(width, 0.0);
    ObservableSeries series;
    series.dim = layout.n;
    series.n_traj = spec.n_traj;
    for (const auto& r : blocks) {
        if (r.used > 0) {
            const double na = static_cast<double>(series.n_used);
            const double nb = static_cast<double>(r.used);
            const double total = na + nb;
            for (std::size_t k = 0; k < width; ++k) {
                const double delta = r.mean[k] - avg[k];
                avg[k] += delta * (nb / total);
                m2[k] += r.m2[k] + delta * delta * (na * nb / total);
            }
        }
        series.n_used += r.used;
        series.n_dropped += r.dropped;
        series.max_casimir_drift = std::max(series.max_casimir_drift, r.casimir);
        series.max_modulus_error = std::max(series.max_modulus_error, r.modulus);
        series.reanchors += r.reanchors;
        for (const auto& reason : r.reasons)
            if (series.drop_reasons.size() < kMaxDropReasons) series.drop_reasons.push_back(reason);
    }

    const double used = static_cast<double>(series.n_used);
    auto mean = [&](std::size_t k) { return avg[k]; };
    auto stderr_of = [&](std::size_t k) {
        if (series.n_used < 2) return 0.0;
        return std::sqrt(std::max(0.0, m2[k] / (used - 1.0)) / used);
    };

    const int n = layout.n;
    const std::size_t cols = layout.n_cols();
    for (const auto& e : observables.entries()) series.names.push_back(e.name);
    series.values.assign(layout.n_obs, std::vector<double>(layout.n_records));
    series.stderrs.assign(layout.n_obs, std::vector<double>(layout.n_records));
    for (std::size_t rec = 0; rec < layout.n_records; ++rec) {
        series.times.push_back(static_cast<double>(rec * spec.record_every) * spec.dt);
        CMatrix rho(n, n), err(n, n);
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
                const std::size_t re = rec * cols + layout.rho_col(p, q, 0);
                const std::size_t im = rec * cols + layout.rho_col(p, q, 1);
                rho(p, q) = Complex(mean(re), mean(im));
                err(p, q) = Complex(stderr_of(re), stderr_of(im));
            }
        series.rho.push_back(rho);
        series.rho_stderr.push_back(err);
        for (std::size_t o = 0; o < layout.n_obs; ++o) {
            const std::size_t k = rec * cols + layout.obs_col(o);
            series.values[o][rec] = mean(k);
            series.stderrs[o][rec] = stderr_of(k);
        }
    }
    return series;
}

}  // namespace spinbath
