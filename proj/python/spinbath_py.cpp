#include "spinbath/berry.hpp"
#include "spinbath/checks.hpp"
#include "spinbath/config.hpp"
#include "spinbath/propagate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace spinbath;

namespace {

SpinConfiguration spins_from(const Eigen::Ref<const Eigen::MatrixXd>& s) {
    if (s.cols() != 3) throw DimensionError("spins must have shape (N, 3)");
    std::vector<Vec3> v(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i) v[i] = s.row(i).transpose();
    return SpinConfiguration(std::move(v));
}

Eigen::MatrixXd spins_to(const SpinConfiguration& c) {
    Eigen::MatrixXd out(c.size(), 3);
    for (std::size_t i = 0; i < c.size(); ++i) out.row(i) = c[i].transpose();
    return out;
}

BathSpec bath_from(const Vec3& field, std::size_t n, const std::optional<Eigen::MatrixXd>& exchange) {
    BathSpec b = BathSpec::zeeman(field, n);
    if (exchange) b.exchange = *exchange;
    b.validate(n);
    return b;
}

py::array_t<Complex> tensor_to_array(const CouplingTensor& d) {
    const auto ns = static_cast<py::ssize_t>(d.n_spins());
    const py::ssize_t n = d.dim();
    py::array_t<Complex> out({ns, py::ssize_t{3}, n, n});
    auto r = out.mutable_unchecked<4>();
    for (py::ssize_t i = 0; i < ns; ++i)
        for (int axis = 0; axis < 3; ++axis)
            for (py::ssize_t a = 0; a < n; ++a)
                for (py::ssize_t b = 0; b < n; ++b) r(i, axis, a, b) = d.at(i, axis)(a, b);
    return out;
}

Eigen::MatrixXcd dense(const CMatrix& m) { return m; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "spinbath core: classical spin baths coupled to a quantum subsystem";
    m.attr("__version__") = SPINBATH_VERSION;

    // Later registrations are tried first, so the base goes in first.
    auto& base = py::register_exception<Error>(m, "SpinbathError", PyExc_RuntimeError);
    py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<QuantumModelSpec>(m, "QuantumModel")
        .def(py::init([](const Eigen::MatrixXcd& h_sub, const std::vector<std::pair<double, std::array<Eigen::MatrixXcd, 3>>>& couplings) {
                 QuantumModelSpec s;
                 s.h_sub = HermitianOperator(CMatrix(h_sub));
                 for (const auto& [gamma, ops] : couplings) {
                     SpinCoupling c;
                     c.gamma = gamma;
                     for (int axis = 0; axis < 3; ++axis) c.axis_ops[axis] = HermitianOperator(CMatrix(ops[axis]));
                     s.couplings.push_back(c);
                 }
                 s.validate();
                 return s;
             }),
             py::arg("h_sub"), py::arg("couplings"), "couplings: list of (gamma, [Ax, Ay, Az])")
        .def_property_readonly("dim", &QuantumModelSpec::dim)
        .def_property_readonly("n_spins", &QuantumModelSpec::n_spins)
        .def_property_readonly("h_sub", [](const QuantumModelSpec& s) { return dense(s.h_sub.matrix()); });

    m.def("qubit_isotropic", &qubit_isotropic, py::arg("delta"), py::arg("gamma"), py::arg("n_spins"),
          "H = -delta sigma_x, A = sigma on every spin");
    m.def("qubit_dephasing", &qubit_dephasing, py::arg("delta"), py::arg("gamma"), py::arg("n_spins"),
          "H = -delta sigma_x, A_z = sigma_z only");

    m.def(
        "h_of_s",
        [](const QuantumModelSpec& model, const Eigen::Ref<const Eigen::MatrixXd>& spins) {
            return dense(h_of_s(model, spins_from(spins)).matrix());
        },
        py::arg("model"), py::arg("spins"));

    m.def(
        "eigendecompose",
        [](const Eigen::MatrixXcd& h) {
            const AdiabaticFrame f = eigendecompose(HermitianOperator(CMatrix(h)));
            return py::make_tuple(Eigen::VectorXd(f.energies), dense(f.states));
        },
        py::arg("h"), "ascending energies and eigenvector columns (largest component real positive)");

    m.def(
        "coupling_offdiagonal",
        [](const QuantumModelSpec& model, const Eigen::Ref<const Eigen::MatrixXd>& spins) {
            const SpinConfiguration c = spins_from(spins);
            return tensor_to_array(coupling_offdiagonal(eigendecompose(h_of_s(model, c)), model));
        },
        py::arg("model"), py::arg("spins"), "d[i, I, a, b] = <a|d/dS_iI|b>, Hellmann-Feynman form");

    m.def(
        "coupling_diagonal",
        [](const QuantumModelSpec& model, const Eigen::Ref<const Eigen::MatrixXd>& spins, double step) {
            const GeometricPhaseRates p = coupling_diagonal(model, spins_from(spins), step);
            Eigen::MatrixXd out(p.n_spins() * 3, p.dim());
            for (std::size_t i = 0; i < p.n_spins(); ++i)
                for (int axis = 0; axis < 3; ++axis)
                    for (int a = 0; a < p.dim(); ++a) out(3 * i + axis, a) = p.at(i, axis, a);
            return py::make_tuple(out, p.max_residual());
        },
        py::arg("model"), py::arg("spins"), py::arg("step") = kDiagonalStep,
        "geometric phase rates phi[3 i + I, a] and max |Re d_aa|");

    m.def(
        "bath_energy",
        [](const Eigen::Ref<const Eigen::MatrixXd>& spins, const Vec3& field, const std::optional<Eigen::MatrixXd>& exchange) {
            const SpinConfiguration c = spins_from(spins);
            return bath_energy(c, bath_from(field, c.size(), exchange));
        },
        py::arg("spins"), py::arg("field"), py::arg("exchange") = py::none());

    m.def(
        "precess",
        [](const Eigen::Ref<const Eigen::MatrixXd>& spins, const Vec3& field, const std::optional<Eigen::MatrixXd>& exchange,
           double dt, std::size_t n_steps) {
            SpinConfiguration c = spins_from(spins);
            const auto grad = bath_gradient_fn(bath_from(field, c.size(), exchange));
            {
                py::gil_scoped_release release;
                for (std::size_t k = 0; k < n_steps; ++k) c = precession_step(c, grad, dt);
            }
            return spins_to(c);
        },
        py::arg("spins"), py::arg("field"), py::arg("exchange") = py::none(), py::arg("dt"), py::arg("n_steps"),
        "exact-rotation splitting under H_SB");

    m.def(
        "sample_initial",
        [](std::size_t n_traj, std::uint64_t seed, std::size_t n_spins, const Vec3& field, std::optional<double> beta,
           double spin_length, const std::optional<Eigen::MatrixXd>& exchange) {
            EnsembleSpec e;
            e.n_traj = n_traj;
            e.seed = seed;
            e.spin_length = spin_length;
            if (beta) {
                e.init = InitialDistribution::Thermal;
                e.beta = *beta;
            }
            const BathSpec bath = bath_from(field, n_spins, exchange);
            py::array_t<double> out({static_cast<py::ssize_t>(n_traj), static_cast<py::ssize_t>(n_spins), py::ssize_t{3}});
            auto r = out.mutable_unchecked<3>();
            for (std::size_t k = 0; k < n_traj; ++k) {
                const SpinConfiguration c = sample_point(e, bath, n_spins, k);
                for (std::size_t i = 0; i < n_spins; ++i)
                    for (int axis = 0; axis < 3; ++axis) r(k, i, axis) = c[i][axis];
            }
            return out;
        },
        py::arg("n_traj"), py::arg("seed"), py::arg("n_spins"), py::arg("field"), py::arg("beta") = py::none(),
        py::arg("spin_length") = 1.0, py::arg("exchange") = py::none(),
        "uniform-sphere points, or thermal (Metropolis) when beta is given");

    m.def(
        "cone_loop",
        [](double theta, std::size_t n_steps, std::size_t profile_points) {
            const ConeLoopResult r = run_cone_loop(theta, n_steps, profile_points);
            py::dict d;
            d["theta"] = r.theta;
            d["n_steps"] = r.n_steps;
            d["phase"] = r.phase;
            d["analytic"] = r.analytic;
            d["error"] = r.error;
            d["dynamical_phase"] = r.dynamical_phase;
            d["modulus_error"] = r.modulus_error;
            d["times"] = r.times;
            d["profile"] = r.profile;
            return d;
        },
        py::arg("theta"), py::arg("n_steps") = 10000, py::arg("profile_points") = 64);

    m.def(
        "invariant_checks",
        [](std::uint64_t seed, std::size_t points, bool inject_fault) {
            CheckOptions o;
            o.seed = seed;
            o.points = points;
            o.perturb_couplings = inject_fault;
            py::list out;
            for (const auto& r : run_invariant_checks(o)) {
                py::dict d;
                d["name"] = r.name;
                d["residual"] = r.residual;
                d["tolerance"] = r.tolerance;
                d["passed"] = r.passed;
                out.append(d);
            }
            return out;
        },
        py::arg("seed") = CheckOptions{}.seed, py::arg("points") = CheckOptions{}.points, py::arg("inject_fault") = false);

    m.def(
        "simulate",
        [](const std::string& config_json, std::optional<std::uint64_t> seed, unsigned workers) {
            RunConfig c = parse_config_text(config_json);
            if (seed) c.ensemble.seed = *seed;
            const ObservableRegistry reg = c.registry();
            ObservableSeries s;
            {
                py::gil_scoped_release release;
                s = run_ensemble(c.ensemble, c.model, reg, workers);
            }
            const auto nt = static_cast<py::ssize_t>(s.times.size());
            const py::ssize_t n = s.dim;
            py::array_t<Complex> rho({nt, n, n}), err({nt, n, n});
            auto rr = rho.mutable_unchecked<3>();
            auto re = err.mutable_unchecked<3>();
            for (py::ssize_t t = 0; t < nt; ++t)
                for (py::ssize_t a = 0; a < n; ++a)
                    for (py::ssize_t b = 0; b < n; ++b) {
                        rr(t, a, b) = s.rho[t](a, b);
                        re(t, a, b) = s.rho_stderr[t](a, b);
                    }
            py::dict obs;
            for (std::size_t o = 0; o < s.names.size(); ++o)
                obs[py::str(s.names[o])] = py::make_tuple(s.values[o], s.stderrs[o]);
            py::dict d;
            d["times"] = s.times;
            d["rho"] = rho;
            d["rho_stderr"] = err;
            d["observables"] = obs;
            d["n_used"] = s.n_used;
            d["n_dropped"] = s.n_dropped;
            d["max_modulus_error"] = s.max_modulus_error;
            return d;
        },
        py::arg("config_json"), py::arg("seed") = py::none(), py::arg("workers") = 1u,
        "run an ensemble from a JSON config string; returns times, rho, rho_stderr, observables");
}
