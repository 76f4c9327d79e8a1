#include "spinbath/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace spinbath {

using nlohmann::json;

namespace {

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

std::string indexed(const std::string& parent, std::size_t i) {
    return parent + "[" + std::to_string(i) + "]";
}

const json& require(const json& obj, const std::string& parent, const std::string& key) {
    if (!obj.is_object()) throw ConfigError(parent, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(join(parent, key), "missing required field");
    return *it;
}

const json* optional(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
}

std::uint64_t unsigned_integer(const json& j, const std::string& field) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw ConfigError(field, "expected a non-negative integer");
}

std::string string(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field, "expected a string");
    return j.get<std::string>();
}

Vec3 vec3(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(field, "expected [x, y, z]");
    return Vec3(number(j[0], indexed(field, 0)), number(j[1], indexed(field, 1)), number(j[2], indexed(field, 2)));
}

Complex complex_entry(const json& j, const std::string& field) {
    if (j.is_number()) return Complex(number(j, field), 0.0);
    if (j.is_array() && j.size() == 2) return Complex(number(j[0], indexed(field, 0)), number(j[1], indexed(field, 1)));
    throw ConfigError(field, "expected [re, im] or a real number");
}

HermitianOperator hermitian(const json& j, const std::string& field) {
    const CMatrix m = matrix_from_json(j, field);
    try {
        return HermitianOperator(m);
    } catch (const Error& e) {
        throw ConfigError(field, e.what());
    }
}

HermitianOperator preset_operator(const std::string& name, int dim, const std::string& field) {
    if (name == "identity") return HermitianOperator::identity(dim);
    if (dim != 2) throw ConfigError(field, "Pauli presets need a two-level model");
    if (name == "sigma_x") return pauli_x();
    if (name == "sigma_y") return pauli_y();
    if (name == "sigma_z") return pauli_z();
    throw ConfigError(field, "unknown operator preset '" + name + "'");
}

QuantumModelSpec parse_model(const json& j) {
    const std::string f = "model";
    if (!j.is_object()) throw ConfigError(f, "expected an object");
    if (const json* preset = optional(j, "preset")) {
        const std::string name = string(*preset, "model.preset");
        if (name != "decoupled_rabi" && name != "qubit_isotropic" && name != "qubit_dephasing")
            throw ConfigError("model.preset", "unknown preset '" + name + "'");
        const double delta = number(require(j, f, "delta"), "model.delta");
        const std::uint64_t n = unsigned_integer(require(j, f, "n_spins"), "model.n_spins");
        if (n < 1) throw ConfigError("model.n_spins", "must be at least 1");
        if (name == "decoupled_rabi") return qubit_isotropic(delta, 0.0, n);
        const double gamma = number(require(j, f, "gamma"), "model.gamma");
        if (name == "qubit_isotropic") return qubit_isotropic(delta, gamma, n);
        return qubit_dephasing(delta, gamma, n);
    }
    QuantumModelSpec spec;
    spec.h_sub = hermitian(require(j, f, "h_sub"), "model.h_sub");
    const json& cs = require(j, f, "couplings");
    if (!cs.is_array() || cs.empty()) throw ConfigError("model.couplings", "expected a non-empty list");
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string ci = indexed("model.couplings", i);
        SpinCoupling c;
        c.gamma = number(require(cs[i], ci, "gamma"), join(ci, "gamma"));
        const json& ops = require(cs[i], ci, "ops");
        if (!ops.is_array() || ops.size() != 3) throw ConfigError(join(ci, "ops"), "expected [Ax, Ay, Az]");
        for (int axis = 0; axis < 3; ++axis)
            c.axis_ops[axis] = hermitian(ops[axis], indexed(join(ci, "ops"), axis));
        spec.couplings.push_back(c);
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        throw ConfigError("model", e.what());
    }
    return spec;
}

BathSpec parse_bath(const json& j, std::size_t n_spins) {
    BathSpec bath = BathSpec::zeeman(vec3(require(j, "bath", "field"), "bath.field"), n_spins);
    if (const json* ex = optional(j, "exchange")) {
        if (!ex->is_array() || ex->size() != n_spins)
            throw ConfigError("bath.exchange", "expected " + std::to_string(n_spins) + " rows");
        for (std::size_t r = 0; r < n_spins; ++r) {
            const json& row = (*ex)[r];
            const std::string fr = indexed("bath.exchange", r);
            if (!row.is_array() || row.size() != n_spins)
                throw ConfigError(fr, "expected " + std::to_string(n_spins) + " entries");
            for (std::size_t c = 0; c < n_spins; ++c) bath.exchange(r, c) = number(row[c], indexed(fr, c));
        }
    }
    try {
        bath.validate(n_spins);
    } catch (const Error& e) {
        throw ConfigError("bath.exchange", e.what());
    }
    return bath;
}

EnsembleSpec parse_ensemble(const json& j, int dim) {
    const std::string f = "ensemble";
    EnsembleSpec e;
    e.n_traj = unsigned_integer(require(j, f, "n_traj"), "ensemble.n_traj");
    e.seed = unsigned_integer(require(j, f, "seed"), "ensemble.seed");
    const std::string init = string(require(j, f, "init"), "ensemble.init");
    if (init == "uniform_sphere") {
        e.init = InitialDistribution::UniformSphere;
    } else if (init == "thermal") {
        e.init = InitialDistribution::Thermal;
        e.beta = number(require(j, f, "beta"), "ensemble.beta");
    } else {
        throw ConfigError("ensemble.init", "expected 'uniform_sphere' or 'thermal'");
    }
    if (const json* len = optional(j, "spin_length")) e.spin_length = number(*len, "ensemble.spin_length");
    e.rho_init = hermitian(require(j, f, "rho_init"), "ensemble.rho_init");
    if (e.rho_init.dim() != dim)
        throw ConfigError("ensemble.rho_init", "dimension " + std::to_string(e.rho_init.dim()) +
                                                   " does not match the model dimension " + std::to_string(dim));
    e.dt = number(require(j, f, "dt"), "ensemble.dt");
    e.n_steps = unsigned_integer(require(j, f, "n_steps"), "ensemble.n_steps");
    if (const json* every = optional(j, "record_every")) e.record_every = unsigned_integer(*every, "ensemble.record_every");
    // Field-specific versions of EnsembleSpec::validate.
    if (e.n_traj < 1) throw ConfigError("ensemble.n_traj", "must be at least 1");
    if (!(e.dt > 0.0) || !std::isfinite(e.dt)) throw ConfigError("ensemble.dt", "must be positive");
    if (e.record_every < 1) throw ConfigError("ensemble.record_every", "must be at least 1");
    if (!(e.beta >= 0.0)) throw ConfigError("ensemble.beta", "must be non-negative");
    if (!(e.spin_length > 0.0) || !std::isfinite(e.spin_length)) throw ConfigError("ensemble.spin_length", "must be positive");
    try {
        e.validate();
    } catch (const Error& err) {
        throw ConfigError("ensemble.rho_init", err.what());
    }
    return e;
}

std::vector<ObservableSpec> parse_observables(const json& j, int dim) {
    std::vector<ObservableSpec> out;
    if (!j.is_array()) throw ConfigError("observables", "expected a list");
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string f = indexed("observables", k);
        ObservableSpec o;
        o.name = string(require(j[k], f, "name"), join(f, "name"));
        if (o.name.empty() || o.name.find_first_of(",\n\r\"") != std::string::npos)
            throw ConfigError(join(f, "name"), "must be non-empty without commas, quotes or newlines");
        if (const json* kind = optional(j[k], "kind"); kind && string(*kind, join(f, "kind")) == "energy") {
            o.energy = true;
        } else if (kind && string(*kind, join(f, "kind")) != "operator") {
            throw ConfigError(join(f, "kind"), "expected 'operator' or 'energy'");
        } else if (const json* preset = optional(j[k], "preset")) {
            o.op = preset_operator(string(*preset, join(f, "preset")), dim, join(f, "preset"));
        } else {
            o.op = hermitian(require(j[k], f, "operator"), join(f, "operator"));
            if (o.op.dim() != dim) throw ConfigError(join(f, "operator"), "dimension does not match the model");
        }
        for (const auto& prev : out)
            if (prev.name == o.name) throw ConfigError(join(f, "name"), "duplicate observable '" + o.name + "'");
        out.push_back(std::move(o));
    }
    return out;
}

OutputSpec parse_outputs(const json& j) {
    OutputSpec o;
    if (const json* dir = optional(j, "directory")) o.directory = string(*dir, "outputs.directory");
    if (const json* formats = optional(j, "formats")) {
        if (!formats->is_array()) throw ConfigError("outputs.formats", "expected a list");
        o.csv = o.json = false;
        for (std::size_t k = 0; k < formats->size(); ++k) {
            const std::string name = string((*formats)[k], indexed("outputs.formats", k));
            if (name == "csv") o.csv = true;
            else if (name == "json") o.json = true;
            else throw ConfigError(indexed("outputs.formats", k), "expected 'csv' or 'json'");
        }
    }
    return o;
}

}  // namespace

json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

CMatrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty list of rows");
    const std::size_t n = j.size();
    if (n > static_cast<std::size_t>(kMaxLevels))
        throw ConfigError(field, "at most " + std::to_string(kMaxLevels) + " levels are supported");
    CMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::string fr = indexed(field, r);
        if (!j[r].is_array() || j[r].size() != n) throw ConfigError(fr, "expected " + std::to_string(n) + " entries");
        for (std::size_t c = 0; c < n; ++c) m(r, c) = complex_entry(j[r][c], indexed(fr, c));
    }
    return m;
}

ObservableRegistry RunConfig::registry() const {
    ObservableRegistry reg;
    for (const auto& o : observables) {
        if (o.energy) reg.add_energy(o.name);
        else reg.add(o.name, o.op);
    }
    return reg;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    const auto& qa = a.model.quantum;
    const auto& qb = b.model.quantum;
    if (!(qa.h_sub == qb.h_sub) || qa.couplings.size() != qb.couplings.size()) return false;
    for (std::size_t i = 0; i < qa.couplings.size(); ++i) {
        if (qa.couplings[i].gamma != qb.couplings[i].gamma) return false;
        for (int axis = 0; axis < 3; ++axis)
            if (!(qa.couplings[i].axis_ops[axis] == qb.couplings[i].axis_ops[axis])) return false;
    }
    if (a.model.bath.field != b.model.bath.field || a.model.bath.exchange != b.model.bath.exchange) return false;
    const auto& ea = a.ensemble;
    const auto& eb = b.ensemble;
    return a.schema_version == b.schema_version && ea.n_traj == eb.n_traj && ea.seed == eb.seed &&
           ea.init == eb.init && ea.beta == eb.beta && ea.spin_length == eb.spin_length &&
           ea.rho_init == eb.rho_init && ea.dt == eb.dt && ea.n_steps == eb.n_steps &&
           ea.record_every == eb.record_every && a.observables == b.observables && a.outputs == b.outputs;
}

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
    RunConfig c;
    const json& version = require(j, "", "schema_version");
    if (!version.is_number_integer() || version.get<int>() != kConfigSchemaVersion)
        throw ConfigError("schema_version", "unsupported, expected " + std::to_string(kConfigSchemaVersion));
    c.model.quantum = parse_model(require(j, "", "model"));
    c.model.bath = parse_bath(require(j, "", "bath"), c.model.quantum.n_spins());
    c.ensemble = parse_ensemble(require(j, "", "ensemble"), c.model.dim());
    if (const json* obs = optional(j, "observables")) c.observables = parse_observables(*obs, c.model.dim());
    if (const json* out = optional(j, "outputs")) c.outputs = parse_outputs(*out);
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Byte offset -> line:column for the diagnostic.
        const std::size_t at = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at ? at - 1 : 0), '\n');
        const std::size_t bol = text.rfind('\n', at ? at - 1 : 0);
        const std::size_t col = (bol == std::string::npos) ? at : at - bol - 1;
        throw ConfigError("", "JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                                  ": " + e.what());
    }
    return parse_config(j);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

json to_json(const RunConfig& c) {
    json couplings = json::array();
    for (const auto& cp : c.model.quantum.couplings)
        couplings.push_back({{"gamma", cp.gamma},
                             {"ops", {matrix_to_json(cp.axis_ops[0].matrix()), matrix_to_json(cp.axis_ops[1].matrix()),
                                      matrix_to_json(cp.axis_ops[2].matrix())}}});
    const auto& bath = c.model.bath;
    json exchange = json::array();
    for (Eigen::Index r = 0; r < bath.exchange.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index k = 0; k < bath.exchange.cols(); ++k) row.push_back(bath.exchange(r, k));
        exchange.push_back(row);
    }
    const auto& e = c.ensemble;
    json ensemble = {{"n_traj", e.n_traj},
                     {"seed", e.seed},
                     {"init", e.init == InitialDistribution::Thermal ? "thermal" : "uniform_sphere"},
                     {"spin_length", e.spin_length},
                     {"rho_init", matrix_to_json(e.rho_init.matrix())},
                     {"dt", e.dt},
                     {"n_steps", e.n_steps},
                     {"record_every", e.record_every}};
    if (e.init == InitialDistribution::Thermal) ensemble["beta"] = e.beta;
    json observables = json::array();
    for (const auto& o : c.observables) {
        if (o.energy) observables.push_back({{"name", o.name}, {"kind", "energy"}});
        else observables.push_back({{"name", o.name}, {"operator", matrix_to_json(o.op.matrix())}});
    }
    json formats = json::array();
    if (c.outputs.csv) formats.push_back("csv");
    if (c.outputs.json) formats.push_back("json");
    return {{"schema_version", c.schema_version},
            {"model", {{"h_sub", matrix_to_json(c.model.quantum.h_sub.matrix())}, {"couplings", couplings}}},
            {"bath", {{"field", {bath.field.x(), bath.field.y(), bath.field.z()}}, {"exchange", exchange}}},
            {"ensemble", ensemble},
            {"observables", observables},
            {"outputs", {{"directory", c.outputs.directory}, {"formats", formats}}}};
}

SpinConfiguration parse_spins(const std::string& text) {
    std::vector<Vec3> spins;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(';', start), text.size());
        const std::string item = text.substr(start, end - start);
        Vec3 v;
        std::size_t pos = 0;
        for (int axis = 0; axis < 3; ++axis) {
            while (pos < item.size() && item[pos] == ' ') ++pos;
            double x = 0.0;
            const auto [ptr, ec] = std::from_chars(item.data() + pos, item.data() + item.size(), x);
            if (ec != std::errc() || !std::isfinite(x))
                throw ConfigError("spins", "malformed spin " + std::to_string(spins.size()) + ": '" + item + "'");
            pos = static_cast<std::size_t>(ptr - item.data());
            while (pos < item.size() && item[pos] == ' ') ++pos;
            if (axis < 2) {
                if (pos >= item.size() || item[pos] != ',')
                    throw ConfigError("spins", "malformed spin " + std::to_string(spins.size()) + ": '" + item + "'");
                ++pos;
            }
            v[axis] = x;
        }
        if (pos != item.size())
            throw ConfigError("spins", "malformed spin " + std::to_string(spins.size()) + ": '" + item + "'");
        spins.push_back(v);
        start = end + 1;
    }
    try {
        return SpinConfiguration(std::move(spins));
    } catch (const Error& e) {
        throw ConfigError("spins", e.what());
    }
}

}  // namespace spinbath
