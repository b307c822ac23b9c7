#pragma once

// Run configuration: a JSON document whose sections mirror RunConfig.
//
//   {
//     "task": "eigenscan" | "spectrum" | "g2" | "imbalance",
//     "model":       { "k", "delta" | "delta_grid", "j_override", "include_quadratic",
//                      "fock_dims", "obrien_normalization", "hamiltonian" },
//     "dissipation": { "kappa1", "kappa2", "gamma", "gamma_phi", "n_th" },
//     "numerics":    { "tau_max", "n_samples", "times", "tolerances", "correlation_ordering",
//                      "g2_normalization", "g2_reference", "initial_state", "eigen_count",
//                      "spectrum_mode", "propagation" },
//     "output":      { "path", "precision" },
//     "notes":       { free-form, echoed into the manifest }
//   }
//
// A grid is either an explicit array or {"start", "stop", "count"} (inclusive,
// evenly spaced). Unknown keys are rejected so typos cannot pass silently.

#include "json.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jtcqed/analysis.hpp"
#include "jtcqed/dynamics.hpp"
#include "jtcqed/errors.hpp"

namespace jtcqed::cli {

using json = nlohmann::ordered_json;

/// Malformed or inconsistent configuration. Maps to the usage-error exit code.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class Task { eigenscan, spectrum, g2, imbalance };
enum class HamiltonianKind { dimensionless, effective };

struct InitialState {
    std::vector<int> fock{1, 0};
    int qubit_level = 0;  ///< 0 excited, 1 ground
    bool steady = false;  ///< start from the stationary state instead
};

struct ModelConfig {
    double k = 0.0;
    std::vector<double> deltas;  ///< one entry for a scalar delta
    bool delta_is_grid = false;
    std::optional<double> j_override{};
    bool include_quadratic = true;
    std::vector<int> fock_dims{5, 5};
    bool obrien_normalization = false;
    HamiltonianKind hamiltonian = HamiltonianKind::dimensionless;
};

struct NumericsConfig {
    double tau_max = 16384.0;
    std::size_t n_samples = 16384;
    std::vector<double> times;
    Tolerances tolerances{};
    CorrelationOrdering correlation_ordering = CorrelationOrdering::emission;
    G2Normalization g2_normalization = G2Normalization::standard;
    ReferenceTime g2_reference{};
    InitialState initial_state{};
    int eigen_count = 5;
    SpectrumMode spectrum_mode = SpectrumMode::privileged;
    PropagationMethod propagation = PropagationMethod::adaptive;
};

struct OutputConfig {
    std::string path;
    int precision = 12;
};

struct RunConfig {
    Task task = Task::eigenscan;
    ModelConfig model{};
    DissipationParams dissipation{};
    NumericsConfig numerics{};
    OutputConfig output{};
    json notes = json::object();
};

inline std::string to_string(Task t) {
    switch (t) {
        case Task::eigenscan: return "eigenscan";
        case Task::spectrum: return "spectrum";
        case Task::g2: return "g2";
        case Task::imbalance: return "imbalance";
    }
    return "?";
}

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError("'" + where + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError("'" + where + "' must be finite");
    return v;
}

inline bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError("'" + where + "' must be true or false");
    return j.get<bool>();
}

inline std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError("'" + where + "' must be a string");
    return j.get<std::string>();
}

inline std::vector<double> grid(const json& j, const std::string& where) {
    std::vector<double> out;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    } else if (j.is_object()) {
        reject_unknown(j, where, {"start", "stop", "count"});
        if (!j.contains("start") || !j.contains("stop") || !j.contains("count"))
            throw ConfigError("'" + where + "' range needs start, stop and count");
        const double a = number(j["start"], where + ".start"), b = number(j["stop"], where + ".stop");
        if (!j["count"].is_number_integer() || j["count"].get<long long>() < 0)
            throw ConfigError("'" + where + ".count' must be a nonnegative integer");
        const auto n = static_cast<std::size_t>(j["count"].get<long long>());
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    } else {
        throw ConfigError("'" + where + "' must be an array or a {start, stop, count} range");
    }
    if (out.empty()) throw ConfigError("'" + where + "' is empty");
    return out;
}

template <class E>
E choice(const json& j, const std::string& where, std::initializer_list<std::pair<const char*, E>> options) {
    const std::string s = text(j, where);
    std::string names;
    for (const auto& [name, value] : options) {
        if (s == name) return value;
        names += names.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError("'" + where + "' must be one of: " + names);
}

inline std::vector<int> int_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError("'" + where + "' must be an array of integers");
    std::vector<int> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ConfigError("'" + where + "' must be an array of integers");
        out.push_back(v.get<int>());
    }
    return out;
}

inline void strictly_increasing(const std::vector<double>& v, const std::string& where) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) throw ConfigError("'" + where + "' must be strictly increasing");
}

}  // namespace detail

/// Parses and validates; every failure is a ConfigError.
inline RunConfig parse_config(const json& j) {
    using namespace detail;
    reject_unknown(j, "config", {"task", "model", "dissipation", "numerics", "output", "notes"});
    RunConfig c;

    if (!j.contains("task")) throw ConfigError("missing 'task'");
    c.task = choice<Task>(j["task"], "task",
                          {{"eigenscan", Task::eigenscan},
                           {"spectrum", Task::spectrum},
                           {"g2", Task::g2},
                           {"imbalance", Task::imbalance}});

    if (!j.contains("model")) throw ConfigError("missing 'model'");
    const json& m = j["model"];
    reject_unknown(m, "model", {"k", "delta", "delta_grid", "j_override", "include_quadratic", "fock_dims",
                                "obrien_normalization", "hamiltonian"});
    if (!m.contains("k")) throw ConfigError("missing 'model.k'");
    c.model.k = number(m["k"], "model.k");
    if (m.contains("delta") == m.contains("delta_grid"))
        throw ConfigError("exactly one of 'model.delta' and 'model.delta_grid' is required");
    if (m.contains("delta")) {
        c.model.deltas = {number(m["delta"], "model.delta")};
    } else {
        c.model.deltas = grid(m["delta_grid"], "model.delta_grid");
        c.model.delta_is_grid = true;
    }
    if (m.contains("j_override") && !m["j_override"].is_null())
        c.model.j_override = number(m["j_override"], "model.j_override");
    if (m.contains("include_quadratic")) c.model.include_quadratic = boolean(m["include_quadratic"], "model.include_quadratic");
    if (m.contains("fock_dims")) c.model.fock_dims = int_list(m["fock_dims"], "model.fock_dims");
    if (c.model.fock_dims.size() != 2) throw ConfigError("'model.fock_dims' must list two truncations");
    for (int d : c.model.fock_dims)
        if (d < 2) throw ConfigError("'model.fock_dims' entries must be >= 2");
    if (m.contains("obrien_normalization"))
        c.model.obrien_normalization = boolean(m["obrien_normalization"], "model.obrien_normalization");
    if (m.contains("hamiltonian"))
        c.model.hamiltonian = choice<HamiltonianKind>(
            m["hamiltonian"], "model.hamiltonian",
            {{"dimensionless", HamiltonianKind::dimensionless}, {"effective", HamiltonianKind::effective}});

    if (j.contains("dissipation")) {
        const json& d = j["dissipation"];
        reject_unknown(d, "dissipation", {"kappa1", "kappa2", "gamma", "gamma_phi", "n_th"});
        if (d.contains("kappa1")) c.dissipation.kappa1 = number(d["kappa1"], "dissipation.kappa1");
        if (d.contains("kappa2")) c.dissipation.kappa2 = number(d["kappa2"], "dissipation.kappa2");
        if (d.contains("gamma")) c.dissipation.gamma = number(d["gamma"], "dissipation.gamma");
        if (d.contains("gamma_phi")) c.dissipation.gamma_phi = number(d["gamma_phi"], "dissipation.gamma_phi");
        if (d.contains("n_th")) c.dissipation.n_th = number(d["n_th"], "dissipation.n_th");
        try {
            c.dissipation.validate();
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }

    NumericsConfig& nu = c.numerics;
    if (j.contains("numerics")) {
        const json& n = j["numerics"];
        reject_unknown(n, "numerics",
                       {"tau_max", "n_samples", "times", "tolerances", "correlation_ordering", "g2_normalization",
                        "g2_reference", "initial_state", "eigen_count", "spectrum_mode", "propagation"});
        if (n.contains("tau_max")) nu.tau_max = number(n["tau_max"], "numerics.tau_max");
        if (n.contains("n_samples")) {
            if (!n["n_samples"].is_number_integer() || n["n_samples"].get<long long>() < 2)
                throw ConfigError("'numerics.n_samples' must be an integer >= 2");
            nu.n_samples = static_cast<std::size_t>(n["n_samples"].get<long long>());
        }
        if (n.contains("times")) nu.times = grid(n["times"], "numerics.times");
        if (n.contains("tolerances")) {
            const json& t = n["tolerances"];
            reject_unknown(t, "numerics.tolerances", {"rtol", "atol"});
            if (t.contains("rtol")) nu.tolerances.rtol = number(t["rtol"], "numerics.tolerances.rtol");
            if (t.contains("atol")) nu.tolerances.atol = number(t["atol"], "numerics.tolerances.atol");
            if (!(nu.tolerances.rtol > 0.0) || !(nu.tolerances.atol > 0.0))
                throw ConfigError("tolerances must be positive");
        }
        if (n.contains("correlation_ordering"))
            nu.correlation_ordering = choice<CorrelationOrdering>(
                n["correlation_ordering"], "numerics.correlation_ordering",
                {{"emission", CorrelationOrdering::emission}, {"as_printed", CorrelationOrdering::as_printed}});
        if (n.contains("g2_normalization"))
            nu.g2_normalization = choice<G2Normalization>(
                n["g2_normalization"], "numerics.g2_normalization",
                {{"standard", G2Normalization::standard}, {"verbatim", G2Normalization::verbatim}});
        if (n.contains("g2_reference")) {
            const json& r = n["g2_reference"];
            if (r.is_string()) {
                if (r.get<std::string>() != "settled")
                    throw ConfigError("'numerics.g2_reference' must be \"settled\" or a time");
                nu.g2_reference = ReferenceTime::settled_default();
            } else {
                const double t = number(r, "numerics.g2_reference");
                if (t < 0.0) throw ConfigError("'numerics.g2_reference' must be >= 0");
                nu.g2_reference = ReferenceTime::at(t);
            }
        }
        if (n.contains("initial_state")) {
            const json& s = n["initial_state"];
            if (s.is_string()) {
                if (s.get<std::string>() != "steady")
                    throw ConfigError("'numerics.initial_state' must be \"steady\" or {fock, qubit}");
                nu.initial_state.steady = true;
            } else {
                reject_unknown(s, "numerics.initial_state", {"fock", "qubit"});
                if (s.contains("fock")) nu.initial_state.fock = int_list(s["fock"], "numerics.initial_state.fock");
                if (s.contains("qubit"))
                    nu.initial_state.qubit_level =
                        choice<int>(s["qubit"], "numerics.initial_state.qubit", {{"e", 0}, {"g", 1}});
            }
        }
        if (n.contains("eigen_count")) {
            if (!n["eigen_count"].is_number_integer()) throw ConfigError("'numerics.eigen_count' must be an integer");
            nu.eigen_count = n["eigen_count"].get<int>();
        }
        if (n.contains("spectrum_mode"))
            nu.spectrum_mode = choice<SpectrumMode>(
                n["spectrum_mode"], "numerics.spectrum_mode",
                {{"privileged", SpectrumMode::privileged}, {"disadvantaged", SpectrumMode::disadvantaged}});
        if (n.contains("propagation"))
            nu.propagation = choice<PropagationMethod>(
                n["propagation"], "numerics.propagation",
                {{"adaptive", PropagationMethod::adaptive}, {"exact", PropagationMethod::exact}});
    }

    if (!j.contains("output")) throw ConfigError("missing 'output'");
    const json& o = j["output"];
    reject_unknown(o, "output", {"path", "precision"});
    if (!o.contains("path")) throw ConfigError("missing 'output.path'");
    c.output.path = text(o["path"], "output.path");
    if (c.output.path.empty()) throw ConfigError("'output.path' is empty");
    if (o.contains("precision")) {
        if (!o["precision"].is_number_integer()) throw ConfigError("'output.precision' must be an integer");
        c.output.precision = o["precision"].get<int>();
        if (c.output.precision < 1 || c.output.precision > 17)
            throw ConfigError("'output.precision' must lie in [1, 17]");
    }
    if (j.contains("notes")) c.notes = j["notes"];

    // Task-specific requirements.
    const int total = c.model.fock_dims[0] * c.model.fock_dims[1] * 2;
    switch (c.task) {
        case Task::eigenscan:
            if (nu.eigen_count < 1 || nu.eigen_count > total)
                throw ConfigError("'numerics.eigen_count' must lie in [1, " + std::to_string(total) + "]");
            break;
        case Task::spectrum:
            if (!(nu.tau_max > 0.0)) throw ConfigError("'numerics.tau_max' must be positive");
            if ((nu.n_samples & (nu.n_samples - 1)) != 0) throw ConfigError("'numerics.n_samples' must be a power of two");
            break;
        case Task::g2:
        case Task::imbalance: {
            if (nu.times.empty()) throw ConfigError("'numerics.times' is required for " + to_string(c.task));
            strictly_increasing(nu.times, "numerics.times");
            if (nu.times.front() < 0.0) throw ConfigError("'numerics.times' must start at >= 0");
            if (c.task == Task::g2 && nu.times.front() != 0.0)
                throw ConfigError("'numerics.times' for g2 must start at 0");
            if (!nu.initial_state.steady) {
                const auto& f = nu.initial_state.fock;
                if (f.size() != 2) throw ConfigError("'numerics.initial_state.fock' must list two occupations");
                for (int i = 0; i < 2; ++i)
                    if (f[i] < 0 || f[i] >= c.model.fock_dims[i])
                        throw ConfigError("'numerics.initial_state.fock' outside the truncation");
            }
            break;
        }
    }
    if (c.model.hamiltonian == HamiltonianKind::effective && c.model.k <= 0.0)
        throw ConfigError("the effective Hamiltonian needs k > 0");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

/// Fully resolved configuration, every default made explicit.
inline json to_json(const RunConfig& c) {
    json j;
    j["task"] = to_string(c.task);
    json m;
    m["k"] = c.model.k;
    if (c.model.delta_is_grid)
        m["delta_grid"] = c.model.deltas;
    else
        m["delta"] = c.model.deltas.front();
    m["j_override"] = c.model.j_override ? json(*c.model.j_override) : json(nullptr);
    m["include_quadratic"] = c.model.include_quadratic;
    m["fock_dims"] = c.model.fock_dims;
    m["obrien_normalization"] = c.model.obrien_normalization;
    m["hamiltonian"] = c.model.hamiltonian == HamiltonianKind::dimensionless ? "dimensionless" : "effective";
    j["model"] = m;
    j["dissipation"] = {{"kappa1", c.dissipation.kappa1},
                        {"kappa2", c.dissipation.kappa2},
                        {"gamma", c.dissipation.gamma},
                        {"gamma_phi", c.dissipation.gamma_phi},
                        {"n_th", c.dissipation.n_th}};
    const NumericsConfig& nu = c.numerics;
    json n;
    n["tau_max"] = nu.tau_max;
    n["n_samples"] = nu.n_samples;
    if (!nu.times.empty()) n["times"] = nu.times;
    n["tolerances"] = {{"rtol", nu.tolerances.rtol}, {"atol", nu.tolerances.atol}};
    n["correlation_ordering"] = nu.correlation_ordering == CorrelationOrdering::emission ? "emission" : "as_printed";
    n["g2_normalization"] = nu.g2_normalization == G2Normalization::standard ? "standard" : "verbatim";
    n["g2_reference"] = nu.g2_reference.kind == ReferenceTime::Kind::settled ? json("settled") : json(nu.g2_reference.t);
    if (nu.initial_state.steady)
        n["initial_state"] = "steady";
    else
        n["initial_state"] = {{"fock", nu.initial_state.fock}, {"qubit", nu.initial_state.qubit_level == 0 ? "e" : "g"}};
    n["eigen_count"] = nu.eigen_count;
    n["spectrum_mode"] = nu.spectrum_mode == SpectrumMode::privileged ? "privileged" : "disadvantaged";
    n["propagation"] = nu.propagation == PropagationMethod::adaptive ? "adaptive" : "exact";
    j["numerics"] = n;
    j["output"] = {{"path", c.output.path}, {"precision", c.output.precision}};
    j["notes"] = c.notes;
    return j;
}

}  // namespace jtcqed::cli
