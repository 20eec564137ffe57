// config.hpp: Strict JSON run configuration.
//
// Every object rejects keys it does not know. All frequencies are rad/ns; a
// top-level "units" key, if present, must be "rad_per_ns".

#pragma once

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ccspin/analysis.hpp"
#include "ccspin/design.hpp"
#include "ccspin/errors.hpp"
#include "ccspin/evolve.hpp"
#include "ccspin/params.hpp"

namespace ccspin {

using json = nlohmann::json;

struct SystemBlock {
    std::size_t n_sites{4};
    bool periodic{true};
    int n_max_a{1}, n_max_b{1};
    std::optional<int> photon_cap;
};

struct ModelBlock {
    bool include_cross_term{true};
    bool include_local_terms{true};
    std::vector<double> field;  // per-site h_j; empty means zero
    bool add_stark_field{false};
    // Direct effective couplings {J1, J2, lambda1, lambda2}; bypasses the derivation from the cavity parameters.
    std::optional<std::array<double, 4>> couplings;
};

struct EvolveBlock {
    std::string model{"full"};  // simulate only: full | effective
    std::optional<double> t_final;
    std::optional<double> exchange_periods;
    double step{0.0};
    double effective_step{0.0};
    Method method{Method::midpoint_exponential};
    std::size_t sample_every{1};
    double max_norm_drift{1e-8};
    bool stroboscopic{true};
    std::size_t sample_periods{1};
};

struct OutputBlock {
    std::string directory{"out"};
    std::string format{"csv"};
};

struct RunConfig {
    SystemBlock system;
    std::variant<MicroParams, ReducedParams> parameters;
    ModelBlock model;
    std::string spins;
    EvolveBlock evolve;
    OutputBlock output;
    double hierarchy_factor{10.0};
    std::optional<std::pair<double, double>> decoherence;  // (Gamma_E, Gamma_C)
    std::vector<double> scan_ratios;
    std::optional<DesignTarget> design;

    bool has_micro() const { return std::holds_alternative<MicroParams>(parameters); }
    ReducedParams reduced() const {
        if (auto m = std::get_if<MicroParams>(&parameters)) return reduce_params(*m);
        return std::get<ReducedParams>(parameters);
    }
    std::optional<MicroParams> micro() const {
        if (auto m = std::get_if<MicroParams>(&parameters)) return *m;
        return std::nullopt;
    }
    EffectiveSpinModel effective_model() const {
        const auto p = reduced();
        auto m = effective_couplings(p, system.periodic);
        if (model.couplings) {
            m.J1 = (*model.couplings)[0], m.J2 = (*model.couplings)[1];
            m.lambda1 = (*model.couplings)[2], m.lambda2 = (*model.couplings)[3];
        }
        if (!model.field.empty()) m.h = model.field;
        if (model.add_stark_field) {
            const double h = stark_field_estimate(p);
            for (auto& x : m.h) x += h;
        }
        return m;
    }
};

namespace detail {

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ValidationError("config: '" + where + "' must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ValidationError("config: unknown key '" + where + "." + it.key() + "'");
}

inline double num(const json& j, const std::string& where, const char* key, double def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ValidationError("config: '" + where + "." + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError("config: '" + where + "." + key + "' must be finite");
    return x;
}

inline double req_num(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) throw ValidationError("config: missing '" + where + "." + key + "'");
    return num(j, where, key, 0.0);
}

inline bool flag(const json& j, const std::string& where, const char* key, bool def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_boolean()) throw ValidationError("config: '" + where + "." + key + "' must be true/false");
    return j.at(key).get<bool>();
}

inline std::size_t count(const json& j, const std::string& where, const char* key, std::size_t def, std::size_t min) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min))
        throw ValidationError("config: '" + where + "." + key + "' must be an integer >= " + std::to_string(min));
    return static_cast<std::size_t>(v.get<long long>());
}

inline std::string text(const json& j, const std::string& where, const char* key, std::string def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_string()) throw ValidationError("config: '" + where + "." + key + "' must be a string");
    return j.at(key).get<std::string>();
}

inline ReducedParams parse_reduced(const json& j, std::size_t n_sites) {
    const std::string w = "parameters.reduced";
    only_keys(j, w,
              {"A1", "A2", "A3", "B1", "B2", "B3", "delta1", "delta2", "delta3", "stark_a", "stark_b", "J_a", "J_b",
               "level_shift_1", "level_shift_2"});
    ReducedParams p;
    p.A1 = num(j, w, "A1", 0);
    p.A2 = num(j, w, "A2", 0);
    p.A3 = num(j, w, "A3", 0);
    p.B1 = num(j, w, "B1", 0);
    p.B2 = num(j, w, "B2", 0);
    p.B3 = num(j, w, "B3", 0);
    p.delta1 = req_num(j, w, "delta1");
    p.delta2 = req_num(j, w, "delta2");
    p.delta3 = num(j, w, "delta3", p.delta1 - p.delta2);
    p.stark_a = num(j, w, "stark_a", 0);
    p.stark_b = num(j, w, "stark_b", 0);
    p.J_a = num(j, w, "J_a", 0);
    p.J_b = num(j, w, "J_b", 0);
    p.level_shift_1 = num(j, w, "level_shift_1", 0);
    p.level_shift_2 = num(j, w, "level_shift_2", 0);
    p.n_sites = n_sites;
    check_reduced(p);
    return p;
}

inline MicroParams parse_micro(const json& j, std::size_t n_sites) {
    const std::string w = "parameters.micro";
    only_keys(j, w,
              {"Omega1", "Omega2", "Omega3", "Omega4", "g_a", "g_b", "delta31", "delta42", "Delta31", "Delta32",
               "Delta41", "Delta42", "J_a", "J_b"});
    MicroParams m;
    m.Omega1 = num(j, w, "Omega1", 0);
    m.Omega2 = num(j, w, "Omega2", 0);
    m.Omega3 = num(j, w, "Omega3", 0);
    m.Omega4 = num(j, w, "Omega4", 0);
    m.g_a = num(j, w, "g_a", 0);
    m.g_b = num(j, w, "g_b", 0);
    m.delta31 = req_num(j, w, "delta31");
    m.delta42 = req_num(j, w, "delta42");
    m.Delta31 = req_num(j, w, "Delta31");
    m.Delta32 = req_num(j, w, "Delta32");
    m.Delta41 = req_num(j, w, "Delta41");
    m.Delta42 = req_num(j, w, "Delta42");
    m.J_a = num(j, w, "J_a", 0);
    m.J_b = num(j, w, "J_b", 0);
    m.n_sites = n_sites;
    reduce_params(m);  // consistency check
    return m;
}

inline DesignTarget parse_design(const json& j) {
    only_keys(j, "design", {"targets", "free", "bounds", "hierarchy_factor", "max_evaluations"});
    DesignTarget d;
    if (!j.contains("targets") || !j.at("targets").is_array() || j.at("targets").empty())
        throw ValidationError("config: 'design.targets' must be a non-empty array");
    for (const auto& t : j.at("targets")) {
        only_keys(t, "design.targets[]", {"name", "value", "weight", "tolerance"});
        const auto name = text(t, "design.targets[]", "name", "");
        const auto kind = parse_target(name);
        if (!kind) throw ValidationError("config: unknown design target '" + name + "'");
        Target tg{*kind, req_num(t, "design.targets[]", "value")};
        tg.weight = num(t, "design.targets[]", "weight", 1.0);
        tg.tolerance = num(t, "design.targets[]", "tolerance", 1e-3);
        if (!(tg.weight > 0) || !(tg.tolerance > 0))
            throw ValidationError("config: design target weight and tolerance must be > 0");
        d.targets.push_back(tg);
    }
    if (!j.contains("free") || !j.at("free").is_array() || j.at("free").empty())
        throw ValidationError("config: 'design.free' must be a non-empty array of parameter names");
    for (const auto& f : j.at("free")) {
        if (!f.is_string()) throw ValidationError("config: 'design.free' entries must be strings");
        d.free.push_back(f.get<std::string>());
    }
    if (j.contains("bounds")) {
        if (!j.at("bounds").is_array()) throw ValidationError("config: 'design.bounds' must be an array");
        for (const auto& b : j.at("bounds")) {
            only_keys(b, "design.bounds[]", {"name", "lo", "hi"});
            d.bounds.push_back({text(b, "design.bounds[]", "name", ""), req_num(b, "design.bounds[]", "lo"),
                                req_num(b, "design.bounds[]", "hi")});
        }
    }
    d.hierarchy_factor = num(j, "design", "hierarchy_factor", 10.0);
    d.max_evaluations = count(j, "design", "max_evaluations", 20000, 30);
    return d;
}

}  // namespace detail

inline RunConfig parse_config(const json& root) {
    using namespace detail;
    only_keys(root, "<root>",
              {"units", "system", "parameters", "model", "initial_state", "evolve", "output", "validity",
               "decoherence", "scan", "design"});
    if (root.contains("units")) {
        if (!root.at("units").is_string() || root.at("units").get<std::string>() != "rad_per_ns")
            throw ValidationError("config: 'units' must be \"rad_per_ns\" (all frequencies are angular, rad/ns)");
    }
    RunConfig c;
    if (root.contains("system")) {
        const auto& s = root.at("system");
        only_keys(s, "system", {"n_sites", "periodic", "n_max_a", "n_max_b", "photon_cap"});
        c.system.n_sites = count(s, "system", "n_sites", 4, 1);
        c.system.periodic = flag(s, "system", "periodic", true);
        c.system.n_max_a = static_cast<int>(count(s, "system", "n_max_a", 1, 0));
        c.system.n_max_b = static_cast<int>(count(s, "system", "n_max_b", 1, 0));
        if (s.contains("photon_cap")) c.system.photon_cap = static_cast<int>(count(s, "system", "photon_cap", 0, 0));
    }
    if (!root.contains("parameters")) throw ValidationError("config: missing 'parameters' block");
    {
        const auto& p = root.at("parameters");
        only_keys(p, "parameters", {"micro", "reduced"});
        const bool mi = p.contains("micro"), re = p.contains("reduced");
        if (mi == re) throw ValidationError("config: 'parameters' needs exactly one of 'micro' or 'reduced'");
        if (mi)
            c.parameters = parse_micro(p.at("micro"), c.system.n_sites);
        else
            c.parameters = parse_reduced(p.at("reduced"), c.system.n_sites);
    }
    if (root.contains("model")) {
        const auto& m = root.at("model");
        only_keys(m, "model", {"include_cross_term", "include_local_terms", "field", "add_stark_field", "couplings"});
        c.model.include_cross_term = flag(m, "model", "include_cross_term", true);
        c.model.include_local_terms = flag(m, "model", "include_local_terms", true);
        c.model.add_stark_field = flag(m, "model", "add_stark_field", false);
        if (m.contains("couplings")) {
            const auto& k = m.at("couplings");
            only_keys(k, "model.couplings", {"J1", "J2", "lambda1", "lambda2"});
            c.model.couplings = std::array<double, 4>{num(k, "model.couplings", "J1", 0.0),
                                                      num(k, "model.couplings", "J2", 0.0),
                                                      num(k, "model.couplings", "lambda1", 0.0),
                                                      num(k, "model.couplings", "lambda2", 0.0)};
        }
        if (m.contains("field")) {
            const auto& f = m.at("field");
            if (f.is_number()) {
                c.model.field.assign(c.system.n_sites, f.get<double>());
            } else if (f.is_array()) {
                for (const auto& x : f) {
                    if (!x.is_number()) throw ValidationError("config: 'model.field' entries must be numbers");
                    c.model.field.push_back(x.get<double>());
                }
                if (c.model.field.size() != c.system.n_sites)
                    throw ValidationError("config: 'model.field' length must equal n_sites");
            } else {
                throw ValidationError("config: 'model.field' must be a number or an array");
            }
            for (double x : c.model.field)
                if (!std::isfinite(x)) throw ValidationError("config: 'model.field' must be finite");
        }
    }
    if (root.contains("initial_state")) {
        const auto& s = root.at("initial_state");
        only_keys(s, "initial_state", {"spins"});
        c.spins = text(s, "initial_state", "spins", "");
    }
    if (c.spins.empty()) c.spins = "1" + std::string(c.system.n_sites - 1, '2');
    if (c.spins.size() != c.system.n_sites)
        throw ValidationError("config: spin pattern length " + std::to_string(c.spins.size()) +
                              " != n_sites " + std::to_string(c.system.n_sites));
    for (char ch : c.spins)
        if (ch != '1' && ch != '2') throw ValidationError("config: spin pattern must use only '1' and '2'");

    if (root.contains("evolve")) {
        const auto& e = root.at("evolve");
        only_keys(e, "evolve",
                  {"model", "t_final", "exchange_periods", "step", "effective_step", "method", "sample_every",
                   "max_norm_drift", "stroboscopic", "sample_periods"});
        c.evolve.model = text(e, "evolve", "model", "full");
        if (c.evolve.model != "full" && c.evolve.model != "effective")
            throw ValidationError("config: 'evolve.model' must be \"full\" or \"effective\"");
        if (e.contains("t_final")) c.evolve.t_final = num(e, "evolve", "t_final", 0);
        if (e.contains("exchange_periods")) c.evolve.exchange_periods = num(e, "evolve", "exchange_periods", 0);
        if (c.evolve.t_final && c.evolve.exchange_periods)
            throw ValidationError("config: give only one of 'evolve.t_final' and 'evolve.exchange_periods'");
        if ((c.evolve.t_final && *c.evolve.t_final < 0) || (c.evolve.exchange_periods && *c.evolve.exchange_periods < 0))
            throw ValidationError("config: evolution time must be >= 0");
        c.evolve.step = num(e, "evolve", "step", 0.0);
        c.evolve.effective_step = num(e, "evolve", "effective_step", 0.0);
        if (c.evolve.step < 0 || c.evolve.effective_step < 0) throw ValidationError("config: steps must be > 0");
        const auto m = text(e, "evolve", "method", "midpoint");
        if (m == "midpoint")
            c.evolve.method = Method::midpoint_exponential;
        else if (m == "rk4")
            c.evolve.method = Method::rk4;
        else
            throw ValidationError("config: 'evolve.method' must be \"midpoint\" or \"rk4\"");
        c.evolve.sample_every = count(e, "evolve", "sample_every", 1, 1);
        c.evolve.max_norm_drift = num(e, "evolve", "max_norm_drift", 1e-8);
        c.evolve.stroboscopic = flag(e, "evolve", "stroboscopic", true);
        c.evolve.sample_periods = count(e, "evolve", "sample_periods", 1, 1);
    }
    if (root.contains("output")) {
        const auto& o = root.at("output");
        only_keys(o, "output", {"directory", "format"});
        c.output.directory = text(o, "output", "directory", "out");
        c.output.format = text(o, "output", "format", "csv");
        if (c.output.format != "csv" && c.output.format != "json")
            throw ValidationError("config: 'output.format' must be \"csv\" or \"json\"");
    }
    if (root.contains("validity")) {
        only_keys(root.at("validity"), "validity", {"hierarchy_factor"});
        c.hierarchy_factor = num(root.at("validity"), "validity", "hierarchy_factor", 10.0);
        if (!(c.hierarchy_factor > 0)) throw ValidationError("config: hierarchy_factor must be > 0");
    }
    if (root.contains("decoherence")) {
        const auto& d = root.at("decoherence");
        only_keys(d, "decoherence", {"gamma_e", "gamma_c"});
        c.decoherence = std::make_pair(req_num(d, "decoherence", "gamma_e"), req_num(d, "decoherence", "gamma_c"));
    }
    if (root.contains("scan")) {
        const auto& s = root.at("scan");
        only_keys(s, "scan", {"ratios", "ratio_min", "ratio_max", "count"});
        if (s.contains("ratios")) {
            if (!s.at("ratios").is_array()) throw ValidationError("config: 'scan.ratios' must be an array");
            for (const auto& x : s.at("ratios")) {
                if (!x.is_number()) throw ValidationError("config: 'scan.ratios' entries must be numbers");
                c.scan_ratios.push_back(x.get<double>());
            }
        } else {
            const double lo = req_num(s, "scan", "ratio_min"), hi = req_num(s, "scan", "ratio_max");
            const std::size_t n = count(s, "scan", "count", 11, 2);
            for (std::size_t k = 0; k < n; ++k)
                c.scan_ratios.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
        }
    }
    if (root.contains("design")) c.design = parse_design(root.at("design"));
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/false);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: parse error: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace ccspin
