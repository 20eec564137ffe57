// io.hpp: CSV and JSON serialization of results.
//
// Numbers are printed with a fixed "%.12e" format so identical runs produce
// byte-identical files.

#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "ccspin/analysis.hpp"
#include "ccspin/design.hpp"
#include "ccspin/evolve.hpp"
#include "ccspin/params.hpp"

namespace ccspin {

inline std::string fmt(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", x == 0.0 ? 0.0 : x);
    return buf;
}

// JSON-safe number: infinities become strings.
inline nlohmann::json jnum(double x) {
    if (std::isfinite(x)) return x;
    return fmt(x);
}

inline std::string timeseries_header(std::size_t n) {
    std::string h = "t_ns";
    for (const char* col : {"p1_site", "na_site", "nb_site"})
        for (std::size_t j = 1; j <= n; ++j) h += "," + std::string(col) + std::to_string(j);
    return h + ",norm,mz";
}

inline void write_timeseries_csv(std::ostream& os, const TimeSeries& ts) {
    os << timeseries_header(ts.n_sites) << '\n';
    for (std::size_t k = 0; k < ts.size(); ++k) {
        os << fmt(ts.t[k]);
        for (const auto* tab : {&ts.p1, &ts.na, &ts.nb})
            for (std::size_t j = 0; j < ts.n_sites; ++j) os << ',' << fmt((*tab)[j][k]);
        os << ',' << fmt(ts.norm[k]) << ',' << fmt(ts.mz[k]) << '\n';
    }
}

inline nlohmann::json to_json(const TimeSeries& ts) {
    nlohmann::json j;
    j["n_sites"] = ts.n_sites;
    j["t_ns"] = ts.t;
    j["p1"] = ts.p1;
    j["na"] = ts.na;
    j["nb"] = ts.nb;
    j["norm"] = ts.norm;
    j["mz"] = ts.mz;
    return j;
}

inline nlohmann::json to_json(const ReducedParams& p) {
    return {{"A1", p.A1},          {"A2", p.A2},          {"A3", p.A3},         {"B1", p.B1},
            {"B2", p.B2},          {"B3", p.B3},          {"delta1", p.delta1}, {"delta2", p.delta2},
            {"delta3", p.delta3},  {"stark_a", p.stark_a}, {"stark_b", p.stark_b}, {"J_a", p.J_a},
            {"J_b", p.J_b},        {"level_shift_1", p.level_shift_1}, {"level_shift_2", p.level_shift_2}};
}

inline nlohmann::json to_json(const ShiftedDetunings& s) {
    return {{"delta_a1", s.delta_a1}, {"delta_a2", s.delta_a2}, {"delta_b1", s.delta_b1}, {"delta_b2", s.delta_b2}};
}

inline nlohmann::json to_json(const EffectiveSpinModel& m) {
    return {{"J1", m.J1},
            {"J2", m.J2},
            {"lambda1", m.lambda1},
            {"lambda2", m.lambda2},
            {"J1_MHz", to_mhz(m.J1)},
            {"J2_MHz", to_mhz(m.J2)},
            {"lambda1_MHz", to_mhz(m.lambda1)},
            {"lambda2_MHz", to_mhz(m.lambda2)},
            {"h", m.h},
            {"n_sites", m.n_sites},
            {"periodic", m.periodic}};
}

inline nlohmann::json to_json(const std::vector<ConstraintEntry>& es) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : es)
        a.push_back({{"name", e.name}, {"left", e.left}, {"right", e.right}, {"margin", jnum(e.margin)}, {"pass", e.pass}});
    return a;
}

inline nlohmann::json to_json(const ValidityReport& r) {
    return {{"hierarchy_factor", r.hierarchy_factor},
            {"all_pass", r.all_pass()},
            {"min_margin", jnum(r.min_margin())},
            {"entries", to_json(r.entries)}};
}

inline nlohmann::json to_json(const DecoherenceReport& r) {
    return {{"atomic_rate", r.atomic_rate},       {"cavity_rate", r.cavity_rate},
            {"coupling_scale", r.coupling_scale}, {"cooperativity", jnum(r.cooperativity)},
            {"g_over_gamma_e", jnum(r.g_over_gamma_e)}, {"all_pass", r.all_pass()},
            {"constraints", to_json(r.constraints)}};
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
    os << "ratio,J1,J2,J2_over_J1,lambda1,lambda2\n";
    for (const auto& r : rows)
        os << fmt(r.ratio) << ',' << fmt(r.J1) << ',' << fmt(r.J2) << ',' << fmt(r.J2_over_J1) << ','
           << fmt(r.lambda1) << ',' << fmt(r.lambda2) << '\n';
}

inline void write_expansion_csv(std::ostream& os, const ExpansionReport& rep) {
    os << "r,channel,closed_form,exact,rel_error\n";
    for (const auto& r : rep.rows)
        os << r.r << ',' << r.channel << ',' << fmt(r.closed_form) << ',' << fmt(r.exact) << ',' << fmt(r.rel_error)
           << '\n';
    for (const auto& t : rep.tail) {
        os << t.r << ",transverse,0," << fmt(t.K_pm) << ",nan\n";
        os << t.r << ",longitudinal,0," << fmt(t.K_zz) << ",nan\n";
    }
}

inline nlohmann::json to_json(const ExpansionReport& rep) {
    nlohmann::json rows = nlohmann::json::array(), tail = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"r", r.r}, {"channel", r.channel}, {"closed_form", r.closed_form}, {"exact", r.exact},
                        {"rel_error", jnum(r.rel_error)}});
    for (const auto& t : rep.tail)
        tail.push_back({{"r", t.r}, {"K_pm", t.K_pm}, {"K_zz", t.K_zz}, {"ratio_pm", jnum(t.ratio_pm)},
                        {"ratio_zz", jnum(t.ratio_zz)}});
    return {{"J_over_delta", rep.J_over_delta}, {"max_rel_error", jnum(rep.max_rel_error)},
            {"max_tail_ratio", jnum(rep.max_tail_ratio)}, {"rows", rows}, {"tail", tail}};
}

inline nlohmann::json to_json(const GroundStateResult& g) {
    auto mat = [](const Eigen::MatrixXd& m) {
        nlohmann::json a = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(m.cols()));
            for (Eigen::Index k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(i, k);
            a.push_back(row);
        }
        return a;
    };
    return {{"energy", g.energy},
            {"energy_per_site", g.energy_per_site},
            {"residual", g.residual},
            {"total_sz", 0.5 * g.sector_2sz},
            {"degenerate", g.degenerate},
            {"degeneracy", g.degeneracy},
            {"low_levels", g.low_levels},
            {"entropy", g.entropy},
            {"szsz", mat(g.szsz)},
            {"spsm", mat(g.pm)},
            {"state", std::vector<double>(g.state.data(), g.state.data() + g.state.size())}};
}

inline nlohmann::json to_json(const FitResult& f) {
    nlohmann::json res = nlohmann::json::array();
    for (const auto& r : f.residuals)
        res.push_back({{"name", r.name}, {"target", r.target}, {"achieved", jnum(r.achieved)},
                       {"rel_error", jnum(r.error)}, {"tolerance", r.tolerance}, {"pass", r.pass}});
    return {{"parameters", {{"reduced", to_json(f.params)}}},
            {"feasible", f.feasible},
            {"status", f.status},
            {"residuals", res},
            {"evaluations", f.evaluations},
            {"start_index", f.start_index},
            {"validity", to_json(f.validity)}};
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << s;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

}  // namespace ccspin
