// params.hpp: Microscopic and reduced parameter sets, derived couplings,
// validity and decoherence checks.
//
// Units: every frequency is angular and stored in rad/ns. Values quoted in
// "GHz" in the literature are used verbatim as rad/ns; effective couplings
// are commonly quoted in "MHz", i.e. 1e3 times the rad/ns value.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ccspin/errors.hpp"

namespace ccspin {

inline double to_mhz(double rad_per_ns) { return rad_per_ns * 1e3; }

struct MicroParams {
    double Omega1{0}, Omega2{0}, Omega3{0}, Omega4{0};  // laser Rabi frequencies
    double g_a{0}, g_b{0};                              // atom-cavity couplings
    double delta31{0}, delta42{0};                      // cavity detunings
    double Delta31{0}, Delta32{0}, Delta41{0}, Delta42{0};  // laser detunings
    double J_a{0}, J_b{0};                              // photon hopping
    std::size_t n_sites{4};
};

struct ReducedParams {
    double A1{0}, A2{0}, A3{0};
    double B1{0}, B2{0}, B3{0};
    double delta1{0}, delta2{0}, delta3{0};
    double stark_a{0};  // g_a^2 / delta31
    double stark_b{0};  // g_b^2 / delta42
    double J_a{0}, J_b{0};
    // Single-site light shifts of |1> and |2> from the laser drives
    // (Omega1^2/Delta31 + Omega4^2/Delta41 and Omega3^2/Delta32 + Omega2^2/Delta42).
    double level_shift_1{0}, level_shift_2{0};
    std::size_t n_sites{4};
};

struct ShiftedDetunings {
    double delta_a1{0}, delta_a2{0}, delta_b1{0}, delta_b2{0};
};

struct EffectiveSpinModel {
    double J1{0}, J2{0};            // transverse NN / next-NN
    double lambda1{0}, lambda2{0};  // longitudinal NN / next-NN
    std::vector<double> h;          // per-site longitudinal field
    std::size_t n_sites{0};
    bool periodic{true};
};

struct ConstraintEntry {
    std::string name;
    double left{0};    // the quantity that must dominate
    double right{0};   // the quantity it must dominate
    double margin{0};  // left / right (infinity when right == 0)
    bool pass{false};
};

struct ValidityReport {
    std::vector<ConstraintEntry> entries;
    double hierarchy_factor{10.0};

    bool all_pass() const {
        return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
    }
    double min_margin() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : entries) m = std::min(m, e.margin);
        return m;
    }
    const ConstraintEntry* weakest() const {
        const ConstraintEntry* w = nullptr;
        for (const auto& e : entries)
            if (!w || e.margin < w->margin) w = &e;
        return w;
    }
};

struct DecoherenceReport {
    double Omega{0}, g{0}, J{0}, Delta{0}, delta{0};  // max/min reductions of the inputs
    double atomic_rate{0};      // |Omega/Delta|^2 Gamma_E
    double cavity_rate{0};      // |Omega g/(Delta delta)|^2 Gamma_C
    double coupling_scale{0};   // 4 J^2 Omega^2 g^2 / (Delta^2 delta^3)
    double cooperativity{0};    // g^2 / (Gamma_C Gamma_E)
    double g_over_gamma_e{0};   // g / Gamma_E
    std::vector<ConstraintEntry> constraints;

    bool all_pass() const {
        return std::all_of(constraints.begin(), constraints.end(), [](const auto& e) { return e.pass; });
    }
};

namespace detail {

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ValidationError(std::string("non-finite value: ") + what);
}

inline void require_nonzero(double x, const char* what) {
    require_finite(x, what);
    if (x == 0.0) throw ValidationError(std::string("zero detuning: ") + what);
}

inline ConstraintEntry dominance(std::string name, double left, double right, double factor) {
    ConstraintEntry e;
    e.name = std::move(name);
    e.left = std::abs(left);
    e.right = std::abs(right);
    e.margin = e.right == 0.0 ? std::numeric_limits<double>::infinity() : e.left / e.right;
    e.pass = e.margin >= factor;
    return e;
}

inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace detail

inline ReducedParams reduce_params(const MicroParams& m) {
    using detail::require_nonzero;
    require_nonzero(m.delta31, "delta31");
    require_nonzero(m.delta42, "delta42");
    require_nonzero(m.Delta31, "Delta31");
    require_nonzero(m.Delta32, "Delta32");
    require_nonzero(m.Delta41, "Delta41");
    require_nonzero(m.Delta42, "Delta42");
    for (double x : {m.Omega1, m.Omega2, m.Omega3, m.Omega4, m.g_a, m.g_b, m.J_a, m.J_b})
        detail::require_finite(x, "micro parameter");
    if (m.n_sites < 1) throw ValidationError("n_sites must be >= 1");

    const double d1a = m.delta31 - m.Delta31, d1b = m.delta42 - m.Delta42;
    const double d2a = m.delta31 - m.Delta32, d2b = m.delta42 - m.Delta41;
    constexpr double rel = 1e-12;
    if (!detail::close_rel(d1a, d1b, rel))
        throw ValidationError("inconsistent detunings: delta31-Delta31 != delta42-Delta42");
    if (!detail::close_rel(d2a, d2b, rel))
        throw ValidationError("inconsistent detunings: delta31-Delta32 != delta42-Delta41");

    ReducedParams r;
    r.A1 = 0.5 * m.Omega1 * m.g_a * (1.0 / m.Delta31 + 1.0 / m.delta31);
    r.A2 = 0.5 * m.Omega3 * m.g_a * (1.0 / m.Delta32 + 1.0 / m.delta31);
    r.A3 = 0.5 * m.Omega1 * m.Omega3 * (1.0 / m.Delta31 + 1.0 / m.Delta32);
    r.B1 = 0.5 * m.Omega2 * m.g_b * (1.0 / m.Delta42 + 1.0 / m.delta42);
    r.B2 = 0.5 * m.Omega4 * m.g_b * (1.0 / m.Delta41 + 1.0 / m.delta42);
    r.B3 = 0.5 * m.Omega2 * m.Omega4 * (1.0 / m.Delta41 + 1.0 / m.Delta42);
    r.delta1 = d1a;
    r.delta2 = d2a;
    r.delta3 = r.delta1 - r.delta2;
    r.stark_a = m.g_a * m.g_a / m.delta31;
    r.stark_b = m.g_b * m.g_b / m.delta42;
    r.level_shift_1 = m.Omega1 * m.Omega1 / m.Delta31 + m.Omega4 * m.Omega4 / m.Delta41;
    r.level_shift_2 = m.Omega3 * m.Omega3 / m.Delta32 + m.Omega2 * m.Omega2 / m.Delta42;
    r.J_a = m.J_a;
    r.J_b = m.J_b;
    r.n_sites = m.n_sites;
    return r;
}

// Checks the reduced-parameter invariant delta3 = delta1 - delta2.
inline void check_reduced(const ReducedParams& p) {
    for (double x : {p.A1, p.A2, p.A3, p.B1, p.B2, p.B3, p.delta1, p.delta2, p.delta3, p.stark_a, p.stark_b,
                     p.J_a, p.J_b, p.level_shift_1, p.level_shift_2})
        detail::require_finite(x, "reduced parameter");
    if (p.n_sites < 1) throw ValidationError("n_sites must be >= 1");
    const double scale = std::max({std::abs(p.delta1), std::abs(p.delta2), std::abs(p.delta3)});
    if (std::abs(p.delta3 - (p.delta1 - p.delta2)) > 1e-12 * std::max(scale, 1e-300))
        throw ValidationError("delta3 must equal delta1 - delta2");
}

inline ShiftedDetunings shifted_detunings(const ReducedParams& p) {
    detail::require_finite(p.stark_a, "stark_a");
    detail::require_finite(p.stark_b, "stark_b");
    return {p.delta1 + p.stark_a, p.delta2 + p.stark_a, p.delta1 + p.stark_b, p.delta2 + p.stark_b};
}

// Truncated second-order couplings of the J1-J2 XXZ chain. Field defaults to zero
// (light-shift compensation assumed); see stark_field_estimate.
inline EffectiveSpinModel effective_couplings(const ReducedParams& p, bool periodic = true) {
    const auto s = shifted_detunings(p);
    detail::require_nonzero(s.delta_a1, "delta_a1");
    detail::require_nonzero(s.delta_a2, "delta_a2");
    detail::require_nonzero(s.delta_b1, "delta_b1");
    detail::require_nonzero(s.delta_b2, "delta_b2");
    const double a1 = p.A1 * p.A1, a2 = p.A2 * p.A2, b1 = p.B1 * p.B1, b2 = p.B2 * p.B2;
    EffectiveSpinModel m;
    m.J1 = 2.0 * (p.J_a * a2 / (s.delta_a2 * s.delta_a2) - p.J_b * b2 / (s.delta_b2 * s.delta_b2));
    m.J2 = 2.0 * (p.J_a * p.J_a * a2 / std::pow(s.delta_a2, 3) + p.J_b * p.J_b * b2 / std::pow(s.delta_b2, 3));
    m.lambda1 = 2.0 * (p.J_a * a1 / (s.delta_a1 * s.delta_a1) - p.J_b * b1 / (s.delta_b1 * s.delta_b1));
    m.lambda2 =
        2.0 * (p.J_a * p.J_a * a1 / std::pow(s.delta_a1, 3) + p.J_b * p.J_b * b1 / std::pow(s.delta_b1, 3));
    m.n_sites = p.n_sites;
    m.h.assign(p.n_sites, 0.0);
    m.periodic = periodic;
    for (double x : {m.J1, m.J2, m.lambda1, m.lambda2}) detail::require_finite(x, "effective coupling");
    return m;
}

// Uniform longitudinal field left by the A3/B3 cross term at second order.
inline double stark_field_estimate(const ReducedParams& p) {
    if (p.delta3 == 0.0) throw ValidationError("stark_field_estimate: delta3 = 0 (resonant cross term)");
    return 2.0 * (p.B3 * p.B3 - p.A3 * p.A3) / p.delta3;
}

// Large-detuning hierarchy. One entry per (detuning, coupling) pair; an entry
// passes when |detuning| / |coupling| >= hierarchy_factor.
inline ValidityReport validity_check(const ReducedParams& p, double hierarchy_factor = 10.0,
                                     const std::optional<MicroParams>& micro = std::nullopt) {
    ValidityReport rep;
    rep.hierarchy_factor = hierarchy_factor;
    const auto s = shifted_detunings(p);
    const std::pair<const char*, double> detunings[] = {
        {"delta_a1", s.delta_a1},
        {"delta_a2", s.delta_a2},
        {"delta_b1", s.delta_b1},
        {"delta_b2", s.delta_b2},
        {"delta_a1-delta_a2", s.delta_a1 - s.delta_a2},
        {"delta_b1-delta_b2", s.delta_b1 - s.delta_b2},
    };
    const std::pair<const char*, double> couplings[] = {
        {"A1", p.A1}, {"A2", p.A2}, {"B1", p.B1}, {"B2", p.B2}, {"J_a", p.J_a}, {"J_b", p.J_b},
    };
    for (const auto& [dn, dv] : detunings)
        for (const auto& [cn, cv] : couplings)
            rep.entries.push_back(detail::dominance(std::string("|") + dn + "| >> |" + cn + "|", dv, cv,
                                                    hierarchy_factor));
    rep.entries.push_back(detail::dominance("|delta3| >> |A3|", p.delta3, p.A3, hierarchy_factor));
    rep.entries.push_back(detail::dominance("|delta3| >> |B3|", p.delta3, p.B3, hierarchy_factor));

    if (micro) {
        const auto& m = *micro;
        const std::pair<const char*, double> big[] = {
            {"Delta31", m.Delta31}, {"Delta32", m.Delta32}, {"Delta41", m.Delta41},
            {"Delta42", m.Delta42}, {"delta31", m.delta31}, {"delta42", m.delta42},
        };
        const std::pair<const char*, double> small[] = {
            {"g_a", m.g_a},       {"g_b", m.g_b},       {"Omega1", m.Omega1},
            {"Omega2", m.Omega2}, {"Omega3", m.Omega3}, {"Omega4", m.Omega4},
        };
        for (const auto& [bn, bv] : big)
            for (const auto& [sn, sv] : small)
                rep.entries.push_back(detail::dominance(std::string("|") + bn + "| >> |" + sn + "|", bv, sv,
                                                        hierarchy_factor));
    }
    return rep;
}

inline DecoherenceReport decoherence_check(const MicroParams& m, double gamma_e, double gamma_c,
                                           double hierarchy_factor = 10.0) {
    if (gamma_e < 0 || gamma_c < 0) throw ValidationError("decoherence_check: rates must be >= 0");
    DecoherenceReport r;
    r.Omega = std::max({std::abs(m.Omega1), std::abs(m.Omega2), std::abs(m.Omega3), std::abs(m.Omega4)});
    r.g = std::max(std::abs(m.g_a), std::abs(m.g_b));
    r.J = std::max(std::abs(m.J_a), std::abs(m.J_b));
    r.Delta = std::min({std::abs(m.Delta31), std::abs(m.Delta32), std::abs(m.Delta41), std::abs(m.Delta42)});
    r.delta = std::min(std::abs(m.delta31 - m.Delta31), std::abs(m.delta31 - m.Delta32));

    const double inf = std::numeric_limits<double>::infinity();
    auto ratio = [inf](double num, double den) { return den == 0.0 ? inf : num / den; };
    const double od = ratio(r.Omega, r.Delta);
    r.atomic_rate = od * od * gamma_e;
    const double ogdd = ratio(r.Omega * r.g, r.Delta * r.delta);
    r.cavity_rate = ogdd * ogdd * gamma_c;
    r.coupling_scale = ratio(4.0 * r.J * r.J * r.Omega * r.Omega * r.g * r.g,
                             r.Delta * r.Delta * std::pow(r.delta, 3));
    r.cooperativity = ratio(r.g * r.g, gamma_c * gamma_e);
    r.g_over_gamma_e = ratio(r.g, gamma_e);

    const double emitter_bound = ratio(4.0 * r.g * r.g * r.J * r.J, std::pow(r.delta, 3));
    r.constraints.push_back(
        detail::dominance("Gamma_E << 4 g^2 J^2 / delta^3", emitter_bound, gamma_e, hierarchy_factor));
    r.constraints.push_back(
        detail::dominance("Gamma_C << 4 J^2 / delta", ratio(4.0 * r.J * r.J, r.delta), gamma_c, hierarchy_factor));
    r.constraints.push_back(detail::dominance("Gamma_C << J", r.J, gamma_c, hierarchy_factor));
    return r;
}

}  // namespace ccspin
