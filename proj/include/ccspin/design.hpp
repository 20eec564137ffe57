// design.hpp: Fit reduced parameters to target effective couplings.
//
// Deterministic: multi-start Nelder-Mead in log|x| over the free parameters,
// barrier-penalized validity constraints with a fixed weight schedule, then a
// Gauss-Newton polish. Results are checked exactly against the targets and
// the validity hierarchy before being reported feasible.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ccspin/errors.hpp"
#include "ccspin/params.hpp"

namespace ccspin {

enum class TargetKind { J1, J2, lambda1, lambda2, J2_over_J1, lambda2_over_lambda1 };

inline const char* target_name(TargetKind k) {
    switch (k) {
        case TargetKind::J1: return "J1";
        case TargetKind::J2: return "J2";
        case TargetKind::lambda1: return "lambda1";
        case TargetKind::lambda2: return "lambda2";
        case TargetKind::J2_over_J1: return "J2/J1";
        case TargetKind::lambda2_over_lambda1: return "lambda2/lambda1";
    }
    return "?";
}

inline std::optional<TargetKind> parse_target(const std::string& s) {
    for (auto k : {TargetKind::J1, TargetKind::J2, TargetKind::lambda1, TargetKind::lambda2, TargetKind::J2_over_J1,
                   TargetKind::lambda2_over_lambda1})
        if (s == target_name(k)) return k;
    return std::nullopt;
}

struct Target {
    TargetKind kind;
    double value;
    double weight{1.0};
    double tolerance{1e-3};  // relative; absolute against the coupling scale when value == 0
};

struct Bound {
    std::string name;
    double lo, hi;
};

// Free parameter names: A1 A2 A3 B1 B2 B3 delta1 delta2 stark_a stark_b J_a J_b,
// plus the tied groups "A" (A1 = A2 moved together) and "B" (B1 = B2).
struct DesignTarget {
    std::vector<Target> targets;
    std::vector<std::string> free;
    std::vector<Bound> bounds;
    double hierarchy_factor{10.0};
    std::size_t max_evaluations{20000};  // per start
};

struct TargetResidual {
    std::string name;
    double target, achieved, error;  // error relative to tolerance scale
    double tolerance;
    bool pass;
};

struct FitResult {
    ReducedParams params;
    std::vector<TargetResidual> residuals;
    ValidityReport validity;
    bool feasible{false};
    double objective{0};
    std::size_t evaluations{0};
    std::size_t start_index{0};
    std::string status;
};

namespace detail {

inline double* param_slot(ReducedParams& p, const std::string& name) {
    if (name == "A1") return &p.A1;
    if (name == "A2") return &p.A2;
    if (name == "A3") return &p.A3;
    if (name == "B1") return &p.B1;
    if (name == "B2") return &p.B2;
    if (name == "B3") return &p.B3;
    if (name == "delta1") return &p.delta1;
    if (name == "delta2") return &p.delta2;
    if (name == "stark_a") return &p.stark_a;
    if (name == "stark_b") return &p.stark_b;
    if (name == "J_a") return &p.J_a;
    if (name == "J_b") return &p.J_b;
    return nullptr;
}

inline std::vector<std::string> expand_group(const std::string& name) {
    if (name == "A") return {"A1", "A2"};
    if (name == "B") return {"B1", "B2"};
    return {name};
}

class DesignProblem {
public:
    DesignProblem(const DesignTarget& t, const ReducedParams& seed) : t_(t), seed_(seed) {
        if (t.targets.empty()) throw ValidationError("design: at least one target is required");
        if (t.free.empty()) throw ValidationError("design: at least one free parameter is required");
        for (const auto& f : t.free) {
            Var v;
            v.name = f;
            for (const auto& n : expand_group(f)) {
                double* slot = param_slot(seed_, n);
                if (!slot) throw ValidationError("design: unknown free parameter '" + f + "'");
                v.members.push_back(n);
            }
            const double x0 = *param_slot(seed_, v.members.front());
            if (x0 == 0.0 || !std::isfinite(x0))
                throw ValidationError("design: free parameter '" + f + "' needs a nonzero seed value");
            for (const auto& n : v.members)
                if (*param_slot(seed_, n) != x0)
                    throw ValidationError("design: tied group '" + f + "' needs equal seed values");
            v.sign = x0 > 0 ? 1.0 : -1.0;
            v.lo = -std::numeric_limits<double>::infinity();
            v.hi = std::numeric_limits<double>::infinity();
            vars_.push_back(v);
        }
        for (const auto& b : t.bounds) {
            auto it = std::find_if(vars_.begin(), vars_.end(), [&](const Var& v) { return v.name == b.name; });
            if (it == vars_.end()) throw ValidationError("design: bound on non-free parameter '" + b.name + "'");
            if (!(b.lo <= b.hi)) throw ValidationError("design: empty bound for '" + b.name + "'");
            const double lo = b.lo * it->sign, hi = b.hi * it->sign;
            const double mlo = std::min(lo, hi), mhi = std::max(lo, hi);
            if (mhi <= 0.0) throw ValidationError("design: bound for '" + b.name + "' excludes the seed sign");
            it->lo = mlo > 0.0 ? std::log(mlo) : -std::numeric_limits<double>::infinity();
            it->hi = std::log(mhi);
        }
        const auto m = effective_couplings(seed_);
        scale_ = std::max({std::abs(m.J1), std::abs(m.J2), std::abs(m.lambda1), std::abs(m.lambda2)});
        if (scale_ == 0.0) scale_ = 1.0;
    }

    std::size_t dim() const { return vars_.size(); }

    Eigen::VectorXd seed_point() const {
        Eigen::VectorXd x(static_cast<Eigen::Index>(dim()));
        for (std::size_t i = 0; i < dim(); ++i)
            x(static_cast<Eigen::Index>(i)) = std::log(std::abs(*param_slot(const_cast<ReducedParams&>(seed_),
                                                                             vars_[i].members.front())));
        return x;
    }

    ReducedParams params_at(const Eigen::VectorXd& x) const {
        ReducedParams p = seed_;
        for (std::size_t i = 0; i < dim(); ++i)
            for (const auto& n : vars_[i].members)
                *param_slot(p, n) = vars_[i].sign * std::exp(x(static_cast<Eigen::Index>(i)));
        p.delta3 = p.delta1 - p.delta2;
        return p;
    }

    bool in_bounds(const Eigen::VectorXd& x) const {
        for (std::size_t i = 0; i < dim(); ++i) {
            const double v = x(static_cast<Eigen::Index>(i));
            if (v < vars_[i].lo - 1e-12 || v > vars_[i].hi + 1e-12) return false;
        }
        return true;
    }

    // Scaled residuals r_k so that |r_k| <= 1 means target k is met.
    std::optional<Eigen::VectorXd> residuals(const ReducedParams& p) const {
        EffectiveSpinModel m;
        try {
            m = effective_couplings(p);
        } catch (const ValidationError&) {
            return std::nullopt;
        }
        Eigen::VectorXd r(static_cast<Eigen::Index>(t_.targets.size()));
        for (std::size_t k = 0; k < t_.targets.size(); ++k) {
            const auto& tg = t_.targets[k];
            const double v = value_of(m, tg.kind);
            if (!std::isfinite(v)) return std::nullopt;
            const double s = denom(tg);
            r(static_cast<Eigen::Index>(k)) = (v - tg.value) / s;
        }
        return r;
    }

    double denom(const Target& tg) const {
        const bool ratio = tg.kind == TargetKind::J2_over_J1 || tg.kind == TargetKind::lambda2_over_lambda1;
        const double base = tg.value != 0.0 ? std::abs(tg.value) : (ratio ? 1.0 : scale_);
        return tg.tolerance * base;
    }

    static double value_of(const EffectiveSpinModel& m, TargetKind k) {
        switch (k) {
            case TargetKind::J1: return m.J1;
            case TargetKind::J2: return m.J2;
            case TargetKind::lambda1: return m.lambda1;
            case TargetKind::lambda2: return m.lambda2;
            case TargetKind::J2_over_J1:
                return m.J1 == 0.0 ? std::numeric_limits<double>::infinity() : m.J2 / m.J1;
            case TargetKind::lambda2_over_lambda1:
                return m.lambda1 == 0.0 ? std::numeric_limits<double>::infinity() : m.lambda2 / m.lambda1;
        }
        return 0.0;
    }

    double misfit(const Eigen::VectorXd& x) const {
        if (!in_bounds(x)) return std::numeric_limits<double>::infinity();
        const auto r = residuals(params_at(x));
        if (!r) return std::numeric_limits<double>::infinity();
        double f = 0.0;
        for (std::size_t k = 0; k < t_.targets.size(); ++k)
            f += t_.targets[k].weight * (*r)(static_cast<Eigen::Index>(k)) * (*r)(static_cast<Eigen::Index>(k));
        return f;
    }

    // Quadratic penalty on log(factor / margin) for each violated entry.
    double barrier(const Eigen::VectorXd& x) const {
        const auto rep = validity_check(params_at(x), t_.hierarchy_factor);
        double b = 0.0;
        for (const auto& e : rep.entries)
            if (e.margin < t_.hierarchy_factor * 1.01) {
                const double d = std::log(t_.hierarchy_factor * 1.01 / std::max(e.margin, 1e-300));
                b += d * d;
            }
        return b;
    }

    bool valid(const ReducedParams& p) const { return validity_check(p, t_.hierarchy_factor).all_pass(); }

    const DesignTarget& target() const noexcept { return t_; }
    double scale() const noexcept { return scale_; }

private:
    struct Var {
        std::string name;
        std::vector<std::string> members;
        double sign{1};
        double lo, hi;
    };
    DesignTarget t_;
    ReducedParams seed_;
    std::vector<Var> vars_;
    double scale_{1};
};

struct SimplexResult {
    Eigen::VectorXd x;
    double f;
    std::size_t evals;
};

inline SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                 double size, std::size_t max_evals, double ftol = 1e-30, double xtol = 1e-13) {
    const auto n = x0.size();
    std::vector<Eigen::VectorXd> s(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> fv(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i + 1)](i) += size;
    std::size_t evals = 0;
    for (std::size_t i = 0; i < s.size(); ++i) fv[i] = f(s[i]), ++evals;
    std::vector<std::size_t> idx(s.size());
    while (evals < max_evals) {
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = idx.front(), worst = idx.back(), second = idx[idx.size() - 2];
        double spread = 0.0;
        for (const auto& v : s) spread = std::max(spread, (v - s[best]).cwiseAbs().maxCoeff());
        if (fv[best] <= ftol || (std::abs(fv[worst] - fv[best]) <= ftol && spread <= xtol) || spread <= xtol) break;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (i != worst) c += s[i];
        c /= static_cast<double>(n);
        const Eigen::VectorXd xr = c + (c - s[worst]);
        const double fr = f(xr);
        ++evals;
        if (fr < fv[best]) {
            const Eigen::VectorXd xe = c + 2.0 * (c - s[worst]);
            const double fe = f(xe);
            ++evals;
            if (fe < fr)
                s[worst] = xe, fv[worst] = fe;
            else
                s[worst] = xr, fv[worst] = fr;
        } else if (fr < fv[second]) {
            s[worst] = xr, fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const Eigen::VectorXd xc = outside ? Eigen::VectorXd(c + 0.5 * (xr - c)) : Eigen::VectorXd(c + 0.5 * (s[worst] - c));
            const double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, fv[worst])) {
                s[worst] = xc, fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i < s.size(); ++i) {
                    if (i == best) continue;
                    s[i] = s[best] + 0.5 * (s[i] - s[best]);
                    fv[i] = f(s[i]);
                    ++evals;
                }
            }
        }
    }
    const auto it = std::min_element(fv.begin(), fv.end());
    return {s[static_cast<std::size_t>(it - fv.begin())], *it, evals};
}

}  // namespace detail

inline FitResult evaluate_fit(const detail::DesignProblem& prob, const ReducedParams& p) {
    FitResult r;
    r.params = p;
    const auto m = effective_couplings(p);
    const auto& t = prob.target();
    bool all = true;
    for (const auto& tg : t.targets) {
        const double v = detail::DesignProblem::value_of(m, tg.kind);
        const double err = std::abs(v - tg.value) / (prob.denom(tg) / tg.tolerance);
        const bool pass = std::isfinite(v) && err <= tg.tolerance;
        all = all && pass;
        r.residuals.push_back({target_name(tg.kind), tg.value, v, err, tg.tolerance, pass});
        r.objective = std::max(r.objective, std::isfinite(err) ? err : std::numeric_limits<double>::infinity());
    }
    r.validity = validity_check(p, t.hierarchy_factor);
    r.feasible = all && r.validity.all_pass();
    return r;
}

inline FitResult fit_parameters(const DesignTarget& target, const ReducedParams& seed) {
    detail::DesignProblem prob(target, seed);
    if (!prob.valid(seed)) {
        const auto rep = validity_check(seed, target.hierarchy_factor);
        throw ValidationError("design: seed fails validity at factor " + std::to_string(target.hierarchy_factor) +
                              ": " + rep.weakest()->name);
    }
    const Eigen::VectorXd x_seed = prob.seed_point();
    if (!prob.in_bounds(x_seed)) throw ValidationError("design: seed lies outside the bounds");

    // Exact targets at the seed: nothing to do.
    {
        auto r0 = evaluate_fit(prob, seed);
        const auto res = prob.residuals(seed);
        if (res && res->cwiseAbs().maxCoeff() == 0.0) {
            r0.status = "seed satisfies targets exactly";
            return r0;
        }
    }

    const auto n = static_cast<Eigen::Index>(prob.dim());
    std::vector<Eigen::VectorXd> starts{x_seed};
    for (int k = 1; k < 8; ++k) {
        Eigen::VectorXd x = x_seed;
        for (Eigen::Index i = 0; i < n; ++i) x(i) += 0.1 * ((((k >> (i % 3)) & 1) != 0) ? 1.0 : -1.0);
        starts.push_back(x);
    }

    struct Candidate {
        Eigen::VectorXd x;
        double f;
        std::size_t start;
    };
    std::vector<Candidate> cands;
    std::size_t evals = 0;
    const double weights[] = {1e2, 1e4, 1e6};
    for (std::size_t s = 0; s < starts.size(); ++s) {
        Eigen::VectorXd x = starts[s];
        if (!prob.in_bounds(x)) x = x_seed;
        double size = 0.05;
        for (double w : weights) {
            auto obj = [&](const Eigen::VectorXd& y) {
                const double m = prob.misfit(y);
                return std::isfinite(m) ? m + w * prob.barrier(y) : m;
            };
            auto r = detail::nelder_mead(obj, x, size, target.max_evaluations / 3);
            evals += r.evals;
            x = r.x;
            size = 0.01;
        }
        // Gauss-Newton polish on the scaled residuals (finite differences).
        for (int it = 0; it < 40; ++it) {
            const ReducedParams p = prob.params_at(x);
            const auto r = prob.residuals(p);
            if (!r || r->cwiseAbs().maxCoeff() < 1e-12) break;
            Eigen::MatrixXd Jm(r->size(), n);
            bool ok = true;
            for (Eigen::Index i = 0; i < n; ++i) {
                Eigen::VectorXd xp = x;
                const double h = 1e-7;
                xp(i) += h;
                const auto rp = prob.residuals(prob.params_at(xp));
                if (!rp) {
                    ok = false;
                    break;
                }
                Jm.col(i) = (*rp - *r) / h;
                ++evals;
            }
            if (!ok) break;
            const Eigen::VectorXd dx = Jm.completeOrthogonalDecomposition().solve(-*r);
            const double f0 = r->squaredNorm();
            bool improved = false;
            for (double a = 1.0; a > 1e-4; a *= 0.5) {
                const Eigen::VectorXd xn = x + a * dx;
                if (!prob.in_bounds(xn)) continue;
                const auto rn = prob.residuals(prob.params_at(xn));
                ++evals;
                if (rn && rn->squaredNorm() < f0 && prob.valid(prob.params_at(xn))) {
                    x = xn;
                    improved = true;
                    break;
                }
            }
            if (!improved) break;
        }
        const double f = prob.misfit(x);
        cands.push_back({x, f, s});
    }

    // Prefer feasible candidates; among equally good ones the closest to the seed.
    const Candidate* best = nullptr;
    bool best_feasible = false;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) {
        const auto fit = evaluate_fit(prob, prob.params_at(c.x));
        const double score = fit.objective;
        const double dist = (c.x - x_seed).norm();
        if (!best) {
            best = &c, best_feasible = fit.feasible, best_score = score;
            continue;
        }
        const double bdist = (best->x - x_seed).norm();
        if (fit.feasible != best_feasible) {
            if (fit.feasible) best = &c, best_feasible = true, best_score = score;
            continue;
        }
        const bool tie = std::abs(score - best_score) <= 1e-9;
        if ((tie && dist < bdist - 1e-12) || (!tie && score < best_score)) best = &c, best_score = score;
    }
    FitResult out = evaluate_fit(prob, prob.params_at(best->x));
    out.evaluations = evals;
    out.start_index = best->start;
    out.status = out.feasible ? "converged" : "infeasible: residual above tolerance or validity violated";
    return out;
}

}  // namespace ccspin
