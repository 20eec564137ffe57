// analysis.hpp: Full-vs-effective comparisons, coupling scans, ground states
// of the effective chain, and the truncation error of the closed-form couplings.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ccspin/errors.hpp"
#include "ccspin/evolve.hpp"
#include "ccspin/hamiltonians.hpp"
#include "ccspin/hilbert.hpp"
#include "ccspin/params.hpp"

namespace ccspin {

// ----------------------------------------------------------------------------
// compare_models

struct CompareConfig {
    int n_max_a{1}, n_max_b{1};
    std::optional<int> photon_cap;
    bool periodic{true};
    bool include_cross_term{true};
    bool include_local_terms{true};
    PropagatorConfig full;       // step 0 selects the default
    PropagatorConfig effective;  // step 0 selects the default
    bool stroboscopic{true};     // use the one-period propagator when possible
    std::size_t stroboscopic_max_dimension{4096};
    std::size_t sample_periods{1};
    double refuse_factor{2.0};
    double warn_factor{5.0};
};

struct ComparisonResult {
    TimeSeries full, effective;
    std::vector<double> grid;             // times on which deviations are evaluated
    std::vector<double> max_deviation;    // per site
    double max_abs_deviation{0};
    double rms_deviation{0};
    double max_photon_number{0};
    ValidityReport validity;
    std::vector<std::string> warnings;
    bool used_stroboscopic{false};
};

// Piecewise-linear sample of (t, y) at x; clamps outside the range.
inline double interpolate(const std::vector<double>& t, const std::vector<double>& y, double x) {
    if (t.empty()) throw std::invalid_argument("interpolate: empty series");
    if (x <= t.front()) return y.front();
    if (x >= t.back()) return y.back();
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[k - 1]) / (t[k] - t[k - 1]);
    return (1.0 - w) * y[k - 1] + w * y[k];
}

struct Deviation {
    std::vector<double> grid, per_site;
    double max_abs{0}, rms{0};
};

// Deviation in p(1_j) evaluated on the coarser of the two grids.
inline Deviation occupation_deviation(const TimeSeries& x, const TimeSeries& y) {
    if (x.n_sites != y.n_sites) throw std::invalid_argument("occupation_deviation: site count mismatch");
    const bool x_coarse = x.size() <= y.size();
    const TimeSeries& c = x_coarse ? x : y;
    const TimeSeries& f = x_coarse ? y : x;
    Deviation d;
    d.per_site.assign(c.n_sites, 0.0);
    double sq = 0.0;
    std::size_t cnt = 0;
    const double tmax = std::min(c.t.back(), f.t.back()) * (1.0 + 1e-12);
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c.t[k] > tmax) break;
        d.grid.push_back(c.t[k]);
        for (std::size_t j = 0; j < c.n_sites; ++j) {
            const double e = std::abs(c.p1[j][k] - interpolate(f.t, f.p1[j], c.t[k]));
            d.per_site[j] = std::max(d.per_site[j], e);
            sq += e * e;
            ++cnt;
        }
    }
    for (double v : d.per_site) d.max_abs = std::max(d.max_abs, v);
    d.rms = cnt ? std::sqrt(sq / static_cast<double>(cnt)) : 0.0;
    return d;
}

// Exchange period of the effective chain, 2 pi / max(|J1|, |J2|).
inline double exchange_period(const EffectiveSpinModel& m) {
    const double j = std::max(std::abs(m.J1), std::abs(m.J2));
    if (j == 0.0) throw ValidationError("exchange_period: J1 = J2 = 0");
    return 2.0 * std::numbers::pi / j;
}

// Full-model trajectory from a spin pattern with empty cavities. Uses the
// one-period propagator when the drive is commensurate and small enough.
inline TimeSeries simulate_full(const ReducedParams& p, const std::string& pattern, double t_final,
                                const CompareConfig& cc, bool* used_stroboscopic = nullptr) {
    FullHamiltonianSpec spec;
    spec.params = p;
    spec.basis = build_basis(p.n_sites, cc.n_max_a, cc.n_max_b, cc.photon_cap);
    spec.periodic = cc.periodic;
    spec.include_cross_term = cc.include_cross_term;
    spec.include_local_terms = cc.include_local_terms;
    DrivenHamiltonian H(spec);
    PropagatorConfig cfg = cc.full;
    if (cfg.step == 0.0)
        cfg.step = H.time_dependent() ? cfg.phase_resolution_factor / H.max_frequency() : default_full_step(p);
    const QuantumState psi0 = spin_pattern_state(spec.basis, pattern);
    if (used_stroboscopic) *used_stroboscopic = false;
    if (cc.stroboscopic && H.time_dependent() && cfg.method == Method::midpoint_exponential &&
        H.dimension() <= cc.stroboscopic_max_dimension) {
        if (auto T = commensurate_period(H.frequencies())) {
            const std::size_t periods = static_cast<std::size_t>(std::ceil(t_final / *T - 1e-9));
            if (periods >= 2) {
                const auto F = floquet_operator(H, *T, cfg, cc.stroboscopic_max_dimension);
                if (used_stroboscopic) *used_stroboscopic = true;
                return propagate_stroboscopic(F, spec.basis, psi0, periods, std::max<std::size_t>(1, cc.sample_periods),
                                              cfg.max_norm_drift);
            }
        }
    }
    return propagate(H, spec.basis, psi0, t_final, cfg);
}

inline TimeSeries simulate_effective(const EffectiveSpinModel& m, const std::string& pattern, double t_final,
                                     PropagatorConfig cfg = {}) {
    const auto basis = spin_basis(m.n_sites);
    StaticHamiltonian H(effective_hamiltonian(m, basis));
    if (cfg.step == 0.0) cfg.step = default_effective_step(H.op());
    return propagate(H, basis, spin_pattern_state(basis, pattern), t_final, cfg);
}

inline ComparisonResult compare_models(const ReducedParams& p, const std::string& pattern, double t_final,
                                       const CompareConfig& cc = {}) {
    ComparisonResult res;
    res.validity = validity_check(p, cc.refuse_factor);
    if (!res.validity.entries.empty() && res.validity.min_margin() < cc.refuse_factor) {
        const auto* w = res.validity.weakest();
        throw ValidationError("compare: validity refused: " + w->name + " ratio " + std::to_string(w->margin) +
                              " below " + std::to_string(cc.refuse_factor));
    }
    if (!res.validity.entries.empty() && res.validity.min_margin() < cc.warn_factor) {
        const auto* w = res.validity.weakest();
        res.warnings.push_back("weak hierarchy: " + w->name + " ratio " + std::to_string(w->margin));
    }
    const auto model = effective_couplings(p, cc.periodic);
    res.full = simulate_full(p, pattern, t_final, cc, &res.used_stroboscopic);
    res.effective = simulate_effective(model, pattern, res.full.t.back(), cc.effective);
    const auto d = occupation_deviation(res.full, res.effective);
    res.grid = d.grid;
    res.max_deviation = d.per_site;
    res.max_abs_deviation = d.max_abs;
    res.rms_deviation = d.rms;
    res.max_photon_number = res.full.max_photon_number();
    return res;
}

// ----------------------------------------------------------------------------
// cancellation_scan

struct ScanRow {
    double ratio, J1, J2, J2_over_J1, lambda1, lambda2;
};

// Sets B1 = r A1 and B2 = r A2 for each r in the grid.
inline std::vector<ScanRow> cancellation_scan(const ReducedParams& base, const std::vector<double>& ratios) {
    std::vector<ScanRow> rows;
    rows.reserve(ratios.size());
    for (double r : ratios) {
        detail::require_finite(r, "scan ratio");
        ReducedParams p = base;
        p.B1 = r * base.A1;
        p.B2 = r * base.A2;
        const auto m = effective_couplings(p);
        const double q = m.J1 == 0.0 ? std::numeric_limits<double>::infinity() : m.J2 / m.J1;
        rows.push_back({r, m.J1, m.J2, q, m.lambda1, m.lambda2});
    }
    return rows;
}

// ----------------------------------------------------------------------------
// Ground state of the effective chain

struct GroundStateResult {
    double energy{0};
    double energy_per_site{0};
    double residual{0};
    int sector_2sz{0};  // 2 * total Sz of the returned vector
    Eigen::VectorXd state;  // over the full 2^N spin basis
    Eigen::MatrixXd szsz;   // <Sz_i Sz_j>
    Eigen::MatrixXd pm;     // <S+_i S-_j>
    std::vector<double> entropy;  // cut after site l, l = 1..N-1
    bool degenerate{false};
    int degeneracy{1};
    std::vector<double> low_levels;  // lowest levels found, ascending
};

struct EigenSolverOptions {
    double residual_tol{1e-10};
    double degeneracy_tol{1e-8};
    std::size_t dense_limit{400};
    std::size_t krylov_dim{120};
    std::size_t max_restarts{200};
    std::size_t levels_per_sector{2};
};

namespace detail {

using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

inline std::vector<std::uint64_t> sector_configs(std::size_t n, std::size_t n_up) {
    std::vector<std::uint64_t> c;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k)
        if (static_cast<std::size_t>(std::popcount(k)) == n_up) c.push_back(k);
    return c;
}

struct Eigenpair {
    double value;
    Eigen::VectorXd vector;
    double residual;
};

inline Eigen::VectorXd start_vector(std::size_t n, std::uint32_t seed) {
    std::mt19937 gen(seed);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = static_cast<double>(gen()) / 4294967296.0 - 0.5;
    return v.normalized();
}

inline void orthogonalize(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) v -= b.dot(v) * b;
}

// Lowest eigenpair of A in the complement of `locked`, explicit-restart Lanczos
// with full reorthogonalization.
inline Eigenpair lanczos_lowest(const RealSparse& A, const std::vector<Eigen::VectorXd>& locked,
                                const EigenSolverOptions& opt, std::uint32_t seed) {
    const auto n = static_cast<std::size_t>(A.rows());
    double anorm = 0.0;
    for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
        double s = 0.0;
        for (RealSparse::InnerIterator it(A, r); it; ++it) s += std::abs(it.value());
        anorm = std::max(anorm, s);
    }
    const double tol = opt.residual_tol * std::max(1.0, anorm);
    Eigen::VectorXd x = start_vector(n, seed);
    orthogonalize(x, locked);
    x.normalize();
    const std::size_t m_max = std::min(opt.krylov_dim, n - locked.size());
    Eigenpair best{0.0, x, std::numeric_limits<double>::infinity()};
    for (std::size_t restart = 0; restart < opt.max_restarts; ++restart) {
        std::vector<Eigen::VectorXd> V{x};
        std::vector<double> alpha, beta;
        Eigen::VectorXd w(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < m_max; ++k) {
            w.noalias() = A * V[k];
            alpha.push_back(V[k].dot(w));
            orthogonalize(w, locked);
            orthogonalize(w, V);
            const double b = w.norm();
            if (k + 1 == m_max || b < 1e-13 * std::max(1.0, anorm)) break;
            beta.push_back(b);
            V.push_back(w / b);
        }
        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            T(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const Eigen::VectorXd y = es.eigenvectors().col(0);
        x.setZero();
        for (Eigen::Index i = 0; i < m; ++i) x += y(i) * V[static_cast<std::size_t>(i)];
        orthogonalize(x, locked);
        x.normalize();
        const Eigen::VectorXd Ax = A * x;
        const double theta = x.dot(Ax);
        const double res = (Ax - theta * x).norm();
        if (res < best.residual) best = {theta, x, res};
        if (res <= tol) return best;
    }
    throw NumericError("ground_state: Lanczos did not converge (residual " + std::to_string(best.residual) + ")");
}

inline std::vector<Eigenpair> lowest_levels(const RealSparse& A, std::size_t count, const EigenSolverOptions& opt) {
    const auto n = static_cast<std::size_t>(A.rows());
    count = std::min(count, n);
    std::vector<Eigenpair> out;
    if (n <= opt.dense_limit) {
        const Eigen::MatrixXd D(A);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
        if (es.info() != Eigen::Success) throw NumericError("ground_state: dense eigensolver failed");
        for (std::size_t k = 0; k < count; ++k) {
            const Eigen::VectorXd v = es.eigenvectors().col(static_cast<Eigen::Index>(k));
            const double e = es.eigenvalues()(static_cast<Eigen::Index>(k));
            out.push_back({e, v, (D * v - e * v).norm()});
        }
        return out;
    }
    std::vector<Eigen::VectorXd> locked;
    for (std::size_t k = 0; k < count; ++k) {
        auto p = lanczos_lowest(A, locked, opt, 12345u + static_cast<std::uint32_t>(k));
        locked.push_back(p.vector);
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(), [](const Eigenpair& a, const Eigenpair& b) { return a.value < b.value; });
    return out;
}

}  // namespace detail

// Per-site entanglement entropy of a real 2^N vector for the cut after site l.
inline double cut_entropy(const Eigen::VectorXd& psi, std::size_t n, std::size_t l) {
    if (l == 0 || l >= n) return 0.0;
    const auto rows = static_cast<Eigen::Index>(std::uint64_t{1} << l);
    const auto cols = static_cast<Eigen::Index>(std::uint64_t{1} << (n - l));
    // Site 0 is the most significant bit, so the left block is the row index.
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(psi.data(), rows,
                                                                                                     cols);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    double s = 0.0;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
        const double p = svd.singularValues()(k) * svd.singularValues()(k);
        if (p > 1e-300) s -= p * std::log(p);
    }
    return std::max(0.0, s);
}

inline GroundStateResult ground_state(const EffectiveSpinModel& m, const EigenSolverOptions& opt = {}) {
    const std::size_t N = m.n_sites;
    if (N < 1 || N > 16) throw ValidationError("ground_state: n_sites must be in 1..16");
    if (m.h.size() != N) throw ValidationError("ground_state: field array length != n_sites");
    for (double x : {m.J1, m.J2, m.lambda1, m.lambda2}) detail::require_finite(x, "coupling");
    for (double x : m.h) detail::require_finite(x, "field");
    const auto pairs = effective_pairs(m);

    struct Level {
        double e;
        std::size_t n_up;
        Eigen::VectorXd v;
        double residual;
    };
    std::vector<Level> levels;
    std::vector<std::vector<std::uint64_t>> sectors(N + 1);
    for (std::size_t up = 0; up <= N; ++up) {
        sectors[up] = detail::sector_configs(N, up);
        const detail::RealSparse A = detail::spin_chain_matrix(pairs, m.h, sectors[up], N).real();
        for (auto& p : detail::lowest_levels(A, opt.levels_per_sector, opt))
            levels.push_back({p.value, up, std::move(p.vector), p.residual});
    }
    std::stable_sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) { return a.e < b.e; });

    GroundStateResult g;
    const Level& gs = levels.front();
    g.energy = gs.e;
    g.energy_per_site = gs.e / static_cast<double>(N);
    g.residual = gs.residual;
    g.sector_2sz = 2 * static_cast<int>(gs.n_up) - static_cast<int>(N);
    const double scale = std::max(1.0, std::abs(gs.e));
    g.degeneracy = 0;
    for (const auto& l : levels) {
        g.low_levels.push_back(l.e);
        if (l.e - gs.e <= opt.degeneracy_tol * scale) ++g.degeneracy;
    }
    g.degenerate = g.degeneracy > 1;

    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << N);
    g.state = Eigen::VectorXd::Zero(dim);
    const auto& cfgs = sectors[gs.n_up];
    for (std::size_t k = 0; k < cfgs.size(); ++k) g.state(static_cast<Eigen::Index>(cfgs[k])) = gs.v(static_cast<Eigen::Index>(k));
    // Fix the overall sign so output is reproducible.
    Eigen::Index imax = 0;
    g.state.cwiseAbs().maxCoeff(&imax);
    if (g.state(imax) < 0) g.state = -g.state;

    const auto n = static_cast<Eigen::Index>(N);
    g.szsz = Eigen::MatrixXd::Zero(n, n);
    g.pm = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index c = 0; c < dim; ++c) {
        const double a = g.state(c);
        if (a == 0.0) continue;
        const auto cfg = static_cast<std::uint64_t>(c);
        for (std::size_t i = 0; i < N; ++i) {
            const bool ui = detail::spin_up(cfg, i, N);
            for (std::size_t j = 0; j < N; ++j) {
                const bool uj = detail::spin_up(cfg, j, N);
                g.szsz(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    a * a * (ui ? 0.5 : -0.5) * (uj ? 0.5 : -0.5);
                if (i == j) {
                    if (ui) g.pm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += a * a;
                } else if (uj && !ui) {
                    const auto c2 = static_cast<Eigen::Index>(detail::flip_pair(cfg, i, j, N));
                    g.pm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += g.state(c2) * a;
                }
            }
        }
    }
    for (std::size_t l = 1; l < N; ++l) g.entropy.push_back(cut_entropy(g.state, N, l));
    return g;
}

// ----------------------------------------------------------------------------
// expansion_error_report

struct ExpansionRow {
    std::size_t r;
    std::string channel;  // "transverse" or "longitudinal"
    double closed_form;   // per-pair coefficient of the J1-J2 model
    double exact;         // per-pair coefficient from the momentum sums
    double rel_error;     // |closed_form - exact| / |exact|
};

struct TailRow {
    std::size_t r;
    double K_pm, K_zz;
    double ratio_pm, ratio_zz;  // |K(r)| / ((J/delta) |K(2)|)
};

struct ExpansionReport {
    double J_over_delta{0};
    std::vector<ExpansionRow> rows;
    std::vector<TailRow> tail;
    double max_rel_error{0};
    double max_tail_ratio{0};
};

inline ExpansionReport expansion_error_report(const ReducedParams& p) {
    const auto lr = exact_second_order(p);
    const auto model = effective_couplings(p, true);
    const auto s = shifted_detunings(p);
    ExpansionReport rep;
    auto branch = [&](double amp, double J, double delta) {
        if (amp != 0.0) rep.J_over_delta = std::max(rep.J_over_delta, std::abs(J / delta));
    };
    branch(p.A1, p.J_a, s.delta_a1);
    branch(p.A2, p.J_a, s.delta_a2);
    branch(p.B1, p.J_b, s.delta_b1);
    branch(p.B2, p.J_b, s.delta_b2);

    auto rel = [](double a, double b) {
        const double d = std::abs(a - b);
        if (d == 0.0) return 0.0;
        return b == 0.0 ? std::numeric_limits<double>::infinity() : d / std::abs(b);
    };
    const std::size_t N = p.n_sites;
    for (std::size_t r = 1; r <= std::min<std::size_t>(2, N / 2); ++r) {
        const auto [T, L] = effective_pair_coefficient(model, r);
        rep.rows.push_back({r, "transverse", T, lr.K_pm[r], rel(T, lr.K_pm[r])});
        rep.rows.push_back({r, "longitudinal", L, lr.K_zz[r], rel(L, lr.K_zz[r])});
    }
    for (const auto& row : rep.rows) rep.max_rel_error = std::max(rep.max_rel_error, row.rel_error);
    if (N / 2 >= 2) {
        auto ratio = [&](double k, double k2) {
            if (k == 0.0) return 0.0;
            const double den = rep.J_over_delta * std::abs(k2);
            return den == 0.0 ? std::numeric_limits<double>::infinity() : std::abs(k) / den;
        };
        for (std::size_t r = 3; r <= N / 2; ++r) {
            TailRow t{r, lr.K_pm[r], lr.K_zz[r], ratio(lr.K_pm[r], lr.K_pm[2]), ratio(lr.K_zz[r], lr.K_zz[2])};
            rep.max_tail_ratio = std::max({rep.max_tail_ratio, t.ratio_pm, t.ratio_zz});
            rep.tail.push_back(t);
        }
    }
    return rep;
}

}  // namespace ccspin
