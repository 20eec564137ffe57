// hamiltonians.hpp: Full driven atom-photon Hamiltonian, the J1-J2 XXZ
// effective Hamiltonian, and the exact momentum-sum second-order oracle.
//
// Site convention: library site s (0-based) is cavity j = s + 1, so the
// branch-b laser phase factor (-1)^j is -1 on site 0, +1 on site 1, ...

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "ccspin/errors.hpp"
#include "ccspin/hilbert.hpp"
#include "ccspin/params.hpp"

namespace ccspin {

inline double laser_phase_sign(std::size_t site) { return (site % 2 == 0) ? -1.0 : 1.0; }

struct FullHamiltonianSpec {
    ReducedParams params;
    BasisDescriptor basis;
    bool periodic{true};
    bool include_cross_term{true};
    bool include_local_terms{true};
};

// One harmonic component: contributes e^{i w t} M + e^{-i w t} M^dagger.
struct Drive {
    double omega{0};
    SparseOperator M;
};

struct FullHamiltonianTerms {
    SparseOperator static_part;
    std::vector<Drive> drives;
};

namespace detail {

inline void require_bonds_ok(std::size_t n_sites, bool periodic, const char* who) {
    if (periodic && n_sites < 3)
        throw ValidationError(std::string(who) +
                              ": periodic boundary conditions need n_sites >= 3 (N=2 would double-count the bond)");
}

inline std::vector<std::pair<std::size_t, std::size_t>> chain_bonds(std::size_t n, std::size_t dist,
                                                                    bool periodic) {
    std::vector<std::pair<std::size_t, std::size_t>> b;
    for (std::size_t j = 0; j < n; ++j) {
        if (periodic)
            b.emplace_back(j, (j + dist) % n);
        else if (j + dist < n)
            b.emplace_back(j, j + dist);
    }
    return b;
}

}  // namespace detail

inline FullHamiltonianTerms full_hamiltonian_terms(const FullHamiltonianSpec& spec) {
    const auto& p = spec.params;
    const auto& B = spec.basis;
    check_reduced(p);
    if (B.n_sites() != p.n_sites)
        throw ValidationError("full Hamiltonian: basis n_sites != params n_sites");
    detail::require_bonds_ok(p.n_sites, spec.periodic, "full Hamiltonian");
    const bool uses_a = p.A1 != 0 || p.A2 != 0 || p.J_a != 0;
    const bool uses_b = p.B1 != 0 || p.B2 != 0 || p.J_b != 0;
    if ((uses_a && B.n_max_a() < 1) || (uses_b && B.n_max_b() < 1))
        throw ValidationError("full Hamiltonian: photon cutoff must be >= 1 for an active cavity mode");

    const int na = B.n_max_a(), nb = B.n_max_b();
    const auto s11 = local::ket_bra(1, 1), s22 = local::ket_bra(2, 2);
    const auto s21 = local::ket_bra(2, 1), s12 = local::ket_bra(1, 2);
    const auto a = local::annihilate(na), ad = local::create(na), nA = local::number(na);
    const auto b = local::annihilate(nb), bd = local::create(nb), nB = local::number(nb);

    auto term = [&](std::initializer_list<LocalFactorOp> fs, double c) {
        return embed_product(std::span<const LocalFactorOp>(fs.begin(), fs.size()), B, c);
    };

    SparseOperator H0 = SparseOperator::zero(B);
    SparseOperator M1 = SparseOperator::zero(B), M2 = SparseOperator::zero(B), M3 = SparseOperator::zero(B);
    for (std::size_t j = 0; j < p.n_sites; ++j) {
        const double sg = laser_phase_sign(j);
        if (p.A1 != 0) M1 += term({{s11, j, Factor::atom}, {a, j, Factor::mode_a}}, -p.A1);
        if (p.B1 != 0) M1 += term({{s22, j, Factor::atom}, {b, j, Factor::mode_b}}, -sg * p.B1);
        if (p.A2 != 0) M2 += term({{s21, j, Factor::atom}, {a, j, Factor::mode_a}}, -p.A2);
        if (p.B2 != 0) M2 += term({{s12, j, Factor::atom}, {b, j, Factor::mode_b}}, -sg * p.B2);
        if (spec.include_cross_term) {
            if (p.A3 != 0) M3 += term({{s12, j, Factor::atom}}, -p.A3);
            if (p.B3 != 0) M3 += term({{s21, j, Factor::atom}}, -p.B3);
        }
        if (spec.include_local_terms) {
            if (p.level_shift_1 != 0) H0 += term({{s11, j, Factor::atom}}, -p.level_shift_1);
            if (p.level_shift_2 != 0) H0 += term({{s22, j, Factor::atom}}, -p.level_shift_2);
            if (p.stark_a != 0 && na > 0) H0 += term({{s11, j, Factor::atom}, {nA, j, Factor::mode_a}}, -p.stark_a);
            if (p.stark_b != 0 && nb > 0) H0 += term({{s22, j, Factor::atom}, {nB, j, Factor::mode_b}}, -p.stark_b);
        }
    }
    for (auto [j, l] : detail::chain_bonds(p.n_sites, 1, spec.periodic)) {
        if (p.J_a != 0) {
            H0 += term({{ad, j, Factor::mode_a}, {a, l, Factor::mode_a}}, p.J_a);
            H0 += term({{a, j, Factor::mode_a}, {ad, l, Factor::mode_a}}, p.J_a);
        }
        if (p.J_b != 0) {
            H0 += term({{bd, j, Factor::mode_b}, {b, l, Factor::mode_b}}, p.J_b);
            H0 += term({{b, j, Factor::mode_b}, {bd, l, Factor::mode_b}}, p.J_b);
        }
    }

    FullHamiltonianTerms out{std::move(H0), {}};
    if (M1.nonzeros() > 0) out.drives.push_back({p.delta1, std::move(M1)});
    if (M2.nonzeros() > 0) out.drives.push_back({p.delta2, std::move(M2)});
    if (M3.nonzeros() > 0) out.drives.push_back({p.delta3, std::move(M3)});
    return out;
}

// Time-dependent Hamiltonian with a frozen sparsity pattern: H(t) is
// assembled in place by refreshing the phases of each entry. at() and apply()
// mutate the cached values and must not be called concurrently on one object.
class DrivenHamiltonian {
public:
    DrivenHamiltonian(BasisTag tag, SparseOperator static_part, std::vector<Drive> drives)
        : tag_(tag), dim_(static_part.dimension()) {
        struct Entry {
            std::int64_t row, col;
            std::size_t comp;
            cplx value;
        };
        std::vector<Entry> entries;
        auto collect = [&](const SparseMat& m, std::size_t comp) {
            for (Eigen::Index k = 0; k < m.outerSize(); ++k)
                for (SparseMat::InnerIterator it(m, k); it; ++it)
                    entries.push_back({it.row(), it.col(), comp, it.value()});
        };
        if (!(static_part.tag() == tag)) throw BasisMismatch("DrivenHamiltonian: static part basis mismatch");
        collect(static_part.matrix(), 0);
        for (std::size_t f = 0; f < drives.size(); ++f) {
            static_part.require_same(drives[f].M);
            omegas_.push_back(drives[f].omega);
            collect(drives[f].M.matrix(), 1 + 2 * f);
            collect(SparseMat(drives[f].M.matrix().adjoint()), 2 + 2 * f);
        }
        std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
            return x.row != y.row ? x.row < y.row : x.col < y.col;
        });

        const std::size_t ncomp = 1 + 2 * drives.size();
        coef_.assign(ncomp, {});
        std::vector<Eigen::Triplet<cplx, std::int64_t>> pattern;
        for (std::size_t i = 0; i < entries.size();) {
            std::size_t k = i;
            for (auto& c : coef_) c.push_back(cplx{});
            while (k < entries.size() && entries[k].row == entries[i].row && entries[k].col == entries[i].col) {
                coef_[entries[k].comp].back() += entries[k].value;
                ++k;
            }
            pattern.emplace_back(entries[i].row, entries[i].col, cplx{1.0});
            i = k;
        }
        const auto n = static_cast<Eigen::Index>(dim_);
        H_.resize(n, n);
        H_.setFromTriplets(pattern.begin(), pattern.end());
        H_.makeCompressed();
        if (static_cast<std::size_t>(H_.nonZeros()) != coef_[0].size())
            throw NumericError("DrivenHamiltonian: pattern assembly mismatch");

        real_ = true;
        for (const auto& c : coef_)
            for (const auto& v : c)
                if (v.imag() != 0.0) real_ = false;

        // Triangle-inequality bound on the induced infinity norm for any t.
        std::vector<double> rows(dim_, 0.0);
        const auto* outer = H_.outerIndexPtr();
        for (std::size_t r = 0; r < dim_; ++r)
            for (auto k = outer[r]; k < outer[r + 1]; ++k)
                for (const auto& c : coef_) rows[r] += std::abs(c[static_cast<std::size_t>(k)]);
        norm_bound_ = rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
        refresh(0.0);
    }

    explicit DrivenHamiltonian(const FullHamiltonianSpec& spec)
        : DrivenHamiltonian(from_terms(spec.basis.tag(), full_hamiltonian_terms(spec))) {}

    const BasisTag& tag() const noexcept { return tag_; }
    std::size_t dimension() const noexcept { return dim_; }
    std::size_t nonzeros() const noexcept { return static_cast<std::size_t>(H_.nonZeros()); }
    const std::vector<double>& frequencies() const noexcept { return omegas_; }
    bool time_dependent() const noexcept {
        return std::any_of(omegas_.begin(), omegas_.end(), [](double w) { return w != 0.0; });
    }
    double max_frequency() const noexcept {
        double m = 0.0;
        for (double w : omegas_) m = std::max(m, std::abs(w));
        return m;
    }
    double norm_bound() const noexcept { return norm_bound_; }
    // True when every matrix coefficient is real, so H(-t) = conj(H(t)).
    bool real_coefficients() const noexcept { return real_; }

    const SparseMat& at(double t) {
        if (t != t_cached_) refresh(t);
        return H_;
    }
    SparseOperator operator_at(double t) { return SparseOperator(tag_, at(t)); }

    template <class In, class Out>
    void apply(double t, const In& x, Out& y) {
        y.noalias() = at(t) * x;
    }

    double hermiticity_residual(double t) { return operator_at(t).hermiticity_residual(); }

private:
    static DrivenHamiltonian from_terms(const BasisTag& tag, FullHamiltonianTerms terms) {
        return DrivenHamiltonian(tag, std::move(terms.static_part), std::move(terms.drives));
    }

    void refresh(double t) {
        cplx* v = H_.valuePtr();
        const std::size_t nnz = coef_[0].size();
        for (std::size_t k = 0; k < nnz; ++k) v[k] = coef_[0][k];
        for (std::size_t f = 0; f < omegas_.size(); ++f) {
            const cplx e = std::polar(1.0, omegas_[f] * t);
            const cplx ec = std::conj(e);
            const auto& cp = coef_[1 + 2 * f];
            const auto& cm = coef_[2 + 2 * f];
            for (std::size_t k = 0; k < nnz; ++k) v[k] += cp[k] * e + cm[k] * ec;
        }
        t_cached_ = t;
    }

    BasisTag tag_{};
    std::size_t dim_{0};
    std::vector<double> omegas_;
    std::vector<std::vector<cplx>> coef_;
    SparseMat H_;
    double t_cached_{std::numeric_limits<double>::quiet_NaN()};
    double norm_bound_{0};
    bool real_{true};
};

inline SparseOperator full_hamiltonian_at(const FullHamiltonianSpec& spec, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("full_hamiltonian_at: t must be finite");
    DrivenHamiltonian H(spec);
    return H.operator_at(t);
}

// Time-independent Hamiltonian adapter with the same provider interface.
class StaticHamiltonian {
public:
    explicit StaticHamiltonian(SparseOperator H) : H_(std::move(H)), bound_(H_.norm_inf()) {}
    const BasisTag& tag() const noexcept { return H_.tag(); }
    std::size_t dimension() const noexcept { return H_.dimension(); }
    bool time_dependent() const noexcept { return false; }
    double max_frequency() const noexcept { return 0.0; }
    double norm_bound() const noexcept { return bound_; }
    const SparseMat& at(double) const { return H_.matrix(); }
    const SparseOperator& op() const noexcept { return H_; }
    template <class In, class Out>
    void apply(double, const In& x, Out& y) const {
        y.noalias() = H_.matrix() * x;
    }
    double hermiticity_residual(double) const { return H_.hermiticity_residual(); }

private:
    SparseOperator H_;
    double bound_{0};
};

// ----------------------------------------------------------------------------
// Spin-only chains. Spin configurations are bitmasks with bit (N-1-j) holding
// site j (1 = |2> = up), matching the composite index order of a spin-only basis.

namespace detail {

inline bool spin_up(std::uint64_t cfg, std::size_t site, std::size_t n) { return (cfg >> (n - 1 - site)) & 1U; }
inline std::uint64_t flip_pair(std::uint64_t cfg, std::size_t i, std::size_t j, std::size_t n) {
    return cfg ^ ((std::uint64_t{1} << (n - 1 - i)) | (std::uint64_t{1} << (n - 1 - j)));
}

struct PairCoupling {
    std::size_t i, j;
    double transverse;    // coefficient of (SxSx + SySy)
    double longitudinal;  // coefficient of SzSz
};

// Builds the matrix of sum_pairs [T (SxSx+SySy) + L SzSz] + sum_j h_j Sz_j over
// the given sorted list of configurations (a closed magnetization sector or
// the full space).
inline SparseMat spin_chain_matrix(std::span<const PairCoupling> pairs, std::span<const double> field,
                                   std::span<const std::uint64_t> configs, std::size_t n) {
    std::vector<Eigen::Triplet<cplx, std::int64_t>> trips;
    trips.reserve(configs.size() * (pairs.size() + 1));
    auto index_of = [&](std::uint64_t c) -> std::int64_t {
        auto it = std::lower_bound(configs.begin(), configs.end(), c);
        if (it == configs.end() || *it != c) throw NumericError("spin sector not closed under Hamiltonian");
        return static_cast<std::int64_t>(it - configs.begin());
    };
    for (std::size_t col = 0; col < configs.size(); ++col) {
        const auto c = configs[col];
        double diag = 0.0;
        for (std::size_t j = 0; j < n; ++j) diag += field[j] * (spin_up(c, j, n) ? 0.5 : -0.5);
        for (const auto& pc : pairs) {
            const bool ui = spin_up(c, pc.i, n), uj = spin_up(c, pc.j, n);
            diag += pc.longitudinal * (ui == uj ? 0.25 : -0.25);
            if (ui != uj && pc.transverse != 0.0)
                trips.emplace_back(index_of(flip_pair(c, pc.i, pc.j, n)), static_cast<std::int64_t>(col),
                                   cplx{0.5 * pc.transverse});
        }
        if (diag != 0.0) trips.emplace_back(static_cast<std::int64_t>(col), static_cast<std::int64_t>(col), cplx{diag});
    }
    const auto d = static_cast<Eigen::Index>(configs.size());
    SparseMat m(d, d);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

inline std::vector<std::uint64_t> all_configs(std::size_t n) {
    std::vector<std::uint64_t> c(std::size_t{1} << n);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = k;
    return c;
}

}  // namespace detail

inline std::vector<detail::PairCoupling> effective_pairs(const EffectiveSpinModel& m) {
    detail::require_bonds_ok(m.n_sites, m.periodic, "effective Hamiltonian");
    std::vector<detail::PairCoupling> pairs;
    const std::pair<double, double> sigma[] = {{m.J1, m.lambda1}, {m.J2, m.lambda2}};
    for (std::size_t s = 0; s < 2; ++s) {
        const auto [J, L] = sigma[s];
        if (J == 0.0 && L == 0.0) continue;
        for (auto [i, j] : detail::chain_bonds(m.n_sites, s + 1, m.periodic)) pairs.push_back({i, j, J, L});
    }
    return pairs;
}

inline SparseOperator effective_hamiltonian(const EffectiveSpinModel& m, const BasisDescriptor& basis) {
    if (!basis.spin_only()) throw ValidationError("effective_hamiltonian: basis must have zero photon cutoffs");
    if (basis.n_sites() != m.n_sites) throw ValidationError("effective_hamiltonian: n_sites mismatch");
    if (m.h.size() != m.n_sites) throw ValidationError("effective_hamiltonian: field array length != n_sites");
    for (double x : {m.J1, m.J2, m.lambda1, m.lambda2}) detail::require_finite(x, "coupling");
    for (double x : m.h) detail::require_finite(x, "field");
    if (m.n_sites > 24) throw DimensionError("effective_hamiltonian: n_sites too large for a dense spin basis");
    const auto pairs = effective_pairs(m);
    const auto cfgs = detail::all_configs(m.n_sites);
    return SparseOperator(basis.tag(), detail::spin_chain_matrix(pairs, m.h, cfgs, m.n_sites));
}

// ----------------------------------------------------------------------------
// Momentum space and the exact second-order (un-truncated) couplings.

inline std::vector<double> momentum_spectrum(double J, std::size_t N) {
    if (N < 2) throw std::invalid_argument("momentum_spectrum: N must be >= 2");
    std::vector<double> t(N);
    for (std::size_t k = 1; k <= N; ++k)
        t[k - 1] = 2.0 * J * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N));
    return t;
}

// Eigenvalues (ascending) of the mode-a hopping term restricted to the
// sector with one photon and all atoms in |1>, computed from the full-model
// builder at cutoff 1.
inline std::vector<double> hopping_one_photon_spectrum(double J, std::size_t N, bool periodic) {
    FullHamiltonianSpec spec;
    spec.params.n_sites = N;
    spec.params.J_a = J;
    spec.basis = build_basis(N, 1, 0);
    spec.periodic = periodic;
    spec.include_cross_term = false;
    spec.include_local_terms = false;
    const Eigen::MatrixXcd H = full_hamiltonian_at(spec, 0.0).dense();
    std::vector<Eigen::Index> sector;
    for (std::size_t i = 0; i < spec.basis.dimension(); ++i) {
        const auto d = spec.basis.decode(i);
        int photons = 0;
        bool all_down = true;
        for (std::size_t j = 0; j < N; ++j) {
            photons += d[3 * j + 1];
            all_down = all_down && d[3 * j] == 0;
        }
        if (photons == 1 && all_down) sector.push_back(static_cast<Eigen::Index>(i));
    }
    const auto n = static_cast<Eigen::Index>(sector.size());
    Eigen::MatrixXcd h(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) h(r, c) = H(sector[r], sector[c]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return ev;
}

// Un-truncated pair couplings from summing over photon momenta. K_*[r] is the
// coefficient multiplying a single unordered pair at chain distance r
// (r = 0..N/2; entries above N/2 mirror r -> N - r). Index 0 is unused (0).
struct LongRangeSpinModel {
    std::vector<double> K_pm;  // coefficient of (SxSx + SySy)
    std::vector<double> K_zz;  // coefficient of SzSz
    double field{0};           // uniform Sz field from the separation-sum and j = l terms
    std::size_t n_sites{0};
};

// (1/N) sum_k e^{-i 2 pi k r / N} / (delta - 2 J cos(2 pi k / N)); real by k <-> N-k symmetry.
inline double photon_propagator(double delta, double J, std::size_t r, std::size_t N) {
    if (J == 0.0) return r % N == 0 ? 1.0 / delta : 0.0;
    double s = 0.0;
    for (std::size_t k = 1; k <= N; ++k) {
        const double q = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
        s += std::cos(q * static_cast<double>(r)) / (delta - 2.0 * J * std::cos(q));
    }
    return s / static_cast<double>(N);
}

inline LongRangeSpinModel exact_second_order(const ReducedParams& p) {
    check_reduced(p);
    const std::size_t N = p.n_sites;
    if (N < 3) throw ValidationError("exact_second_order: periodic chain needs n_sites >= 3");
    const auto s = shifted_detunings(p);
    const bool b_on = p.B1 != 0 || p.B2 != 0;
    if (b_on && N % 2 != 0)
        throw ValidationError("exact_second_order: the alternating branch-b phase requires even n_sites under PBC");
    auto pole_free = [](double delta, double J, const char* name) {
        if (!(std::abs(delta) > 2.0 * std::abs(J)))
            throw ValidationError(std::string("exact_second_order: resonance |") + name +
                                  "| <= 2|J| (photon band crosses the detuning)");
    };
    if (p.A1 != 0) pole_free(s.delta_a1, p.J_a, "delta_a1");
    if (p.A2 != 0) pole_free(s.delta_a2, p.J_a, "delta_a2");
    if (p.B1 != 0) pole_free(s.delta_b1, p.J_b, "delta_b1");
    if (p.B2 != 0) pole_free(s.delta_b2, p.J_b, "delta_b2");

    auto G = [&](double delta, double J, std::size_t r, double amp) {
        return amp == 0.0 ? 0.0 : photon_propagator(delta, J, r, N);
    };
    LongRangeSpinModel m;
    m.n_sites = N;
    m.K_pm.assign(N / 2 + 1, 0.0);
    m.K_zz.assign(N / 2 + 1, 0.0);
    const double a1 = p.A1 * p.A1, a2 = p.A2 * p.A2, b1 = p.B1 * p.B1, b2 = p.B2 * p.B2;
    for (std::size_t r = 1; r <= N / 2; ++r) {
        const double sgn = (r % 2 == 0) ? 1.0 : -1.0;
        m.K_zz[r] = 2.0 * (a1 * G(s.delta_a1, p.J_a, r, a1) + sgn * b1 * G(s.delta_b1, p.J_b, r, b1));
        m.K_pm[r] = 2.0 * (a2 * G(s.delta_a2, p.J_a, r, a2) + sgn * b2 * G(s.delta_b2, p.J_b, r, b2));
    }
    // Linear Sz pieces of (1/2 -+ Sz)(1/2 -+ Sz) summed over all separations,
    // plus S+S- / S-S+ at j = l.
    double sum_a1 = 0.0, alt_b1 = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
        sum_a1 += G(s.delta_a1, p.J_a, r, a1);
        alt_b1 += ((r % 2 == 0) ? 1.0 : -1.0) * G(s.delta_b1, p.J_b, r, b1);
    }
    m.field = -a1 * sum_a1 + b1 * alt_b1 + a2 * G(s.delta_a2, p.J_a, 0, a2) - b2 * G(s.delta_b2, p.J_b, 0, b2);
    return m;
}

// Number of unordered pairs at chain distance r on a ring of N sites.
inline std::size_t ring_pairs_at(std::size_t r, std::size_t N) { return (2 * r == N) ? N / 2 : N; }

// Per-pair coefficients of a J1-J2 model at chain distance r on a ring (the
// sigma = 2 sum of an N = 4 ring hits each antipodal pair twice).
inline std::pair<double, double> effective_pair_coefficient(const EffectiveSpinModel& m, std::size_t r) {
    const std::size_t N = m.n_sites;
    double T = 0.0, L = 0.0;
    const std::pair<double, double> sigma[] = {{m.J1, m.lambda1}, {m.J2, m.lambda2}};
    for (std::size_t s = 0; s < 2; ++s) {
        for (auto [i, j] : detail::chain_bonds(N, s + 1, true)) {
            const std::size_t d = (j + N - i) % N;
            if (std::min(d, N - d) == r) {
                T += sigma[s].first;
                L += sigma[s].second;
            }
        }
    }
    const double np = static_cast<double>(ring_pairs_at(r, N));
    return {T / np, L / np};
}

inline SparseOperator long_range_hamiltonian(const LongRangeSpinModel& m, const BasisDescriptor& basis,
                                             bool include_field = true) {
    if (!basis.spin_only() || basis.n_sites() != m.n_sites)
        throw ValidationError("long_range_hamiltonian: need a spin-only basis with matching n_sites");
    const std::size_t N = m.n_sites;
    std::vector<detail::PairCoupling> pairs;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j) {
            const std::size_t r = std::min(j - i, N - (j - i));
            pairs.push_back({i, j, m.K_pm[r], m.K_zz[r]});
        }
    std::vector<double> h(N, include_field ? m.field : 0.0);
    return SparseOperator(basis.tag(), detail::spin_chain_matrix(pairs, h, detail::all_configs(N), N));
}

}  // namespace ccspin
