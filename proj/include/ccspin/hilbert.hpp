// hilbert.hpp: Composite spin ⊗ Fock bases, sparse operators and states on them.
//
// Index ordering (frozen): site-major, and within a site the factor order is
// (atom, mode a, mode b). Site 0 is the most significant digit, mode b of the
// last site the least significant, so a product operator A_0 ⊗ A_1 ⊗ ... is
// the Kronecker product in that order. The atom digit is 0 for |1> (spin
// down) and 1 for |2> (spin up).
//
// An optional total-photon cap restricts the basis to product states with at
// most `max_total_photons` photons summed over all modes. Capped bases keep
// the lexicographic order of the uncapped enumeration; operators embedded on
// them are projected (matrix elements leaving the basis are dropped).

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ccspin/errors.hpp"

namespace ccspin {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor, std::int64_t>;

enum class Factor { atom = 0, mode_a = 1, mode_b = 2 };

inline constexpr std::size_t kDefaultMaxDimension = std::size_t{1} << 22;

// Value identity of a basis; operators and states carry one so that mixing
// objects from different bases is caught.
struct BasisTag {
    std::size_t n_sites{0};
    int n_max_a{0};
    int n_max_b{0};
    int photon_cap{-1};  // -1: uncapped

    friend bool operator==(const BasisTag&, const BasisTag&) = default;
};

inline std::string describe(const BasisTag& t) {
    std::string s = "N=" + std::to_string(t.n_sites) + " na<=" + std::to_string(t.n_max_a) +
                    " nb<=" + std::to_string(t.n_max_b);
    if (t.photon_cap >= 0) s += " total<=" + std::to_string(t.photon_cap);
    return s;
}

class BasisDescriptor {
public:
    BasisDescriptor() = default;

    BasisDescriptor(std::size_t n_sites, int n_max_a, int n_max_b,
                    std::optional<int> max_total_photons = std::nullopt,
                    std::size_t max_dimension = kDefaultMaxDimension) {
        if (n_sites < 1) throw std::invalid_argument("build_basis: n_sites must be >= 1");
        if (n_max_a < 0 || n_max_b < 0)
            throw std::invalid_argument("build_basis: photon cutoffs must be >= 0");
        if (max_total_photons && *max_total_photons < 0)
            throw std::invalid_argument("build_basis: photon cap must be >= 0");
        tag_.n_sites = n_sites;
        tag_.n_max_a = n_max_a;
        tag_.n_max_b = n_max_b;
        tag_.photon_cap = max_total_photons ? *max_total_photons : -1;

        radix_ = {2, static_cast<std::uint64_t>(n_max_a) + 1, static_cast<std::uint64_t>(n_max_b) + 1};
        const std::uint64_t per_site = radix_[0] * radix_[1] * radix_[2];
        // Product-space size with overflow guard.
        product_dim_ = 1;
        for (std::size_t j = 0; j < n_sites; ++j) {
            if (product_dim_ > std::numeric_limits<std::uint64_t>::max() / per_site)
                throw DimensionError("build_basis: dimension overflow; reduce N or cutoffs");
            product_dim_ *= per_site;
        }
        const bool cap_active =
            max_total_photons && *max_total_photons < static_cast<int>(n_sites) * (n_max_a + n_max_b);
        if (!cap_active) {
            tag_.photon_cap = -1;
            if (product_dim_ > max_dimension)
                throw DimensionError("build_basis: dimension " + std::to_string(product_dim_) +
                                     " exceeds cap " + std::to_string(max_dimension) +
                                     "; reduce N or cutoffs");
            dim_ = static_cast<std::size_t>(product_dim_);
            return;
        }
        enumerate_capped(static_cast<std::size_t>(*max_total_photons), max_dimension);
    }

    const BasisTag& tag() const noexcept { return tag_; }
    std::size_t n_sites() const noexcept { return tag_.n_sites; }
    int n_max_a() const noexcept { return tag_.n_max_a; }
    int n_max_b() const noexcept { return tag_.n_max_b; }
    bool capped() const noexcept { return tag_.photon_cap >= 0; }
    std::size_t dimension() const noexcept { return dim_; }
    bool spin_only() const noexcept { return tag_.n_max_a == 0 && tag_.n_max_b == 0; }
    std::size_t factor_dim(Factor f) const noexcept {
        return static_cast<std::size_t>(radix_[static_cast<int>(f)]);
    }
    std::size_t digit_count() const noexcept { return 3 * tag_.n_sites; }

    // Digits are laid out as [atom_0, a_0, b_0, atom_1, ...].
    std::vector<int> decode(std::size_t index) const {
        if (index >= dim_) throw std::out_of_range("decode: index out of range");
        std::uint64_t p = capped() ? product_index_[index] : index;
        std::vector<int> d(digit_count());
        for (std::size_t k = digit_count(); k-- > 0;) {
            const auto r = radix_[k % 3];
            d[k] = static_cast<int>(p % r);
            p /= r;
        }
        return d;
    }

    // Returns nullopt when the digits are outside the (possibly capped) basis.
    std::optional<std::size_t> encode(std::span<const int> digits) const {
        if (digits.size() != digit_count()) throw std::invalid_argument("encode: wrong digit count");
        std::uint64_t p = 0;
        for (std::size_t k = 0; k < digits.size(); ++k) {
            const auto r = radix_[k % 3];
            if (digits[k] < 0 || static_cast<std::uint64_t>(digits[k]) >= r) return std::nullopt;
            p = p * r + static_cast<std::uint64_t>(digits[k]);
        }
        return from_product_index(p);
    }

    std::optional<std::size_t> from_product_index(std::uint64_t p) const {
        if (!capped()) {
            if (p >= product_dim_) return std::nullopt;
            return static_cast<std::size_t>(p);
        }
        auto it = std::lower_bound(product_index_.begin(), product_index_.end(), p);
        if (it == product_index_.end() || *it != p) return std::nullopt;
        return static_cast<std::size_t>(it - product_index_.begin());
    }

    // Index of a spin configuration (atom digits, 0=|1>, 1=|2>) with all modes empty.
    std::size_t spin_vacuum_index(std::span<const int> atom_digits) const {
        if (atom_digits.size() != tag_.n_sites)
            throw std::invalid_argument("spin pattern length must equal n_sites");
        std::vector<int> d(digit_count(), 0);
        for (std::size_t j = 0; j < tag_.n_sites; ++j) d[3 * j] = atom_digits[j];
        return *encode(d);
    }

private:
    void enumerate_capped(std::size_t cap, std::size_t max_dimension) {
        // Depth-first over digits in lexicographic order keeps product indices sorted.
        product_index_.clear();
        auto rec = [&](auto&& self, std::size_t k, std::size_t photons, std::uint64_t p) -> void {
            if (k == digit_count()) {
                product_index_.push_back(p);
                if (product_index_.size() > max_dimension)
                    throw DimensionError("build_basis: capped dimension exceeds " +
                                         std::to_string(max_dimension) + "; reduce N or cutoffs");
                return;
            }
            const auto r = radix_[k % 3];
            for (std::uint64_t v = 0; v < r; ++v) {
                const std::size_t ph = photons + ((k % 3 == 0) ? 0 : v);
                if (ph > cap) break;
                self(self, k + 1, ph, p * r + v);
            }
        };
        rec(rec, 0, 0, 0);
        dim_ = product_index_.size();
    }

    BasisTag tag_{};
    std::array<std::uint64_t, 3> radix_{2, 1, 1};
    std::uint64_t product_dim_{0};
    std::size_t dim_{0};
    std::vector<std::uint64_t> product_index_;
};

inline BasisDescriptor build_basis(std::size_t n_sites, int n_max_a, int n_max_b,
                                   std::optional<int> max_total_photons = std::nullopt,
                                   std::size_t max_dimension = kDefaultMaxDimension) {
    return BasisDescriptor(n_sites, n_max_a, n_max_b, max_total_photons, max_dimension);
}

inline BasisDescriptor spin_basis(std::size_t n_sites) { return BasisDescriptor(n_sites, 0, 0); }

// ----------------------------------------------------------------------------
// Local operators

namespace local {

inline Eigen::MatrixXcd sz() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = -0.5;
    m(1, 1) = 0.5;
    return m;
}
// S+ = |2><1|
inline Eigen::MatrixXcd splus() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}
inline Eigen::MatrixXcd sminus() { return splus().adjoint(); }
// |m><n| on the atom, m,n in {1,2}
inline Eigen::MatrixXcd ket_bra(int m, int n) {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(2, 2);
    x(m - 1, n - 1) = 1.0;
    return x;
}
inline Eigen::MatrixXcd annihilate(int n_max) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return m;
}
inline Eigen::MatrixXcd create(int n_max) { return annihilate(n_max).adjoint(); }
inline Eigen::MatrixXcd number(int n_max) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) m(n, n) = n;
    return m;
}

}  // namespace local

// ----------------------------------------------------------------------------
// SparseOperator

class SparseOperator {
public:
    SparseOperator() = default;
    SparseOperator(BasisTag tag, SparseMat m) : tag_(tag), m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw std::invalid_argument("SparseOperator: matrix must be square");
        m_.makeCompressed();
    }

    static SparseOperator zero(const BasisDescriptor& b) {
        const auto n = static_cast<Eigen::Index>(b.dimension());
        return SparseOperator(b.tag(), SparseMat(n, n));
    }
    static SparseOperator identity(const BasisDescriptor& b) {
        const auto n = static_cast<Eigen::Index>(b.dimension());
        SparseMat m(n, n);
        m.setIdentity();
        return SparseOperator(b.tag(), std::move(m));
    }

    const BasisTag& tag() const noexcept { return tag_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const SparseMat& matrix() const noexcept { return m_; }
    std::size_t nonzeros() const noexcept { return static_cast<std::size_t>(m_.nonZeros()); }

    SparseOperator adjoint() const { return SparseOperator(tag_, SparseMat(m_.adjoint())); }

    // max |H - H^dagger| entrywise
    double hermiticity_residual() const {
        SparseMat d = m_ - SparseMat(m_.adjoint());
        double r = 0.0;
        for (Eigen::Index k = 0; k < d.outerSize(); ++k)
            for (SparseMat::InnerIterator it(d, k); it; ++it) r = std::max(r, std::abs(it.value()));
        return r;
    }

    // max |entry|
    double max_abs() const {
        double r = 0.0;
        for (Eigen::Index k = 0; k < m_.outerSize(); ++k)
            for (SparseMat::InnerIterator it(m_, k); it; ++it) r = std::max(r, std::abs(it.value()));
        return r;
    }

    // Maximum absolute row sum, an upper bound on the spectral norm for Hermitian operators.
    double norm_inf() const {
        double r = 0.0;
        for (Eigen::Index k = 0; k < m_.outerSize(); ++k) {
            double s = 0.0;
            for (SparseMat::InnerIterator it(m_, k); it; ++it) s += std::abs(it.value());
            r = std::max(r, s);
        }
        return r;
    }

    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(m_); }

    SparseOperator& operator+=(const SparseOperator& o) {
        require_same(o);
        m_ += o.m_;
        m_.makeCompressed();
        return *this;
    }
    SparseOperator& operator-=(const SparseOperator& o) {
        require_same(o);
        m_ -= o.m_;
        m_.makeCompressed();
        return *this;
    }
    SparseOperator& operator*=(cplx s) {
        m_ *= s;
        return *this;
    }
    friend SparseOperator operator+(SparseOperator a, const SparseOperator& b) { return a += b; }
    friend SparseOperator operator-(SparseOperator a, const SparseOperator& b) { return a -= b; }
    friend SparseOperator operator*(cplx s, SparseOperator a) { return a *= s; }
    friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
        a.require_same(b);
        return SparseOperator(a.tag_, SparseMat(a.m_ * b.m_));
    }

    void require_same(const SparseOperator& o) const {
        if (!(tag_ == o.tag_))
            throw BasisMismatch("operator basis mismatch: " + describe(tag_) + " vs " + describe(o.tag_));
    }

private:
    BasisTag tag_{};
    SparseMat m_;
};

inline SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
    return a * b - b * a;
}

// ----------------------------------------------------------------------------
// QuantumState

class QuantumState {
public:
    QuantumState() = default;

    // Normalized physical state; throws if |norm - 1| > tol.
    static QuantumState normalized(BasisTag tag, Eigen::VectorXcd amps, double tol = 1e-9) {
        const double n = amps.norm();
        if (std::abs(n - 1.0) > tol)
            throw std::invalid_argument("QuantumState: amplitude vector not normalized (norm=" +
                                        std::to_string(n) + ")");
        return QuantumState(tag, std::move(amps));
    }
    // Arbitrary vector (e.g. the result of applying an operator).
    static QuantumState raw(BasisTag tag, Eigen::VectorXcd amps) {
        return QuantumState(tag, std::move(amps));
    }
    static QuantumState basis_state(const BasisDescriptor& b, std::size_t index) {
        if (index >= b.dimension()) throw std::out_of_range("basis_state: index out of range");
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b.dimension()));
        v(static_cast<Eigen::Index>(index)) = 1.0;
        return QuantumState(b.tag(), std::move(v));
    }

    const BasisTag& tag() const noexcept { return tag_; }
    const Eigen::VectorXcd& amplitudes() const noexcept { return v_; }
    Eigen::VectorXcd& amplitudes() noexcept { return v_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(v_.size()); }
    double norm() const { return v_.norm(); }

private:
    QuantumState(BasisTag tag, Eigen::VectorXcd v) : tag_(tag), v_(std::move(v)) {}
    BasisTag tag_{};
    Eigen::VectorXcd v_;
};

// ----------------------------------------------------------------------------
// Embedding

struct LocalFactorOp {
    Eigen::MatrixXcd op;
    std::size_t site{0};
    Factor which{Factor::atom};
};

// Product of local operators acting on distinct tensor factors, identity
// elsewhere. Factors must be pairwise distinct (site, which) slots.
inline SparseOperator embed_product(std::span<const LocalFactorOp> factors, const BasisDescriptor& basis,
                                    cplx scale = 1.0) {
    struct Slot {
        std::size_t digit;
        const Eigen::MatrixXcd* op;
    };
    std::vector<Slot> slots;
    for (const auto& f : factors) {
        if (f.site >= basis.n_sites()) throw std::out_of_range("embed: site out of range");
        const auto fd = static_cast<Eigen::Index>(basis.factor_dim(f.which));
        if (f.op.rows() != fd || f.op.cols() != fd)
            throw std::invalid_argument("embed: local operator dimension " + std::to_string(f.op.rows()) +
                                        " does not match factor dimension " + std::to_string(fd));
        const std::size_t digit = 3 * f.site + static_cast<std::size_t>(f.which);
        for (const auto& s : slots)
            if (s.digit == digit) throw std::invalid_argument("embed: repeated tensor factor");
        slots.push_back({digit, &f.op});
    }

    const std::size_t dim = basis.dimension();
    std::vector<Eigen::Triplet<cplx, std::int64_t>> trips;
    trips.reserve(dim);
    std::vector<int> in, out;
    for (std::size_t col = 0; col < dim; ++col) {
        in = basis.decode(col);
        // Enumerate all output digit combinations reachable through the slots.
        out = in;
        auto rec = [&](auto&& self, std::size_t s, cplx amp) -> void {
            if (s == slots.size()) {
                if (auto row = basis.encode(out))
                    trips.emplace_back(static_cast<std::int64_t>(*row), static_cast<std::int64_t>(col),
                                       scale * amp);
                return;
            }
            const auto& op = *slots[s].op;
            const int d = in[slots[s].digit];
            for (Eigen::Index r = 0; r < op.rows(); ++r) {
                const cplx v = op(r, d);
                if (v == cplx{}) continue;
                out[slots[s].digit] = static_cast<int>(r);
                self(self, s + 1, amp * v);
            }
            out[slots[s].digit] = d;
        };
        rec(rec, 0, cplx{1.0});
    }
    const auto n = static_cast<Eigen::Index>(dim);
    SparseMat m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return SparseOperator(basis.tag(), std::move(m));
}

inline SparseOperator embed_site_operator(const Eigen::MatrixXcd& local_op, std::size_t site, Factor which,
                                          const BasisDescriptor& basis) {
    const LocalFactorOp f{local_op, site, which};
    return embed_product(std::span<const LocalFactorOp>(&f, 1), basis);
}

// ----------------------------------------------------------------------------
// Products with states

inline QuantumState matvec(const SparseOperator& op, const QuantumState& psi) {
    if (!(op.tag() == psi.tag()))
        throw BasisMismatch("matvec: basis mismatch: " + describe(op.tag()) + " vs " + describe(psi.tag()));
    return QuantumState::raw(psi.tag(), op.matrix() * psi.amplitudes());
}

inline cplx expectation(const SparseOperator& op, const QuantumState& psi) {
    if (!(op.tag() == psi.tag()))
        throw BasisMismatch("expectation: basis mismatch");
    return psi.amplitudes().dot(op.matrix() * psi.amplitudes());
}

}  // namespace ccspin
