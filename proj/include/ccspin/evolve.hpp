// evolve.hpp: Time propagation and observables.
//
// The default integrator samples H at the midpoint of each step and applies
// exp(-i H(t + h/2) h) with a Taylor expansion run to machine precision
// (second-order Magnus). Explicit RK4 is kept as a cross-check. States are
// never renormalized; norm drift is reported and bounded.
//
// For periodic drives with commensurate frequencies the one-period product of
// midpoint exponentials can be formed once and applied repeatedly
// (propagate_stroboscopic). This is the same discrete propagator as stepping
// through every period, evaluated in a different order.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ccspin/errors.hpp"
#include "ccspin/hamiltonians.hpp"
#include "ccspin/hilbert.hpp"

namespace ccspin {

enum class Method { midpoint_exponential, rk4 };

struct PropagatorConfig {
    Method method{Method::midpoint_exponential};
    double step{0.0};                      // ns
    std::size_t sample_every{1};           // steps between samples
    double max_norm_drift{1e-8};
    double phase_resolution_factor{0.02};  // step <= factor / max |drive frequency|
    double expm_tolerance{1e-15};          // relative Taylor truncation per step
};

template <class H>
concept HamiltonianProvider = requires(H& h, double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    { h.tag() } -> std::convertible_to<BasisTag>;
    { h.time_dependent() } -> std::convertible_to<bool>;
    { h.max_frequency() } -> std::convertible_to<double>;
    { h.norm_bound() } -> std::convertible_to<double>;
    { h.hermiticity_residual(t) } -> std::convertible_to<double>;
    h.apply(t, x, y);
};

inline double default_full_step(const ReducedParams& p, double factor = 0.02) {
    const double w = std::max({std::abs(p.delta1), std::abs(p.delta2), std::abs(p.delta3)});
    if (w == 0.0) throw ValidationError("default_full_step: all two-photon detunings vanish");
    return factor / w;
}

inline double default_effective_step(const SparseOperator& H) {
    const double n = H.norm_inf();
    return n == 0.0 ? 1.0 : 0.01 / n;
}

// ----------------------------------------------------------------------------
// Observables

// Per-index digits cached for fast diagonal observables.
class ObservableTable {
public:
    explicit ObservableTable(const BasisDescriptor& b) : tag_(b.tag()), n_(b.n_sites()), dim_(b.dimension()) {
        digits_.resize(dim_ * 3 * n_);
        for (std::size_t i = 0; i < dim_; ++i) {
            const auto d = b.decode(i);
            for (std::size_t k = 0; k < 3 * n_; ++k) digits_[i * 3 * n_ + k] = static_cast<std::uint8_t>(d[k]);
        }
    }
    const BasisTag& tag() const noexcept { return tag_; }
    std::size_t n_sites() const noexcept { return n_; }

    int atom(std::size_t i, std::size_t site) const { return digits_[i * 3 * n_ + 3 * site]; }
    int photons_a(std::size_t i, std::size_t site) const { return digits_[i * 3 * n_ + 3 * site + 1]; }
    int photons_b(std::size_t i, std::size_t site) const { return digits_[i * 3 * n_ + 3 * site + 2]; }

    struct Snapshot {
        std::vector<double> p1, na, nb;
        double norm{0}, mz{0};
    };

    Snapshot measure(const Eigen::VectorXcd& psi) const {
        if (static_cast<std::size_t>(psi.size()) != dim_) throw BasisMismatch("observable: dimension mismatch");
        Snapshot s;
        s.p1.assign(n_, 0.0);
        s.na.assign(n_, 0.0);
        s.nb.assign(n_, 0.0);
        double norm2 = 0.0, mz = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double w = std::norm(psi(static_cast<Eigen::Index>(i)));
            if (w == 0.0) continue;
            norm2 += w;
            const std::uint8_t* d = &digits_[i * 3 * n_];
            for (std::size_t j = 0; j < n_; ++j) {
                if (d[3 * j] == 0) {
                    s.p1[j] += w;
                    mz -= 0.5 * w;
                } else {
                    mz += 0.5 * w;
                }
                s.na[j] += w * d[3 * j + 1];
                s.nb[j] += w * d[3 * j + 2];
            }
        }
        s.norm = std::sqrt(norm2);
        s.mz = mz;
        return s;
    }

private:
    BasisTag tag_;
    std::size_t n_{0}, dim_{0};
    std::vector<std::uint8_t> digits_;
};

inline double occupation(const QuantumState& psi, std::size_t site, const BasisDescriptor& b) {
    if (!(psi.tag() == b.tag())) throw BasisMismatch("occupation: basis mismatch");
    if (site >= b.n_sites()) throw std::out_of_range("occupation: site out of range");
    return ObservableTable(b).measure(psi.amplitudes()).p1[site];
}

struct PhotonNumbers {
    std::vector<double> a, b;
};

inline PhotonNumbers photon_numbers(const QuantumState& psi, const BasisDescriptor& b) {
    if (!(psi.tag() == b.tag())) throw BasisMismatch("photon_numbers: basis mismatch");
    auto s = ObservableTable(b).measure(psi.amplitudes());
    return {std::move(s.na), std::move(s.nb)};
}

inline double magnetization(const QuantumState& psi, const BasisDescriptor& b) {
    if (!(psi.tag() == b.tag())) throw BasisMismatch("magnetization: basis mismatch");
    return ObservableTable(b).measure(psi.amplitudes()).mz;
}

// Product state of a spin pattern over {'1','2'} with all cavity modes empty.
inline QuantumState spin_pattern_state(const BasisDescriptor& b, const std::string& pattern) {
    if (pattern.size() != b.n_sites())
        throw ValidationError("spin pattern length " + std::to_string(pattern.size()) + " != n_sites " +
                              std::to_string(b.n_sites()));
    std::vector<int> atoms(pattern.size());
    for (std::size_t j = 0; j < pattern.size(); ++j) {
        if (pattern[j] != '1' && pattern[j] != '2')
            throw ValidationError("spin pattern must use only '1' and '2'");
        atoms[j] = pattern[j] == '2' ? 1 : 0;
    }
    return QuantumState::basis_state(b, b.spin_vacuum_index(atoms));
}

// ----------------------------------------------------------------------------
// TimeSeries

struct TimeSeries {
    std::size_t n_sites{0};
    std::vector<double> t;
    std::vector<std::vector<double>> p1, na, nb;  // [site][sample]
    std::vector<double> norm, mz;

    explicit TimeSeries(std::size_t n = 0) : n_sites(n), p1(n), na(n), nb(n) {}

    std::size_t size() const noexcept { return t.size(); }

    void push(double time, const ObservableTable::Snapshot& s) {
        t.push_back(time);
        for (std::size_t j = 0; j < n_sites; ++j) {
            p1[j].push_back(s.p1[j]);
            na[j].push_back(s.na[j]);
            nb[j].push_back(s.nb[j]);
        }
        norm.push_back(s.norm);
        mz.push_back(s.mz);
    }

    double max_norm_drift() const {
        double d = 0.0;
        for (double n : norm) d = std::max(d, std::abs(n - 1.0));
        return d;
    }
    double max_photon_number() const {
        double m = 0.0;
        for (std::size_t j = 0; j < n_sites; ++j)
            for (std::size_t k = 0; k < t.size(); ++k) m = std::max({m, na[j][k], nb[j][k]});
        return m;
    }
};

// ----------------------------------------------------------------------------
// Steppers

namespace detail {

// X <- exp(-i h H) X with H frozen at time t. Works on vectors and column blocks.
template <class Provider, class Block>
void expm_step(Provider& H, double t, double h, Block& X, double tol) {
    const double bound = H.norm_bound() * std::abs(h);
    const int substeps = std::max(1, static_cast<int>(std::ceil(bound / 0.5)));
    const double hs = h / substeps;
    Block term(X.rows(), X.cols()), next(X.rows(), X.cols()), acc(X.rows(), X.cols());
    for (int s = 0; s < substeps; ++s) {
        const double scale = X.norm();
        if (scale == 0.0) return;
        acc = X;
        term = X;
        for (int k = 1; k <= 60; ++k) {
            H.apply(t, term, next);
            term = next * cplx(0.0, -hs / k);
            acc += term;
            if (term.norm() <= tol * scale) break;
            if (k == 60) throw NumericError("expm_step: Taylor series did not converge");
        }
        X.swap(acc);
    }
}

template <class Provider>
void rk4_step(Provider& H, double t, double h, Eigen::VectorXcd& y) {
    const cplx mi(0.0, -1.0);
    Eigen::VectorXcd k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    H.apply(t, y, k1);
    k1 *= mi;
    tmp = y + 0.5 * h * k1;
    H.apply(t + 0.5 * h, tmp, k2);
    k2 *= mi;
    tmp = y + 0.5 * h * k2;
    H.apply(t + 0.5 * h, tmp, k3);
    k3 *= mi;
    tmp = y + h * k3;
    H.apply(t + h, tmp, k4);
    k4 *= mi;
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class Provider>
void require_hermitian(Provider& H, double t) {
    const double r = H.hermiticity_residual(t);
    if (r > 1e-12 * std::max(1.0, H.norm_bound()))
        throw NumericError("propagate: non-Hermitian Hamiltonian detected (residual " + std::to_string(r) + ")");
}

template <class Provider>
void check_step(const Provider& H, const PropagatorConfig& cfg) {
    if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) throw ValidationError("propagate: step must be > 0");
    if (cfg.sample_every == 0) throw ValidationError("propagate: sample_every must be >= 1");
    if (H.time_dependent()) {
        const double limit = cfg.phase_resolution_factor / H.max_frequency();
        if (cfg.step > limit * (1.0 + 1e-12))
            throw ValidationError("propagate: step " + std::to_string(cfg.step) +
                                  " ns exceeds phase-resolution bound " + std::to_string(limit) + " ns");
    }
}

inline void check_norm(double n, double max_drift, double t) {
    if (!(std::abs(n - 1.0) <= max_drift))
        throw NumericError("propagate: norm drift " + std::to_string(std::abs(n - 1.0)) + " at t=" +
                           std::to_string(t) + " ns exceeds limit; reduce the step");
}

}  // namespace detail

// Propagates psi0 from t=0 to t_final. The grid uses ceil(t_final/step) equal
// steps, so the actual step never exceeds cfg.step.
template <HamiltonianProvider Provider>
TimeSeries propagate(Provider& H, const BasisDescriptor& basis, const QuantumState& psi0, double t_final,
                     const PropagatorConfig& cfg, QuantumState* final_state = nullptr) {
    if (!(H.tag() == basis.tag()) || !(psi0.tag() == basis.tag()))
        throw BasisMismatch("propagate: Hamiltonian, state and basis must share a basis");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) throw ValidationError("propagate: initial state not normalized");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ValidationError("propagate: t_final must be >= 0");
    detail::check_step(H, cfg);

    const std::size_t steps =
        t_final == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_final / cfg.step - 1e-9));
    const double h = steps == 0 ? 0.0 : t_final / static_cast<double>(steps);
    detail::require_hermitian(H, 0.0);
    if (steps > 0) detail::require_hermitian(H, 0.5 * h);

    const ObservableTable obs(basis);
    TimeSeries ts(basis.n_sites());
    Eigen::VectorXcd psi = psi0.amplitudes();
    ts.push(0.0, obs.measure(psi));
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = h * static_cast<double>(s);
        if (cfg.method == Method::midpoint_exponential)
            detail::expm_step(H, t + 0.5 * h, h, psi, cfg.expm_tolerance);
        else
            detail::rk4_step(H, t, h, psi);
        const double tn = h * static_cast<double>(s + 1);
        const bool sample = ((s + 1) % cfg.sample_every == 0) || (s + 1 == steps);
        if (sample) {
            auto snap = obs.measure(psi);
            detail::check_norm(snap.norm, cfg.max_norm_drift, tn);
            ts.push(tn, snap);
        } else if ((s + 1) % 64 == 0) {
            detail::check_norm(psi.norm(), cfg.max_norm_drift, tn);
        }
    }
    if (final_state) *final_state = QuantumState::raw(basis.tag(), std::move(psi));
    return ts;
}

// ----------------------------------------------------------------------------
// Stroboscopic propagation for commensurate periodic drives

// Smallest T > 0 with w*T in 2*pi*Z for every frequency, when the ratios are
// rational with denominators <= max_den. Zero frequencies are ignored.
inline std::optional<double> commensurate_period(const std::vector<double>& freqs, int max_den = 1000) {
    std::vector<double> w;
    for (double f : freqs)
        if (f != 0.0) w.push_back(std::abs(f));
    if (w.empty()) return std::nullopt;
    const double base = *std::min_element(w.begin(), w.end());
    std::int64_t L = 1;
    std::vector<std::pair<std::int64_t, std::int64_t>> frac;
    for (double x : w) {
        const double r = x / base;
        bool found = false;
        for (std::int64_t q = 1; q <= max_den; ++q) {
            const double pq = r * static_cast<double>(q);
            if (std::abs(pq - std::round(pq)) < 1e-9 * std::max(1.0, pq)) {
                frac.emplace_back(static_cast<std::int64_t>(std::llround(pq)), q);
                L = std::lcm(L, q);
                found = true;
                break;
            }
        }
        if (!found) return std::nullopt;
    }
    std::int64_t g = 0;
    for (auto [p, q] : frac) g = std::gcd(g, p * (L / q));
    return 2.0 * std::numbers::pi * static_cast<double>(L) / (base * static_cast<double>(g));
}

struct FloquetOperator {
    double period{0};
    std::size_t steps{0};  // midpoint steps per period
    Eigen::MatrixXcd U;
};

// One-period propagator from `steps` midpoint exponentials (steps chosen from
// cfg.step, rounded up to an even count). When H has real coefficients,
// H(T - t) = conj(H(t)) and the second half-period equals the transpose of
// the first half, so only half the steps are integrated.
inline FloquetOperator floquet_operator(DrivenHamiltonian& H, double period, const PropagatorConfig& cfg,
                                        std::size_t max_dimension = 4096) {
    detail::check_step(H, cfg);
    if (cfg.method != Method::midpoint_exponential)
        throw ValidationError("floquet_operator: only the midpoint-exponential method is supported");
    if (H.dimension() > max_dimension)
        throw DimensionError("floquet_operator: dimension " + std::to_string(H.dimension()) +
                             " too large for a dense one-period propagator");
    for (double w : H.frequencies()) {
        const double c = w * period / (2.0 * std::numbers::pi);
        if (std::abs(c - std::round(c)) > 1e-9 * std::max(1.0, std::abs(c)))
            throw ValidationError("floquet_operator: period is not commensurate with the drive frequencies");
    }
    detail::require_hermitian(H, 0.0);
    std::size_t steps = static_cast<std::size_t>(std::ceil(period / cfg.step - 1e-9));
    if (steps % 2) ++steps;
    const double h = period / static_cast<double>(steps);
    const auto n = static_cast<Eigen::Index>(H.dimension());
    FloquetOperator F;
    F.period = period;
    F.steps = steps;
    F.U = Eigen::MatrixXcd::Identity(n, n);
    const bool mirror = H.real_coefficients();
    const std::size_t run = mirror ? steps / 2 : steps;
    for (std::size_t s = 0; s < run; ++s)
        detail::expm_step(H, h * (static_cast<double>(s) + 0.5), h, F.U, cfg.expm_tolerance);
    if (mirror) {
        Eigen::MatrixXcd half = F.U;
        F.U.noalias() = half.transpose() * half;
    }
    return F;
}

// Samples psi(n T) for n = 0, every, 2*every, ..., n_periods.
inline TimeSeries propagate_stroboscopic(const FloquetOperator& F, const BasisDescriptor& basis,
                                         const QuantumState& psi0, std::size_t n_periods, std::size_t every,
                                         double max_norm_drift = 1e-8, QuantumState* final_state = nullptr) {
    if (!(psi0.tag() == basis.tag()) || static_cast<std::size_t>(F.U.rows()) != basis.dimension())
        throw BasisMismatch("propagate_stroboscopic: basis mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) throw ValidationError("propagate_stroboscopic: state not normalized");
    if (every == 0) throw ValidationError("propagate_stroboscopic: sample interval must be >= 1");
    const ObservableTable obs(basis);
    TimeSeries ts(basis.n_sites());
    Eigen::VectorXcd psi = psi0.amplitudes(), tmp(psi.size());
    ts.push(0.0, obs.measure(psi));
    for (std::size_t k = 1; k <= n_periods; ++k) {
        tmp.noalias() = F.U * psi;
        psi.swap(tmp);
        if (k % every == 0 || k == n_periods) {
            auto snap = obs.measure(psi);
            detail::check_norm(snap.norm, max_norm_drift, F.period * static_cast<double>(k));
            ts.push(F.period * static_cast<double>(k), snap);
        }
    }
    if (final_state) *final_state = QuantumState::raw(basis.tag(), std::move(psi));
    return ts;
}

}  // namespace ccspin
