#include <gtest/gtest.h>

#include "ccspin/evolve.hpp"
#include "ccspin/hamiltonians.hpp"

using namespace ccspin;

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
}

ReducedParams generic_two_site() {
    ReducedParams p;
    p.A1 = 0.1, p.A2 = 0.07, p.A3 = 0.02;
    p.B1 = 0.09, p.B2 = 0.05, p.B3 = 0.03;
    p.delta1 = 4.0, p.delta2 = 3.0, p.delta3 = 1.0;
    p.stark_a = 0.1, p.stark_b = 0.15;
    p.level_shift_1 = 0.01, p.level_shift_2 = 0.02;
    p.J_a = 0.2, p.J_b = 0.25;
    p.n_sites = 2;
    return p;
}

FullHamiltonianSpec spec_for(const ReducedParams& p, bool periodic, int na = 1, int nb = 1) {
    FullHamiltonianSpec s;
    s.params = p;
    s.basis = build_basis(p.n_sites, na, nb);
    s.periodic = periodic;
    return s;
}

ReducedParams reference_point() {
    ReducedParams p;
    p.A1 = p.A2 = 0.1;
    p.B1 = p.B2 = 0.096;
    p.A3 = p.B3 = 0.02;
    p.delta1 = 4.0, p.delta2 = 3.0, p.delta3 = 1.0;
    p.stark_a = p.stark_b = 0.1;
    p.J_a = p.J_b = 0.2;
    p.n_sites = 4;
    return p;
}

EffectiveSpinModel chain(std::size_t n, bool periodic, double J1, double J2 = 0, double l1 = 0, double l2 = 0) {
    EffectiveSpinModel m;
    m.n_sites = n;
    m.periodic = periodic;
    m.J1 = J1, m.J2 = J2, m.lambda1 = l1, m.lambda2 = l2;
    m.h.assign(n, 0.0);
    return m;
}

std::vector<double> eigenvalues(const SparseOperator& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.dense());
    return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

// Cyclic translation j -> j+1 on a spin-only basis.
Eigen::MatrixXd translation(std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
        std::size_t out = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t bit = (c >> (n - 1 - j)) & 1U;
            const std::size_t to = (j + 1) % n;
            out |= bit << (n - 1 - to);
        }
        T(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(c)) = 1.0;
    }
    return T;
}

}  // namespace

TEST(FullHamiltonian, ZeroCouplingsGiveZero) {
    ReducedParams p;
    p.delta1 = 4.0, p.delta2 = 3.0, p.delta3 = 1.0;
    p.n_sites = 3;
    auto s = spec_for(p, true);
    EXPECT_EQ(full_hamiltonian_at(s, 0.3).max_abs(), 0.0);
    s.include_local_terms = false;
    s.params.stark_a = 0.4;
    EXPECT_EQ(full_hamiltonian_at(s, 0.3).max_abs(), 0.0);
}

TEST(FullHamiltonian, TwoSiteHoppingOnly) {
    ReducedParams p;
    p.delta1 = 4.0, p.delta2 = 3.0, p.delta3 = 1.0;
    p.J_a = 0.3;
    p.n_sites = 2;
    auto s = spec_for(p, false, 1, 0);
    const auto H = full_hamiltonian_at(s, 0.0).dense();
    // Sector: both atoms in |1>, one photon in mode a shared between the sites.
    const auto b = s.basis;
    const Eigen::Index i0 = static_cast<Eigen::Index>(*b.encode(std::vector<int>{0, 1, 0, 0, 0, 0}));
    const Eigen::Index i1 = static_cast<Eigen::Index>(*b.encode(std::vector<int>{0, 0, 0, 0, 1, 0}));
    Eigen::Matrix2cd h;
    h << H(i0, i0), H(i0, i1), H(i1, i0), H(i1, i1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
    EXPECT_NEAR(es.eigenvalues()(0), -0.3, 1e-15);
    EXPECT_NEAR(es.eigenvalues()(1), 0.3, 1e-15);
    EXPECT_THROW(full_hamiltonian_at(spec_for(p, true, 1, 0), 0.0), ValidationError);
}

TEST(FullHamiltonian, Hermitian) {
    auto p = reference_point();
    const auto s = spec_for(p, true);
    for (double t : {0.0, 0.37, 5.1, 123.4}) {
        const auto H = full_hamiltonian_at(s, t);
        EXPECT_LE(H.hermiticity_residual(), 1e-12 * H.norm_inf());
    }
}

TEST(FullHamiltonian, KroneckerOracle) {
    // Independent dense construction for two sites on an open chain.
    const auto p = generic_two_site();
    const auto s = spec_for(p, false);
    using M = Eigen::MatrixXcd;
    M I2 = M::Identity(2, 2), P1 = M::Zero(2, 2), P2 = M::Zero(2, 2), up = M::Zero(2, 2), a = M::Zero(2, 2);
    P1(0, 0) = 1.0;
    P2(1, 1) = 1.0;
    up(1, 0) = 1.0;  // |2><1|
    a(0, 1) = 1.0;
    const M down = up.adjoint(), ad = a.adjoint(), n = ad * a;
    auto on = [&](std::size_t site, const M& atom, const M& ma, const M& mb) {
        const M local = kron(kron(atom, ma), mb);
        const M id = M::Identity(8, 8);
        return site == 0 ? kron(local, id) : kron(id, local);
    };
    const std::complex<double> I(0, 1);
    for (double t : {0.0, 0.7, 2.9}) {
        M H = M::Zero(64, 64);
        for (std::size_t j = 0; j < 2; ++j) {
            const double sg = j == 0 ? -1.0 : 1.0;
            const M m1 = -p.A1 * on(j, P1, a, I2) - sg * p.B1 * on(j, P2, I2, a);
            const M m2 = -p.A2 * on(j, up, a, I2) - sg * p.B2 * on(j, down, I2, a);
            const M m3 = -p.A3 * on(j, down, I2, I2) - p.B3 * on(j, up, I2, I2);
            const M drive = std::exp(I * p.delta1 * t) * m1 + std::exp(I * p.delta2 * t) * m2 +
                            std::exp(I * p.delta3 * t) * m3;
            H += drive + drive.adjoint();
            H -= p.level_shift_1 * on(j, P1, I2, I2) + p.level_shift_2 * on(j, P2, I2, I2);
            H -= p.stark_a * on(j, P1, n, I2) + p.stark_b * on(j, P2, I2, n);
        }
        const M hop_a = on(0, I2, ad, I2) * on(1, I2, a, I2), hop_b = on(0, I2, I2, ad) * on(1, I2, I2, a);
        H += p.J_a * (hop_a + hop_a.adjoint()) + p.J_b * (hop_b + hop_b.adjoint());
        EXPECT_LE((full_hamiltonian_at(s, t).dense() - H).cwiseAbs().maxCoeff(), 1e-15) << "t = " << t;
    }
}

TEST(FullHamiltonian, PatternFixedAndPeriodic) {
    const auto s = spec_for(reference_point(), true);
    DrivenHamiltonian H(s);
    const auto nnz = H.nonzeros();
    const double T = *commensurate_period(H.frequencies());
    EXPECT_NEAR(T, 2.0 * std::numbers::pi, 1e-12);
    for (double t : {0.0, 0.4, 1.3}) {
        const SparseMat A = H.at(t);
        EXPECT_EQ(static_cast<std::size_t>(A.nonZeros()), nnz);
        const SparseMat B = H.at(t + T);
        EXPECT_LE(Eigen::MatrixXcd(A - B).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE(Eigen::MatrixXcd(full_hamiltonian_at(s, t).matrix() - A).cwiseAbs().maxCoeff(), 0.0);
    }
    EXPECT_TRUE(H.real_coefficients());
}

TEST(FullHamiltonian, BasisChecks) {
    auto p = reference_point();
    FullHamiltonianSpec s;
    s.params = p;
    s.basis = build_basis(3, 1, 1);
    EXPECT_THROW(DrivenHamiltonian{s}, ValidationError);
    s.basis = build_basis(4, 1, 0);
    EXPECT_THROW(DrivenHamiltonian{s}, ValidationError);
}

TEST(EffectiveHamiltonian, TwoSiteOpenEigenvalues) {
    const auto H = effective_hamiltonian(chain(2, false, 1.0), spin_basis(2));
    const auto ev = eigenvalues(H);
    // J (SxSx + SySy) on a singlet/triplet pair.
    const std::vector<double> ref{-0.5, 0.0, 0.0, 0.5};
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(ev[k], ref[k], 1e-14);
    EXPECT_THROW(effective_hamiltonian(chain(2, true, 1.0), spin_basis(2)), ValidationError);
}

TEST(EffectiveHamiltonian, UniformField) {
    auto m = chain(2, false, 0.0);
    m.h = {0.3, 0.3};
    const auto ev = eigenvalues(effective_hamiltonian(m, spin_basis(2)));
    const std::vector<double> ref{-0.3, 0.0, 0.0, 0.3};
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(ev[k], ref[k], 1e-15);
}

TEST(EffectiveHamiltonian, SymmetriesAndReality) {
    auto m = chain(6, true, 0.7, 0.4, -0.3, 0.2);
    const auto b = spin_basis(6);
    const Eigen::MatrixXcd H = effective_hamiltonian(m, b).dense();
    EXPECT_EQ(H.imag().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE((H - H.adjoint()).cwiseAbs().maxCoeff(), 0.0);
    SparseOperator Sz = SparseOperator::zero(b);
    for (std::size_t j = 0; j < 6; ++j) Sz += embed_site_operator(local::sz(), j, Factor::atom, b);
    EXPECT_LE((H * Sz.dense() - Sz.dense() * H).cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::MatrixXcd T = translation(6).cast<cplx>();
    EXPECT_LE((T * H - H * T).cwiseAbs().maxCoeff(), 1e-14);
    // Open chains break translation.
    m.periodic = false;
    const Eigen::MatrixXcd Ho = effective_hamiltonian(m, b).dense();
    EXPECT_GT((T * Ho - Ho * T).cwiseAbs().maxCoeff(), 0.1);
}

TEST(EffectiveHamiltonian, Rejections) {
    EXPECT_THROW(effective_hamiltonian(chain(4, true, 1.0), build_basis(4, 1, 0)), ValidationError);
    EXPECT_THROW(effective_hamiltonian(chain(4, true, 1.0), spin_basis(5)), ValidationError);
    auto m = chain(4, true, 1.0);
    m.h = {0.0, 0.0};
    EXPECT_THROW(effective_hamiltonian(m, spin_basis(4)), ValidationError);
}

TEST(Momentum, Spectra) {
    const auto t = momentum_spectrum(0.2, 4);
    const std::vector<double> ref{0.0, -0.4, 0.0, 0.4};
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(t[k], ref[k], 1e-15);
    for (double x : momentum_spectrum(0.0, 5)) EXPECT_EQ(x, 0.0);
    auto t3 = momentum_spectrum(1.0, 3);
    std::sort(t3.begin(), t3.end());
    EXPECT_NEAR(t3[0], -1.0, 1e-15);
    EXPECT_NEAR(t3[1], -1.0, 1e-15);
    EXPECT_NEAR(t3[2], 2.0, 1e-15);
    EXPECT_THROW(momentum_spectrum(1.0, 1), std::invalid_argument);
}

TEST(Momentum, HoppingSpectrumMatchesBuilder) {
    for (std::size_t n : {3u, 4u, 5u, 6u}) {
        auto ref = momentum_spectrum(0.3, n);
        std::sort(ref.begin(), ref.end());
        const auto ev = hopping_one_photon_spectrum(0.3, n, true);
        ASSERT_EQ(ev.size(), n);
        for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(ev[k], ref[k], 1e-13);
    }
    // Open chain: 2 J cos(pi k / (N + 1)).
    const auto open = hopping_one_photon_spectrum(0.3, 4, false);
    for (std::size_t k = 1; k <= 4; ++k)
        EXPECT_NEAR(open[4 - k], 0.6 * std::cos(std::numbers::pi * static_cast<double>(k) / 5.0), 1e-13);
}

TEST(ExactSecondOrder, NoHoppingHasNoPairs) {
    auto p = reference_point();
    p.J_a = p.J_b = 0.0;
    p.n_sites = 6;
    const auto m = exact_second_order(p);
    for (std::size_t r = 1; r < m.K_pm.size(); ++r) {
        EXPECT_NEAR(m.K_pm[r], 0.0, 1e-17);
        EXPECT_NEAR(m.K_zz[r], 0.0, 1e-17);
    }
}

TEST(ExactSecondOrder, NearestNeighbourMatchesClosedForm) {
    const auto p = reference_point();
    const auto m = exact_second_order(p);
    const auto eff = effective_couplings(p);
    const double eps = p.J_a / shifted_detunings(p).delta_a2;
    // Leading corrections on a 4-ring: four length-3 walks reach distance 1.
    EXPECT_NEAR(m.K_pm[1], eff.J1, 5.0 * eps * eps * std::abs(eff.J1));
    EXPECT_GT(std::abs(m.K_pm[1] - eff.J1), 3.0 * eps * eps * std::abs(eff.J1));
    const auto [T2, L2] = effective_pair_coefficient(eff, 2);
    EXPECT_NEAR(m.K_pm[2], T2, 10.0 * eps * eps * T2);
}

TEST(ExactSecondOrder, TailDecay) {
    for (double eps : {0.02, 0.05, 0.1}) {
        ReducedParams p;
        p.A2 = 0.1;
        p.A1 = 0.1;
        p.delta1 = 5.0, p.delta2 = 3.0, p.delta3 = 2.0;
        p.J_a = eps * p.delta2;
        p.n_sites = 16;  // long enough that ring images stay below eps^8
        const auto m = exact_second_order(p);
        EXPECT_LE(std::abs(m.K_pm[3]), eps * (1.0 + 2.0 * eps * eps) * std::abs(m.K_pm[2])) << eps;
        EXPECT_LE(std::abs(m.K_pm[4]), eps * (1.0 + 2.0 * eps * eps) * std::abs(m.K_pm[3])) << eps;
    }
}

TEST(ExactSecondOrder, OddDistancesCancelBetweenBranches) {
    auto p = reference_point();
    p.n_sites = 8;
    const auto m = exact_second_order(p);
    const double eps = p.J_a / shifted_detunings(p).delta_a2;
    const double a2 = p.A2 * p.A2, b2 = p.B2 * p.B2;
    const double expect = eps * (a2 - b2) / (a2 + b2);
    EXPECT_NEAR(m.K_pm[3] / m.K_pm[2], expect, 0.1 * expect);
    EXPECT_LT(std::abs(m.K_pm[3]), 0.01 * std::abs(m.K_pm[2]));
    // Equal branches: odd distances vanish, even ones add.
    p.B1 = p.A1, p.B2 = p.A2;
    const auto q = exact_second_order(p);
    EXPECT_NEAR(q.K_pm[1], 0.0, 1e-18);
    EXPECT_NEAR(q.K_pm[3], 0.0, 1e-18);
    EXPECT_GT(q.K_pm[2], 0.0);
}

TEST(ExactSecondOrder, Rejections) {
    auto p = reference_point();
    p.J_a = 2.0;  // 2 J > delta_a2
    EXPECT_THROW(exact_second_order(p), ValidationError);
    auto q = reference_point();
    q.n_sites = 5;
    EXPECT_THROW(exact_second_order(q), ValidationError);
    q.B1 = q.B2 = 0.0;
    EXPECT_NO_THROW(exact_second_order(q));
}

TEST(LongRange, HamiltonianIsHermitianAndReal) {
    auto p = reference_point();
    p.n_sites = 6;
    const auto m = exact_second_order(p);
    const auto H = long_range_hamiltonian(m, spin_basis(6));
    EXPECT_LE(H.hermiticity_residual(), 1e-15);
    EXPECT_EQ(H.dense().imag().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(long_range_hamiltonian(m, spin_basis(4)), ValidationError);
}
