#include <gtest/gtest.h>

#include "ccspin/evolve.hpp"
#include "ccspin/hamiltonians.hpp"

using namespace ccspin;

namespace {

EffectiveSpinModel chain(std::size_t n, bool periodic, double J1, double J2 = 0, double l1 = 0, double l2 = 0) {
    EffectiveSpinModel m;
    m.n_sites = n;
    m.periodic = periodic;
    m.J1 = J1, m.J2 = J2, m.lambda1 = l1, m.lambda2 = l2;
    m.h.assign(n, 0.0);
    return m;
}

PropagatorConfig with_step(double h, std::size_t every = 1) {
    PropagatorConfig c;
    c.step = h;
    c.sample_every = every;
    return c;
}

// Small driven system for full-model checks: two sites, open chain.
FullHamiltonianSpec small_full(bool cross_term = true) {
    FullHamiltonianSpec s;
    auto& p = s.params;
    p.A1 = 0.3, p.A2 = 0.25, p.A3 = 0.05;
    p.B1 = 0.2, p.B2 = 0.22, p.B3 = 0.04;
    p.delta1 = 4.0, p.delta2 = 3.0, p.delta3 = 1.0;
    p.stark_a = 0.05, p.stark_b = 0.07;
    p.J_a = 0.4, p.J_b = 0.3;
    p.n_sites = 2;
    s.basis = build_basis(2, 1, 1);
    s.periodic = false;
    s.include_cross_term = cross_term;
    return s;
}

double fidelity(const QuantumState& a, const QuantumState& b) { return std::norm(a.amplitudes().dot(b.amplitudes())); }

}  // namespace

TEST(Observables, PatternState) {
    const auto b = build_basis(4, 1, 1, 2);
    const auto psi = spin_pattern_state(b, "1222");
    EXPECT_EQ(occupation(psi, 0, b), 1.0);
    for (std::size_t j = 1; j < 4; ++j) EXPECT_EQ(occupation(psi, j, b), 0.0);
    const auto ph = photon_numbers(psi, b);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(ph.a[j], 0.0);
        EXPECT_EQ(ph.b[j], 0.0);
    }
    EXPECT_DOUBLE_EQ(magnetization(psi, b), 1.0);
    EXPECT_THROW(occupation(psi, 4, b), std::out_of_range);
    EXPECT_THROW(spin_pattern_state(b, "122"), ValidationError);
    EXPECT_THROW(spin_pattern_state(b, "12x2"), ValidationError);
}

TEST(Observables, UniformSuperposition) {
    const auto b = spin_basis(3);
    const Eigen::VectorXcd v = Eigen::VectorXcd::Constant(8, 1.0 / std::sqrt(8.0));
    const auto psi = QuantumState::normalized(b.tag(), v);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(occupation(psi, j, b), 0.5, 1e-15);
    EXPECT_NEAR(magnetization(psi, b), 0.0, 1e-15);
}

TEST(Propagate, ZeroHamiltonianIsStatic) {
    const auto b = spin_basis(4);
    StaticHamiltonian H(effective_hamiltonian(chain(4, true, 0.0), b));
    const auto psi0 = spin_pattern_state(b, "1212");
    QuantumState out;
    const auto ts = propagate(H, b, psi0, 10.0, with_step(1.0), &out);
    EXPECT_EQ(ts.size(), 11u);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        EXPECT_EQ(ts.p1[0][k], 1.0);
        EXPECT_EQ(ts.p1[1][k], 0.0);
    }
    EXPECT_LE((out.amplitudes() - psi0.amplitudes()).norm(), 1e-15);
}

TEST(Propagate, ExchangeCosineSquared) {
    const double J1 = 0.3;
    const auto b = spin_basis(2);
    StaticHamiltonian H(effective_hamiltonian(chain(2, false, J1), b));
    const auto ts = propagate(H, b, spin_pattern_state(b, "12"), 40.0, with_step(0.01, 10));
    double err = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double c = std::cos(0.5 * J1 * ts.t[k]);
        err = std::max(err, std::abs(ts.p1[0][k] - c * c));
        EXPECT_NEAR(ts.p1[0][k] + ts.p1[1][k], 1.0, 1e-12);
    }
    EXPECT_LE(err, 1e-10);
}

TEST(Propagate, LarmorPrecession) {
    const double h = 0.8;
    const auto b = spin_basis(1);
    auto m = chain(1, false, 0.0);
    m.h = {h};
    StaticHamiltonian H(effective_hamiltonian(m, b));
    Eigen::VectorXcd v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const auto psi0 = QuantumState::normalized(b.tag(), v);
    const auto Sx = 0.5 * (embed_site_operator(local::splus(), 0, Factor::atom, b) +
                           embed_site_operator(local::sminus(), 0, Factor::atom, b));
    for (double t : {0.5, 2.0, 7.7}) {
        QuantumState out;
        propagate(H, b, psi0, t, with_step(0.01), &out);
        EXPECT_NEAR(expectation(Sx, out).real(), 0.5 * std::cos(h * t), 1e-10) << t;
        EXPECT_NEAR(occupation(out, 0, b), 0.5, 1e-12);
    }
}

TEST(Propagate, EnergyAndMagnetizationConserved) {
    const auto b = spin_basis(6);
    const auto Hop = effective_hamiltonian(chain(6, true, 0.5, 0.3, 0.2, -0.1), b);
    StaticHamiltonian H(Hop);
    const auto psi0 = spin_pattern_state(b, "122121");
    const double e0 = expectation(Hop, psi0).real();
    QuantumState out;
    const auto ts = propagate(H, b, psi0, 30.0, with_step(0.02, 50), &out);
    EXPECT_NEAR(expectation(Hop, out).real(), e0, 1e-10);
    for (double mz : ts.mz) EXPECT_NEAR(mz, ts.mz.front(), 1e-12);
    EXPECT_LE(ts.max_norm_drift(), 1e-12);
}

TEST(Propagate, TranslationCovariance) {
    const auto b = spin_basis(6);
    StaticHamiltonian H(effective_hamiltonian(chain(6, true, 0.5, 0.3, 0.2, 0.1), b));
    const auto ts = propagate(H, b, spin_pattern_state(b, "122222"), 20.0, with_step(0.02, 25));
    const auto tr = propagate(H, b, spin_pattern_state(b, "222122"), 20.0, with_step(0.02, 25));
    for (std::size_t k = 0; k < ts.size(); ++k)
        for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(tr.p1[(j + 3) % 6][k], ts.p1[j][k], 1e-12);
}

TEST(Propagate, DrivenStepHalvingConverges) {
    const auto s = small_full();
    DrivenHamiltonian H(s);
    const auto psi0 = spin_pattern_state(s.basis, "12");
    QuantumState coarse, fine;
    propagate(H, s.basis, psi0, 20.0, with_step(0.005), &coarse);
    propagate(H, s.basis, psi0, 20.0, with_step(0.0025), &fine);
    EXPECT_GE(fidelity(coarse, fine), 1.0 - 1e-6);
    EXPECT_NEAR(coarse.norm(), 1.0, 1e-10);
}

TEST(Propagate, Rk4AgreesWithMidpoint) {
    const auto s = small_full();
    DrivenHamiltonian H(s);
    const auto psi0 = spin_pattern_state(s.basis, "21");
    QuantumState a, b;
    propagate(H, s.basis, psi0, 5.0, with_step(0.001), &a);
    auto cfg = with_step(0.001);
    cfg.method = Method::rk4;
    propagate(H, s.basis, psi0, 5.0, cfg, &b);
    EXPECT_GE(fidelity(a, b), 1.0 - 1e-8);
}

TEST(Propagate, StepBoundAndNormalization) {
    const auto s = small_full();
    DrivenHamiltonian H(s);
    const auto psi0 = spin_pattern_state(s.basis, "12");
    EXPECT_THROW(propagate(H, s.basis, psi0, 1.0, with_step(0.02 / 4.0 * 1.5)), ValidationError);
    EXPECT_NO_THROW(propagate(H, s.basis, psi0, 0.01, with_step(0.02 / 4.0)));
    const auto bad = QuantumState::raw(s.basis.tag(), 2.0 * psi0.amplitudes());
    EXPECT_THROW(propagate(H, s.basis, bad, 1.0, with_step(0.001)), ValidationError);
    const auto other = build_basis(2, 1, 0);
    EXPECT_THROW(propagate(H, other, spin_pattern_state(other, "12"), 1.0, with_step(0.001)), BasisMismatch);
}

TEST(Propagate, NormDriftIsReported) {
    // RK4 with h * |H| > 2.8 blows up.
    const auto b = spin_basis(4);
    StaticHamiltonian H(effective_hamiltonian(chain(4, true, 2.0, 1.0, 1.0, 0.0), b));
    PropagatorConfig cfg = with_step(3.0);
    cfg.method = Method::rk4;
    EXPECT_THROW(propagate(H, b, spin_pattern_state(b, "1222"), 300.0, cfg), NumericError);
}

TEST(Propagate, RejectsNonHermitian) {
    const auto b = spin_basis(2);
    const SparseOperator up = embed_site_operator(local::splus(), 0, Factor::atom, b);
    StaticHamiltonian H(up);
    EXPECT_THROW(propagate(H, b, spin_pattern_state(b, "12"), 1.0, with_step(0.1)), NumericError);
}

TEST(Floquet, CommensuratePeriod) {
    EXPECT_NEAR(*commensurate_period({4.0, 3.0, 1.0}), 2.0 * std::numbers::pi, 1e-12);
    EXPECT_NEAR(*commensurate_period({4.0, 2.0, 2.0}), std::numbers::pi, 1e-12);
    EXPECT_NEAR(*commensurate_period({1.5, 1.0}), 4.0 * std::numbers::pi, 1e-12);
    EXPECT_FALSE(commensurate_period({1.0, std::sqrt(2.0)}).has_value());
    EXPECT_FALSE(commensurate_period({0.0}).has_value());
}

TEST(Floquet, MatchesDirectStepping) {
    for (bool cross : {true, false}) {
        const auto s = small_full(cross);
        DrivenHamiltonian H(s);
        const double T = *commensurate_period(H.frequencies());
        const auto F = floquet_operator(H, T, with_step(0.004));
        ASSERT_EQ(F.steps % 2, 0u);
        const auto psi0 = spin_pattern_state(s.basis, "12");
        // Direct stepping with the same grid reproduces the same product of exponentials.
        QuantumState direct, strobo;
        propagate(H, s.basis, psi0, 3.0 * T, with_step(T / static_cast<double>(F.steps)), &direct);
        const auto ts = propagate_stroboscopic(F, s.basis, psi0, 3, 1, 1e-8, &strobo);
        EXPECT_LE((direct.amplitudes() - strobo.amplitudes()).norm(), 1e-11);
        EXPECT_EQ(ts.size(), 4u);
        EXPECT_NEAR(ts.t.back(), 3.0 * T, 1e-12);
        const Eigen::MatrixXcd UU = F.U.adjoint() * F.U;
        EXPECT_LE((UU - Eigen::MatrixXcd::Identity(UU.rows(), UU.cols())).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Floquet, Rejections) {
    const auto s = small_full();
    DrivenHamiltonian H(s);
    EXPECT_THROW(floquet_operator(H, 1.0, with_step(0.004)), ValidationError);
    auto cfg = with_step(0.004);
    cfg.method = Method::rk4;
    EXPECT_THROW(floquet_operator(H, 2.0 * std::numbers::pi, cfg), ValidationError);
    EXPECT_THROW(floquet_operator(H, 2.0 * std::numbers::pi, with_step(0.004), 10), DimensionError);
}

TEST(Steps, Defaults) {
    ReducedParams p;
    p.delta1 = 5.0, p.delta2 = 3.0, p.delta3 = 2.0;
    EXPECT_DOUBLE_EQ(default_full_step(p), 0.004);
    const auto b = spin_basis(2);
    EXPECT_EQ(default_effective_step(SparseOperator::zero(b)), 1.0);
    const auto H = effective_hamiltonian(chain(2, false, 1.0), b);
    EXPECT_DOUBLE_EQ(default_effective_step(H), 0.01 / H.norm_inf());
}
