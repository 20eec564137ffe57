#include <gtest/gtest.h>

#include "ccspin/design.hpp"

using namespace ccspin;

namespace {

ReducedParams seed() {
    ReducedParams p;
    p.A1 = p.A2 = 0.1;
    p.B1 = p.B2 = 0.09;
    p.A3 = p.B3 = 0.02;
    p.delta1 = 4.0, p.delta2 = 3.0, p.delta3 = 1.0;
    p.stark_a = p.stark_b = 0.1;
    p.J_a = p.J_b = 0.2;
    p.n_sites = 4;
    return p;
}

DesignTarget ratio_target(double value) {
    DesignTarget t;
    t.targets = {{TargetKind::J2_over_J1, value}};
    t.free = {"B"};
    t.bounds = {{"B", 0.05, 0.0999}};
    t.hierarchy_factor = 4.0;
    return t;
}

}  // namespace

TEST(Design, TargetNames) {
    for (auto k : {TargetKind::J1, TargetKind::J2, TargetKind::lambda1, TargetKind::lambda2, TargetKind::J2_over_J1,
                   TargetKind::lambda2_over_lambda1})
        EXPECT_EQ(parse_target(target_name(k)), k);
    EXPECT_FALSE(parse_target("J3").has_value());
}

TEST(Design, RecoversReferencePointBranch) {
    const auto f = fit_parameters(ratio_target(1.583), seed());
    EXPECT_TRUE(f.feasible) << f.status;
    EXPECT_NEAR(f.params.B1, 0.096, 2e-4);
    EXPECT_EQ(f.params.B1, f.params.B2);
    ASSERT_EQ(f.residuals.size(), 1u);
    EXPECT_TRUE(f.residuals[0].pass);
    EXPECT_LE(std::abs(f.residuals[0].achieved - 1.583), 1.583e-3);
    EXPECT_TRUE(validity_check(f.params, 4.0).all_pass());
    // Non-free parameters stay at the seed.
    EXPECT_EQ(f.params.A1, 0.1);
    EXPECT_EQ(f.params.delta2, 3.0);
}

TEST(Design, CancelsNearestNeighbour) {
    DesignTarget t;
    t.targets = {{TargetKind::J1, 0.0, 1.0, 1e-6}};
    t.free = {"B"};
    t.bounds = {{"B", 0.05, 0.12}};
    t.hierarchy_factor = 4.0;
    const auto f = fit_parameters(t, seed());
    EXPECT_TRUE(f.feasible) << f.status;
    const auto m = effective_couplings(f.params);
    const auto m0 = effective_couplings(seed());
    EXPECT_LE(std::abs(m.J1), 1e-9 * std::abs(m0.J2));
    EXPECT_NEAR(f.params.B2, 0.1, 1e-6);
}

TEST(Design, ReportsInfeasible) {
    auto p = seed();
    p.B1 = p.B2 = 0.0;
    const auto s = shifted_detunings(p);
    DesignTarget t;
    // A single branch gives J2/J1 = J_a / delta_a2; ask for ten times that.
    t.targets = {{TargetKind::J2_over_J1, 10.0 * p.J_a / s.delta_a2}};
    t.free = {"delta2"};
    t.bounds = {{"delta2", 2.5, 3.5}};
    t.hierarchy_factor = 4.0;
    const auto f = fit_parameters(t, p);
    EXPECT_FALSE(f.feasible);
    EXPECT_EQ(f.status.rfind("infeasible", 0), 0u);
    EXPECT_FALSE(f.residuals[0].pass);
    EXPECT_GE(f.params.delta2, 2.5 - 1e-9);
    EXPECT_LE(f.params.delta2, 3.5 + 1e-9);
    EXPECT_DOUBLE_EQ(f.params.delta3, f.params.delta1 - f.params.delta2);
}

TEST(Design, SeedAtTargetReturnsImmediately) {
    const auto m = effective_couplings(seed());
    const auto f = fit_parameters(ratio_target(m.J2 / m.J1), seed());
    EXPECT_EQ(f.evaluations, 0u);
    EXPECT_EQ(f.residuals[0].error, 0.0);
    EXPECT_EQ(f.params.B1, seed().B1);
    EXPECT_TRUE(f.feasible);
}

TEST(Design, Deterministic) {
    const auto a = fit_parameters(ratio_target(1.4), seed());
    const auto b = fit_parameters(ratio_target(1.4), seed());
    EXPECT_EQ(a.params.B1, b.params.B1);
    EXPECT_EQ(a.evaluations, b.evaluations);
    EXPECT_EQ(a.start_index, b.start_index);
}

TEST(Design, FeasibleResultsPassValidity) {
    for (double target : {0.9, 1.1, 1.3, 1.6, 2.0}) {
        const auto f = fit_parameters(ratio_target(target), seed());
        if (f.feasible) {
            EXPECT_TRUE(validity_check(f.params, 4.0).all_pass()) << target;
            EXPECT_TRUE(f.residuals[0].pass) << target;
        }
    }
}

TEST(Design, Rejections) {
    auto t = ratio_target(1.5);
    t.hierarchy_factor = 10.0;  // the seed's detuning difference only clears 5
    EXPECT_THROW(fit_parameters(t, seed()), ValidationError);
    t = ratio_target(1.5);
    t.free = {"C"};
    t.bounds.clear();
    EXPECT_THROW(fit_parameters(t, seed()), ValidationError);
    t = ratio_target(1.5);
    t.targets.clear();
    EXPECT_THROW(fit_parameters(t, seed()), ValidationError);
    t = ratio_target(1.5);
    t.bounds = {{"B", 0.095, 0.0999}};
    EXPECT_THROW(fit_parameters(t, seed()), ValidationError);
    t = ratio_target(1.5);
    t.bounds = {{"A", 0.05, 0.2}};
    EXPECT_THROW(fit_parameters(t, seed()), ValidationError);
    auto p = seed();
    p.B2 = 0.08;
    EXPECT_THROW(fit_parameters(ratio_target(1.5), p), ValidationError);
}
