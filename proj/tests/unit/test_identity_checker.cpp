#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "sbeam/identity_checker.hpp"
#include "sbeam/manufactured.hpp"

using namespace sbeam;

namespace {

const Interval kI{1.0, 2.0};
constexpr double kT = 1.0;

} // namespace

TEST(Manufactured, CorpusSatisfiesClampedAndEndConditions)
{
    const auto corpus = manufactured_corpus(kI, kT);
    ASSERT_EQ(corpus.size(), 5u);
    for (const auto& y : corpus) {
        EXPECT_LE(y.clamp_defect(kI), 1e-12) << y.name();
        EXPECT_LE(y.end_value_defect(kT), 1e-12) << y.name();
        EXPECT_FALSE(y.is_zero());
    }
    for (std::uint64_t s = 0; s < 4; ++s) {
        const auto y = random_manufactured(kI, kT, s);
        EXPECT_LE(y.clamp_defect(kI), 1e-10);
        EXPECT_LE(y.end_value_defect(kT), 1e-10);
    }
}

TEST(Manufactured, DerivativesMatchJetEvaluation)
{
    const auto y = manufactured_corpus(kI, kT)[2];
    using J = Jet<4, 2>;
    const auto v = y.eval(J::variable_t(0.3), J::variable_x(1.4));
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 2; ++j)
            EXPECT_NEAR(v.derivative(i, j), y.derivative(0.3, 1.4, i, j), 1e-10 * (1.0 + std::abs(v.derivative(i, j))));
    EXPECT_NEAR(y.forcing(0.3, 1.4), y.derivative(0.3, 1.4, 0, 2) + y.derivative(0.3, 1.4, 4, 0), 1e-12);
}

TEST(Manufactured, ScalingIsLinear)
{
    const auto y = default_manufactured(kI, kT);
    const auto z = y.scaled(-3.0);
    EXPECT_DOUBLE_EQ(z.value(0.4, 1.7), -3.0 * y.value(0.4, 1.7));
    EXPECT_TRUE(y.scaled(0.0).is_zero());
}

TEST(PointwiseIdentity, HoldsOverCorpus)
{
    const NormalStream rng(11, 0);
    double worst = 0.0;
    for (const auto& y : manufactured_corpus(kI, kT))
        for (double lam : {1.0, 2.0, 4.0, 8.0})
            for (int i = 0; i < 100; ++i) {
                const double t = rng.uniform(2 * i), x = 1.0 + rng.uniform(2 * i + 1);
                worst = std::max(worst, std::abs(pointwise_identity_residual(y, {lam, 0.0, kT}, t, x)));
            }
    EXPECT_LT(worst, 1e-6);
}

TEST(PointwiseIdentity, HoldsForRandomFields)
{
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto y = random_manufactured(kI, kT, 100 + s);
        const NormalStream rng(s, 1);
        for (int i = 0; i < 40; ++i) {
            const double t = rng.uniform(2 * i), x = 1.0 + rng.uniform(2 * i + 1);
            EXPECT_LT(std::abs(pointwise_identity_residual(y, {2.0, 0.0, kT}, t, x)), 1e-6);
        }
    }
}

TEST(PointwiseIdentity, PrintedGroupIsDetected)
{
    const auto y = default_manufactured(kI, kT);
    double worst = 0.0;
    for (double x : {1.2, 1.5, 1.8})
        worst = std::max(worst, std::abs(pointwise_identity(y, {2.0, 0.0, kT}, 0.4, x).residual_printed));
    EXPECT_GT(worst, 1e-3);
}

TEST(PointwiseIdentity, ZeroFieldGivesZeroSides)
{
    const auto y = default_manufactured(kI, kT, 0.0);
    const auto p = pointwise_identity(y, {3.0, 0.0, kT}, 0.5, 1.5);
    EXPECT_EQ(p.lhs, 0.0);
    EXPECT_EQ(p.rhs, 0.0);
}

TEST(IntegratedBalance, DeterministicManufactured)
{
    const WeightField w{2.0, 0.0, kT};
    const Quadrature xq(kI.a, kI.b, 8, 16);
    const auto b = integrated_balance(default_manufactured(kI, kT), w, kI, xq);
    EXPECT_LT(b.relative_residual(), 1e-5);
    EXPECT_GT(b.relative_residual_printed(), 1e-8);
    EXPECT_NEAR(b.mean[kA3], b.mean[kA3Reduced], 1e-8 * std::abs(b.mean[kA3]));
    EXPECT_NEAR(b.mean[kA4], b.mean[kA4Reduced], 1e-8 * std::abs(b.mean[kA4]));
    EXPECT_EQ(b.mean[kIto], 0.0);
}

TEST(IntegratedBalance, RejectsNonzeroEndValues)
{
    const ManufacturedField bad("bad", {{1.0, {{1.0}}, {bump(kI.a, 2, kI.b, 2)}}});
    EXPECT_THROW(integrated_balance(bad, {1.0, 0.0, kT}, kI, Quadrature(1.0, 2.0, 2, 8)), ContractViolation);
}

TEST(IntegratedBalance, StochasticResidualWithinMonteCarloError)
{
    SimulationConfig c;
    c.steps = 256;
    c.trials = 128;
    auto B = std::make_shared<const ModalBasis>(kI, 8);
    const ModalBasis xb(kI, 8, 4, 12);
    auto gm = [](double t, std::span<double> o) {
        std::fill(o.begin(), o.end(), 0.0);
        o[0] = 1.0 + t;
    };
    GalerkinSystem sys(c, B, Forcing::modal(nullptr, gm));
    const auto b = integrated_balance(sys, InitialData::zero(8), Cutoff(kT / 8, kT), xb, {2.0, 0.0, kT}, 128);
    EXPECT_EQ(b.trials, 128);
    EXPECT_LE(b.residual_z(), 3.0);
    EXPECT_NE(b.mean[kIto], 0.0);
    const double zp = std::abs(b.mean[kResidualPrinted]) / b.stderr_[kResidualPrinted];
    EXPECT_GT(zp, 3.0);
}

TEST(IntegratedBalance, A2RoutesAgree)
{
    const auto c = a2_cross_check(manufactured_corpus(kI, kT)[1], {2.0, 0.0, kT}, Quadrature(1.0, 2.0, 4, 12),
                                  Quadrature(0.0, kT, 4, 12));
    EXPECT_LT(c.relative_difference(), 1e-10);
    EXPECT_NE(c.from_table, 0.0);
    EXPECT_THROW(a2_cross_check(default_manufactured(kI, kT), {2.0, 0.5, kT}, Quadrature(1.0, 2.0, 1, 4),
                                Quadrature(0.0, kT, 1, 4)),
                 ContractViolation);
}

TEST(BoundaryTerm, ExplicitConstantBoundsEmpirical)
{
    for (const auto& y : manufactured_corpus(kI, kT)) {
        const auto r = boundary_term_check(y, {2.0, 0.0, kT}, kI);
        EXPECT_TRUE(r.holds) << y.name();
        EXPECT_LE(r.empirical_c, r.explicit_c);
        EXPECT_GT(r.majorant, 0.0);
    }
}

TEST(Slices, ManufacturedSliceCarriesForcingAndTraces)
{
    const auto y = default_manufactured(kI, kT);
    const Quadrature xq(1.0, 2.0, 2, 4);
    const auto s = manufactured_slice(y, kI, xq, 0.3);
    ASSERT_EQ(s.f.size(), xq.size());
    EXPECT_NEAR(s.f[3], y.forcing(0.3, xq.nodes()[3]), 1e-12);
    EXPECT_NEAR(s.yxx_ab[1], y.derivative(0.3, 2.0, 2, 0), 1e-12);
    for (double g : s.g)
        EXPECT_EQ(g, 0.0);
}
