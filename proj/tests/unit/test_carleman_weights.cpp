#include <gtest/gtest.h>

#include <cmath>

#include "sbeam/carleman_weights.hpp"

using namespace sbeam;

TEST(Jet, ProductAndExpMatchClosedForms)
{
    using J = Jet<4, 2>;
    const auto x = J::variable_x(0.7), t = J::variable_t(0.3);
    const auto f = exp(x * t);
    // d^i/dx^i d^j/dt^j exp(xt) at (0.7, 0.3)
    const double e = std::exp(0.21);
    EXPECT_NEAR(f.derivative(0, 0), e, 1e-15);
    EXPECT_NEAR(f.derivative(1, 0), 0.3 * e, 1e-15);
    EXPECT_NEAR(f.derivative(0, 2), 0.49 * e, 1e-14);
    EXPECT_NEAR(f.derivative(4, 0), std::pow(0.3, 4) * e, 1e-14);
    // d/dx d/dt exp(xt) = (1 + xt) exp(xt)
    EXPECT_NEAR(f.derivative(1, 1), 1.21 * e, 1e-14);
    EXPECT_NEAR(dt(dx(f)).value(), 1.21 * e, 1e-14);
}

TEST(Jet, SinCosDerivatives)
{
    using J = Jet<3, 0>;
    const auto x = J::variable_x(1.1);
    const auto s = sin(2.0 * x), c = cos(2.0 * x);
    EXPECT_NEAR(s.derivative(3, 0), -8.0 * std::cos(2.2), 1e-13);
    EXPECT_NEAR(c.derivative(2, 0), -4.0 * std::cos(2.2), 1e-13);
}

TEST(Weight, PartialsMatchJet)
{
    const WeightField w{2.5, 0.0, 1.3};
    for (double t : {0.0, 0.4, 1.1})
        for (double x : {1.0, 1.6}) {
            const auto p = eval_weight(w, t, x);
            const auto j = w.jet<4, 3>(t, x);
            EXPECT_NEAR(p.l, j.value(), 1e-13);
            EXPECT_NEAR(p.l_t, j.derivative(0, 1), 1e-12);
            EXPECT_NEAR(p.l_tt, j.derivative(0, 2), 1e-12);
            EXPECT_NEAR(p.l_ttt, j.derivative(0, 3), 1e-12);
            EXPECT_NEAR(p.l_x, j.derivative(1, 0), 1e-13);
            EXPECT_NEAR(p.l_xx, j.derivative(2, 0), 1e-13);
            EXPECT_EQ(j.derivative(3, 0), 0.0);
            EXPECT_NEAR(p.theta, std::exp(p.l), 1e-12 * p.theta);
        }
}

TEST(Coefficients, SubstitutionExamples)
{
    const WeightField w1{1.0, 0.0, 1.0};
    const auto m = coefficients(w1, 0.0, 1.0);
    EXPECT_DOUBLE_EQ(m.G, 12.0);
    EXPECT_DOUBLE_EQ(m.D, -8.0);
    EXPECT_DOUBLE_EQ(m.A, -22.0);
    EXPECT_DOUBLE_EQ(m.Phi1, -12.0);
    EXPECT_DOUBLE_EQ(m.Phi, -64.0);
    EXPECT_DOUBLE_EQ(coefficients({2.0, 0.0, 1.0}, 0.5, 1.5).F1, 64.0);
}

TEST(Coefficients, H5OverLambdaIsExactly32)
{
    for (double lam : {0.5, 1.0, 3.0, 11.0})
        for (double t : {0.0, 0.37, 1.0})
            for (double x : {1.0, 1.25, 2.0})
                EXPECT_EQ(coefficients({lam, 0.0, 1.0}, t, x).H5 / lam, 32.0);
}

TEST(Coefficients, OnlyX0ZeroHasExpansions)
{
    const WeightField w{1.0, -0.5, 1.0};
    EXPECT_FALSE(coefficients(w, 0.2, 1.5).has_derived);
    EXPECT_TRUE(std::isnan(coefficients(w, 0.2, 1.5).F1));
    EXPECT_THROW(derived_coefficients(w, 0.2, 1.5), UnsupportedConfiguration);
    EXPECT_NO_THROW(derived_coefficients({1.0, 0.0, 1.0}, 0.2, 1.5));
}

TEST(Coefficients, CorrectedF3MatchesBraceGroup)
{
    for (double lam : {1.0, 2.0, 5.0})
        for (double x : {1.0, 1.3, 1.9}) {
            const WeightField w{lam, 0.0, 1.0};
            const auto m = coefficients(w, 0.4, x);
            const auto g = brace_groups(w, 0.4, x);
            EXPECT_NEAR(g.c1_corrected, m.F3_corrected, 1e-10 * std::abs(m.F3_corrected));
            EXPECT_NEAR(g.c1_printed, m.F3, 1e-10 * std::abs(m.F3));
            // the two groups coincide where 192 x + 320 = 512
            if (x != 1.0) {
                EXPECT_GT(std::abs(g.c1_printed - g.c1_corrected), 1e-3);
            }
        }
}

TEST(Coefficients, PrintedF3DiffersFromCorrectedByKnownTerms)
{
    const WeightField w{3.0, 0.0, 1.0};
    const double x = 1.4;
    const auto m = coefficients(w, 0.2, x);
    EXPECT_NEAR(m.F3 - m.F3_corrected, 27.0 * (192.0 * x + 320.0 - 512.0), 1e-9);
}

TEST(Audit, CompletesAndSeparatesPrintedFromCorrected)
{
    const auto rep = audit_coefficients(1.0, 2.0, 1.0, 1000, 1);
    EXPECT_EQ(rep.points, 1000);
    for (const char* name : {"F1", "F2", "F3", "F4", "H1", "H2", "H3", "H4", "H5"})
        EXPECT_TRUE(rep.entry(name, "printed").agrees) << name;
    EXPECT_TRUE(rep.printed_consistent());
    EXPECT_FALSE(rep.entry("F3", "corrected").agrees);
    EXPECT_TRUE(rep.entry("F3_corrected", "corrected").agrees);
    EXPECT_TRUE(rep.entry("H3_corrected", "corrected").agrees);
    EXPECT_FALSE(rep.discrepancies().empty());
    EXPECT_THROW(rep.entry("F9", "printed"), ContractViolation);
}

TEST(LowerBounds, PositiveFromEmpiricalLambda0)
{
    std::vector<double> grid;
    for (int l = 1; l <= 12; ++l)
        grid.push_back(l);
    const auto tab = coefficient_lower_bounds(1.0, 2.0, 1.0, grid);
    ASSERT_EQ(tab.rows.size(), grid.size());
    EXPECT_EQ(tab.empirical_lambda0, 2.0);
    for (const auto& row : tab.rows) {
        EXPECT_EQ(row.min_ratio[4], 32.0);
        if (row.lambda >= tab.empirical_lambda0) {
            EXPECT_TRUE(row.all_positive);
            for (double v : row.min_ratio)
                EXPECT_GT(v, 0.0);
        }
    }
    EXPECT_THROW(coefficient_lower_bounds(1.0, 2.0, 1.0, std::vector<double>{}), ContractViolation);
}

TEST(Cutoff, PlateauZeroAndRampMidpoint)
{
    const double T = 1.0, eps = T / 8;
    const Cutoff chi(eps, T);
    const auto mid = eval_cutoff(chi, T / 2);
    EXPECT_EQ(mid, (std::array<double, 3>{1.0, 0.0, 0.0}));
    EXPECT_EQ(eval_cutoff(chi, 0.0), (std::array<double, 3>{0.0, 0.0, 0.0}));
    EXPECT_EQ(eval_cutoff(chi, T), (std::array<double, 3>{0.0, 0.0, 0.0}));
    const auto r = eval_cutoff(chi, 0.75 * eps);
    EXPECT_NEAR(r[0], 0.5, 1e-15);
    EXPECT_NEAR(r[1], 3.75 / eps, 1e-12);
    EXPECT_NEAR(r[2], 0.0, 1e-9);
    const auto m = eval_cutoff(chi, T - 0.75 * eps);
    EXPECT_NEAR(m[1], -3.75 / eps, 1e-12);
}

TEST(Cutoff, DerivativeBoundsAndFiniteDifferences)
{
    const double eps = 0.2;
    const Cutoff chi(eps, 1.0);
    double m1 = 0.0, m2 = 0.0;
    const double h = 1e-6;
    for (int i = 1; i < 2000; ++i) {
        const double t = i / 2000.0;
        const auto v = chi(t);
        m1 = std::max(m1, std::abs(v[1]));
        m2 = std::max(m2, std::abs(v[2]));
        if (t > h && t < 1.0 - h) {
            EXPECT_NEAR((chi(t + h)[0] - chi(t - h)[0]) / (2 * h), v[1], 1e-5 / eps);
            EXPECT_NEAR((chi(t + h)[1] - chi(t - h)[1]) / (2 * h), v[2], 1e-3 / (eps * eps));
        }
    }
    EXPECT_LE(m1, Cutoff::c1 / eps * (1 + 1e-12));
    EXPECT_LE(m2, Cutoff::c2 / (eps * eps) * (1 + 1e-12));
    EXPECT_GT(m1, 0.99 * Cutoff::c1 / eps);
    EXPECT_GT(m2, 0.99 * Cutoff::c2 / (eps * eps));
}

TEST(Cutoff, RejectsBadEpsilonAndTime)
{
    EXPECT_THROW(Cutoff(0.6, 1.0), ContractViolation);
    EXPECT_THROW(Cutoff(0.0, 1.0), ContractViolation);
    EXPECT_THROW(Cutoff(0.1, 1.0)(1.5), ContractViolation);
}
