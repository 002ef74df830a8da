#include <gtest/gtest.h>

#include <cmath>

#include "sbeam/beam_operator.hpp"
#include "sbeam/philox.hpp"
#include "sbeam/quadrature.hpp"

using namespace sbeam;

namespace {

// Roots of cos(z) cosh(z) = 1, tabulated to 15 digits by an independent
// high-precision computation.
constexpr double kRoots[] = {4.730040744862704, 7.853204624095838, 10.99560783800167, 14.13716549125746,
                             17.27875965739948};

double bisect_root(double lo, double hi)
{
    auto f = [](double z) { return std::cos(z) * std::cosh(z) - 1.0; };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((f(lo) < 0.0) == (f(mid) < 0.0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST(Quadrature, IntegratesPolynomialsExactly)
{
    const Quadrature q(1.0, 2.0, 4, 8);
    // int_1^2 x^15 dx = (2^16 - 1) / 16
    EXPECT_NEAR(q.integrate([](double x) { return std::pow(x, 15); }), 65535.0 / 16.0, 1e-9);
    EXPECT_NEAR(q.integrate([](double) { return 1.0; }), 1.0, 1e-15);
}

TEST(Quadrature, RejectsEmptyInterval)
{
    EXPECT_THROW(Quadrature(2.0, 1.0), ContractViolation);
}

TEST(Characteristic, RootsMatchTabulatedValues)
{
    for (int k = 1; k <= 5; ++k)
        EXPECT_NEAR(solve_characteristic(k, 1.0), kRoots[k - 1], 1e-9) << "k = " << k;
}

TEST(Characteristic, FirstRootMatchesBisectionOracle)
{
    EXPECT_NEAR(solve_characteristic(1, 1.0), bisect_root(4.5, 5.0), 1e-10);
    EXPECT_NEAR(solve_characteristic(1, 2.0) * 2.0, bisect_root(4.5, 5.0), 1e-10);
}

TEST(Characteristic, HighRootsApproachAsymptote)
{
    for (int k = 10; k <= 30; k += 5)
        EXPECT_NEAR(solve_characteristic(k, 1.0), (k + 0.5) * std::numbers::pi, 1e-6);
}

TEST(Characteristic, CoshCosInvariantForLowModes)
{
    for (int k = 1; k <= 4; ++k) {
        const double z = solve_characteristic(k, 1.0);
        EXPECT_NEAR(std::cos(z) * std::cosh(z), 1.0, 1e-8 * std::cosh(z));
    }
}

TEST(Characteristic, RejectsBadArguments)
{
    EXPECT_THROW(solve_characteristic(0, 1.0), ContractViolation);
    EXPECT_THROW(solve_characteristic(1, -1.0), ContractViolation);
}

TEST(Interval, Validation)
{
    EXPECT_THROW((Interval{2.0, 1.0}.validate()), ContractViolation);
    EXPECT_NO_THROW((Interval{1.0, 2.0}.validate()));
    EXPECT_DOUBLE_EQ((Interval{1.0, 2.5}.length()), 1.5);
}

TEST(EigenMode, ClampedEnds)
{
    const Interval I{1.0, 2.0};
    for (int k = 1; k <= 12; ++k) {
        const EigenMode m(k, I);
        for (double x : {I.a, I.b}) {
            EXPECT_NEAR(m.derivative(x, 0), 0.0, 1e-9) << k;
            EXPECT_NEAR(m.derivative(x, 1), 0.0, 1e-9 * m.wavenumber()) << k;
        }
        EXPECT_NE(m.derivative(I.b, 2), 0.0);
    }
}

TEST(EigenMode, DerivativesMatchFiniteDifferences)
{
    const Interval I{1.0, 2.0};
    const EigenMode m(3, I);
    const double h = 1e-5;
    for (double x : {1.2, 1.5, 1.8})
        for (int j = 0; j < 4; ++j) {
            const double fd = (m.derivative(x + h, j) - m.derivative(x - h, j)) / (2.0 * h);
            EXPECT_NEAR(fd, m.derivative(x, j + 1), 1e-5 * std::pow(m.wavenumber(), j + 1));
        }
}

TEST(ModalBasis, OrthonormalAndEigenrelation)
{
    const ModalBasis B({1.0, 2.0}, 8);
    const auto w = B.quadrature().weights();
    for (int k = 0; k < 8; ++k) {
        for (int m = 0; m < 8; ++m) {
            double s = 0.0;
            for (std::size_t q = 0; q < w.size(); ++q)
                s += w[q] * B.nodal(0, k)[q] * B.nodal(0, m)[q];
            EXPECT_NEAR(s, k == m ? 1.0 : 0.0, 1e-8);
        }
        double r = 0.0;
        for (std::size_t q = 0; q < w.size(); ++q) {
            const double d = B.nodal(4, k)[q] - B.eigenvalues()[k] * B.nodal(0, k)[q];
            r += w[q] * d * d;
        }
        EXPECT_LT(std::sqrt(r) / B.eigenvalues()[k], 1e-6);
    }
}

TEST(ModalBasis, EigenvaluesIncreaseAndScaleWithLength)
{
    const ModalBasis B1({1.0, 2.0}, 6), B2({0.0, 2.0}, 6);
    for (int k = 0; k < 6; ++k) {
        if (k > 0) {
            EXPECT_GT(B1.eigenvalues()[k], B1.eigenvalues()[k - 1]);
        }
        EXPECT_NEAR(B1.eigenvalues()[k] / B2.eigenvalues()[k], 16.0, 1e-8);
    }
}

TEST(ModalBasis, ProjectionRecoversModalCombination)
{
    const ModalBasis B({1.0, 2.0}, 6);
    const std::array<double, 6> c{0.3, -1.2, 0.0, 0.7, 0.05, -0.4};
    auto field = [&](double x) {
        double s = 0.0;
        for (int k = 0; k < 6; ++k)
            s += c[k] * B.mode(k).derivative(x, 0);
        return s;
    };
    const auto p = B.project(field);
    for (int k = 0; k < 6; ++k)
        EXPECT_NEAR(p[k], c[k], 1e-9);
}

TEST(ModalBasis, IntegrationByPartsSymmetry)
{
    // <v_k'''', v_m> = <v_k'', v_m''> for clamped functions
    const ModalBasis B({1.0, 2.0}, 5);
    const auto w = B.quadrature().weights();
    for (int k = 0; k < 5; ++k)
        for (int m = 0; m < 5; ++m) {
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t q = 0; q < w.size(); ++q) {
                lhs += w[q] * B.nodal(4, k)[q] * B.nodal(0, m)[q];
                rhs += w[q] * B.nodal(2, k)[q] * B.nodal(2, m)[q];
            }
            EXPECT_NEAR(lhs, rhs, 1e-7 * B.eigenvalues()[std::max(k, m)]);
        }
}

TEST(Philox, KnownAnswerVectors)
{
    const auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(a, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    const auto b = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(b, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    const auto c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(c, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, NormalStreamMoments)
{
    const NormalStream s(42, 3);
    const int n = 200000;
    double m = 0.0, v = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s(i);
        m += z;
        v += z * z;
    }
    m /= n;
    v = v / n - m * m;
    EXPECT_LT(std::abs(m), 4.0 / std::sqrt(n));
    EXPECT_NEAR(v, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Philox, StreamsAreDistinctAndRepeatable)
{
    const NormalStream a(1, 0), b(1, 1), a2(1, 0);
    EXPECT_EQ(a(17), a2(17));
    EXPECT_NE(a(17), b(17));
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform(i);
        EXPECT_GT(u, 0.0);
        EXPECT_LE(u, 1.0);
    }
}
