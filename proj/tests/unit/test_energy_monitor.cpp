#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "sbeam/energy_monitor.hpp"
#include "sbeam/parallel.hpp"

using namespace sbeam;

namespace {

auto basis(int M) { return std::make_shared<const ModalBasis>(Interval{1.0, 2.0}, M); }

SimulationConfig cfg(int steps, int M, int trials = 1)
{
    SimulationConfig c;
    c.modes = M;
    c.steps = steps;
    c.trials = trials;
    return c;
}

} // namespace

TEST(Energy, ModalFormula)
{
    const std::vector<double> c{1.0, 2.0}, cd{0.5, -1.0}, eig{4.0, 9.0};
    EXPECT_DOUBLE_EQ(energy(c, cd, eig), 0.25 + 1.0 + 4.0 + 36.0);
}

TEST(Energy, ModalAndNodalRoutesAgree)
{
    auto B = basis(6);
    GalerkinSystem sys(cfg(32, 6), B, Forcing::none());
    InitialData init = InitialData::zero(6);
    init.c0 = {0.4, -0.1, 0.2, 0.0, 0.05, 0.01};
    init.cdot0 = {0.0, 3.0, 0.0, -1.0, 0.0, 0.2};
    const auto tr = sys.simulate(init, 0);
    const auto snap = reconstruct(tr, *B, 11, B->quadrature().nodes());
    EXPECT_NEAR(energy(snap, B->quadrature()), energy(tr, 11, B->eigenvalues()), 1e-8 * energy(tr, 11, B->eigenvalues()));
}

TEST(Energy, ConservedWithoutForcing)
{
    auto B = basis(8);
    GalerkinSystem sys(cfg(1024, 8), B, Forcing::none());
    InitialData init = InitialData::zero(8);
    for (int k = 0; k < 8; ++k) {
        init.c0[k] = 1.0 / (k + 1);
        init.cdot0[k] = std::sin(k + 1.0);
    }
    const auto e = energy_series(sys.simulate(init, 0), B->eigenvalues());
    for (double v : e)
        EXPECT_NEAR(v / e.front(), 1.0, 1e-10);
}

TEST(Energy, DeterministicIdentityResidualIsSecondOrder)
{
    auto B = basis(4);
    auto fm = [](double t, std::span<double> o) {
        for (std::size_t k = 0; k < o.size(); ++k)
            o[k] = std::cos(3.0 * (k + 1) * t + 0.3 * k) / (k + 1);
    };
    InitialData init = InitialData::zero(4);
    init.c0[0] = 1.0;
    init.cdot0[1] = 0.5;
    std::vector<double> r;
    for (int n : {64, 128, 256, 512}) {
        GalerkinSystem sys(cfg(n, 4), B, Forcing::modal(fm, nullptr));
        r.push_back(ito_identity_residual(sys.simulate(init, 0), B->eigenvalues()).max_abs);
    }
    for (std::size_t i = 1; i < r.size(); ++i)
        EXPECT_NEAR(r[i - 1] / r[i], 4.0, 0.5);
}

TEST(Energy, MeanEnergyGrowsLinearlyUnderAdditiveNoise)
{
    const int M = 4, N = 256;
    auto B = basis(M);
    auto gm = [](double, std::span<double> o) {
        for (std::size_t k = 0; k < o.size(); ++k)
            o[k] = 1.0 / (k + 1);
    };
    const double g2 = 1.0 + 0.25 + 1.0 / 9 + 1.0 / 16;
    GalerkinSystem sys(cfg(256, M, N), B, Forcing::modal(nullptr, gm));
    std::vector<std::vector<double>> series(N);
    parallel_for(N, [&](std::size_t i) { series[i] = energy_series(sys.simulate(InitialData::zero(M), i), B->eigenvalues()); });
    const auto rec = energy_record(series, 1.0);
    for (std::size_t i = 32; i < rec.t.size(); i += 32)
        EXPECT_LE(std::abs(rec.mean[i] - rec.t[i] * g2), 3.0 * rec.stderr_[i] + 1e-12) << "t = " << rec.t[i];
}

TEST(Energy, PathwiseItoIdentityIsSmallForSmoothNoise)
{
    const int M = 3;
    auto B = basis(M);
    auto gm = [](double t, std::span<double> o) {
        o[0] = 1.0 + t;
        o[1] = 0.5;
        o[2] = 0.0;
    };
    GalerkinSystem coarse(cfg(256, M), B, Forcing::modal(nullptr, gm)),
        fine(cfg(4096, M), B, Forcing::modal(nullptr, gm));
    const double rc = ito_identity_residual(coarse.simulate(InitialData::zero(M), 0), B->eigenvalues()).relative();
    const double rf = ito_identity_residual(fine.simulate(InitialData::zero(M), 0), B->eigenvalues()).relative();
    EXPECT_LT(rf, 0.1);
    EXPECT_LT(rf, rc);
}

TEST(EnergyRecord, MeanAndStandardError)
{
    const std::vector<std::vector<double>> s{{1.0, 2.0}, {3.0, 2.0}, {5.0, 2.0}};
    const auto rec = energy_record(s, 1.0);
    ASSERT_EQ(rec.t.size(), 2u);
    EXPECT_DOUBLE_EQ(rec.t[1], 1.0);
    EXPECT_DOUBLE_EQ(rec.mean[0], 3.0);
    EXPECT_NEAR(rec.stderr_[0], 2.0 / std::sqrt(3.0), 1e-15);
    EXPECT_DOUBLE_EQ(rec.stderr_[1], 0.0);
}

TEST(EnergyEstimate, RatioBoundedForConservedEnergy)
{
    const std::vector<std::vector<double>> s{std::vector<double>(65, 2.0)};
    const auto rep = energy_estimate_check(s, 0.0, 0.0);
    EXPECT_NEAR(rep.max_ratio, 1.0, 1e-15);
    EXPECT_EQ(rep.evaluated, 81);
}

TEST(EnergyEstimate, RejectsEmptyEnsemble)
{
    EXPECT_THROW(energy_estimate_check({}, 0.0, 0.0), ContractViolation);
}
