#pragma once

// Energy ||y_t||^2 + ||y_xx||^2 of modal states and the Ito energy balance.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "sbeam/errors.hpp"
#include "sbeam/quadrature.hpp"
#include "sbeam/spectral_sde.hpp"

namespace sbeam {

/// Parseval form: sum_k (c'_k)^2 + lambda_k c_k^2.
inline double energy(std::span<const double> c, std::span<const double> cdot, std::span<const double> eigenvalues)
{
    require(c.size() == cdot.size() && c.size() <= eigenvalues.size(), "energy: size mismatch");
    double e = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
        e += cdot[k] * cdot[k] + eigenvalues[k] * c[k] * c[k];
    return e;
}

inline double energy(const ModalTrajectory& tr, int i, std::span<const double> eigenvalues)
{
    return energy(tr.c_at(i), tr.cdot_at(i), eigenvalues);
}

/// Quadrature form from a snapshot taken on the nodes of `quad`.
inline double energy(const FieldSnapshot& snap, const Quadrature& quad)
{
    require(snap.x.size() == quad.size(), "energy: snapshot must live on the quadrature nodes");
    double e = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q)
        e += quad.weights()[q] * (snap.y_t[q] * snap.y_t[q] + snap.y[2][q] * snap.y[2][q]);
    return e;
}

inline std::vector<double> energy_series(const ModalTrajectory& tr, std::span<const double> eigenvalues)
{
    std::vector<double> out(tr.steps + 1);
    for (int i = 0; i <= tr.steps; ++i)
        out[i] = energy(tr, i, eigenvalues);
    return out;
}

struct EnergyRecord {
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::vector<double> theory; // empty when no closed form is known

    void write_csv(std::ostream& os) const
    {
        os << "t,mean_energy,stderr" << (theory.empty() ? "" : ",theory") << '\n';
        os.precision(17);
        for (std::size_t i = 0; i < t.size(); ++i) {
            os << t[i] << ',' << mean[i] << ',' << stderr_[i];
            if (!theory.empty())
                os << ',' << theory[i];
            os << '\n';
        }
    }
};

/// Ensemble mean and standard error of E(t); `series[n][i]` is trial n at time i.
inline EnergyRecord energy_record(const std::vector<std::vector<double>>& series, double horizon)
{
    require(!series.empty(), "energy_record: empty ensemble");
    const std::size_t nt = series.front().size();
    const double n = static_cast<double>(series.size());
    EnergyRecord rec;
    rec.t.resize(nt);
    rec.mean.assign(nt, 0.0);
    rec.stderr_.assign(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        rec.t[i] = horizon * static_cast<double>(i) / static_cast<double>(nt - 1);
        double s = 0.0, s2 = 0.0;
        for (const auto& tr : series) {
            s += tr[i];
            s2 += tr[i] * tr[i];
        }
        const double m = s / n;
        rec.mean[i] = m;
        rec.stderr_[i] = series.size() > 1 ? std::sqrt(std::max(0.0, (s2 - n * m * m) / (n - 1)) / n) : 0.0;
    }
    return rec;
}

struct ItoResidual {
    std::vector<double> r;  // residual profile on the time grid
    double max_abs = 0.0;
    double scale = 0.0;     // max_t E(t), used for relative reporting
    double relative() const { return scale > 0.0 ? max_abs / scale : max_abs; }
};

/// r(t) = E(t) - E(0) - 2 int <f, y_t> - 2 sum <g, y_t> dB - int ||g||_M^2,
/// with trapezoid time integrals and left-point stochastic sums.
inline ItoResidual ito_identity_residual(const ModalTrajectory& tr, std::span<const double> eigenvalues)
{
    require(tr.forcing != nullptr, "ito_identity_residual: trajectory lacks forcing table");
    require(static_cast<int>(tr.dB.size()) == tr.steps, "ito_identity_residual: trajectory lacks Brownian increments");
    const int M = tr.modes;
    const double h = tr.h();
    auto fy = [&](int i) {
        double s = 0.0;
        for (int k = 0; k < M; ++k)
            s += tr.f_at(i)[k] * tr.cdot_at(i)[k];
        return s;
    };
    auto gy = [&](int i) {
        double s = 0.0;
        for (int k = 0; k < M; ++k)
            s += tr.g_at(i)[k] * tr.cdot_at(i)[k];
        return s;
    };
    auto gg = [&](int i) {
        double s = 0.0;
        for (int k = 0; k < M; ++k)
            s += tr.g_at(i)[k] * tr.g_at(i)[k];
        return s;
    };
    ItoResidual out;
    out.r.assign(tr.steps + 1, 0.0);
    const double e0 = energy(tr, 0, eigenvalues);
    out.scale = e0;
    double drift = 0.0, mart = 0.0, quad = 0.0;
    double fy_prev = fy(0), gg_prev = gg(0);
    for (int i = 1; i <= tr.steps; ++i) {
        const double fy_cur = fy(i), gg_cur = gg(i);
        drift += 0.5 * h * (fy_prev + fy_cur);
        quad += 0.5 * h * (gg_prev + gg_cur);
        mart += gy(i - 1) * tr.dB[i - 1];
        fy_prev = fy_cur;
        gg_prev = gg_cur;
        const double e = energy(tr, i, eigenvalues);
        out.scale = std::max(out.scale, e);
        out.r[i] = e - e0 - 2.0 * drift - 2.0 * mart - quad;
        out.max_abs = std::max(out.max_abs, std::abs(out.r[i]));
    }
    return out;
}

struct EnergyEstimateReport {
    double max_ratio = 0.0;
    double worst_s = 0.0, worst_t = 0.0;
    int evaluated = 0;
    int skipped = 0;
    bool degenerate = false;
};

/// Two-way estimate on a 9x9 grid of (s, t): sqrt(E[E(t)]) versus
/// sqrt(E[E(s)]) + ||f|| + ||g||, where the forcing norms are the ensemble
/// root-mean-square L2(0,T;L2) norms of the modal forcing.
inline EnergyEstimateReport energy_estimate_check(const std::vector<std::vector<double>>& energy_by_trial,
                                                  double f_norm, double g_norm, int grid = 9)
{
    require(!energy_by_trial.empty(), "energy_estimate_check: empty ensemble");
    const std::size_t nt = energy_by_trial.front().size();
    std::vector<double> mean(nt, 0.0);
    for (const auto& tr : energy_by_trial)
        for (std::size_t i = 0; i < nt; ++i)
            mean[i] += tr[i];
    for (double& m : mean)
        m /= static_cast<double>(energy_by_trial.size());
    EnergyEstimateReport rep;
    for (int a = 0; a < grid; ++a) {
        for (int b = 0; b < grid; ++b) {
            const std::size_t is = (nt - 1) * a / (grid - 1);
            const std::size_t it = (nt - 1) * b / (grid - 1);
            const double den = std::sqrt(mean[is]) + f_norm + g_norm;
            const double num = std::sqrt(mean[it]);
            if (!(den > 0.0)) {
                ++rep.skipped;
                continue;
            }
            ++rep.evaluated;
            const double ratio = num / den;
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.worst_s = static_cast<double>(is) / static_cast<double>(nt - 1);
                rep.worst_t = static_cast<double>(it) / static_cast<double>(nt - 1);
            }
        }
    }
    rep.degenerate = rep.evaluated == 0;
    return rep;
}

/// Root-mean-square L2(0,T;L2) norm of a modal table (trapezoid in time).
inline double modal_l2_norm(std::span<const double> table, int steps, int modes, double horizon)
{
    const double h = horizon / steps;
    double s = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double e = 0.0;
        for (int k = 0; k < modes; ++k) {
            const double v = table[std::size_t(i) * modes + k];
            e += v * v;
        }
        s += (i == 0 || i == steps ? 0.5 : 1.0) * h * e;
    }
    return std::sqrt(s);
}

} // namespace sbeam
