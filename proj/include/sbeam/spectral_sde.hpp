#pragma once

// Modal Galerkin integration of dy_t + y_xxxx dt = f dt + g dB on a clamped
// interval, driven by one scalar Brownian motion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sbeam/beam_operator.hpp"
#include "sbeam/errors.hpp"
#include "sbeam/philox.hpp"

namespace sbeam {

struct SimulationConfig {
    Interval interval{1.0, 2.0};
    double horizon = 1.0;
    int modes = 8;
    int steps = 2048;
    std::uint64_t seed = 20240611;
    int trials = 256;

    double step() const noexcept { return horizon / steps; }

    /// Sets `steps` from a requested step size; T/h must be an integer.
    void set_step(double h)
    {
        require(h > 0.0 && h <= horizon, "SimulationConfig: need 0 < h <= T");
        const double n = horizon / h;
        const double r = std::round(n);
        require(std::abs(n - r) < 1e-9 * r, "SimulationConfig: T/h must be an integer");
        steps = static_cast<int>(r);
    }

    void validate(int available_modes = 64) const
    {
        interval.validate();
        require(horizon > 0.0 && std::isfinite(horizon), "SimulationConfig: T must be positive");
        require(steps >= 1, "SimulationConfig: need at least one step");
        require(modes >= 1 && modes <= available_modes, "SimulationConfig: mode count out of range");
        require(trials >= 1, "SimulationConfig: need at least one trial");
    }
};

using SpaceTimeField = std::function<double(double t, double x)>;
/// Writes the modal coefficients <field(t), v_k> for k = 1..M into `out`.
using ModalField = std::function<void(double t, std::span<double> out)>;
/// Adapted drift: given (t, c, c') writes an additional modal forcing into `out`.
using ModalFeedback =
    std::function<void(double t, std::span<const double> c, std::span<const double> cdot, std::span<double> out)>;

struct Forcing {
    SpaceTimeField f;
    SpaceTimeField g;
    ModalField f_modal;
    ModalField g_modal;
    ModalFeedback feedback;

    static Forcing none() { return {}; }
    static Forcing modal(ModalField fm, ModalField gm)
    {
        Forcing out;
        out.f_modal = std::move(fm);
        out.g_modal = std::move(gm);
        return out;
    }
};

/// f_k and g_k on the time grid, row-major by time index.
struct ModalForcingTable {
    int steps = 0;
    int modes = 0;
    std::vector<double> f;
    std::vector<double> g;
    bool has_f = false;
    bool has_g = false;

    std::span<const double> f_at(int i) const { return std::span<const double>(f).subspan(std::size_t(i) * modes, modes); }
    std::span<const double> g_at(int i) const { return std::span<const double>(g).subspan(std::size_t(i) * modes, modes); }
};

inline ModalForcingTable tabulate_forcing(const Forcing& forcing, const ModalBasis& basis, int modes, double horizon,
                                          int steps)
{
    ModalForcingTable table;
    table.steps = steps;
    table.modes = modes;
    table.f.assign(std::size_t(steps + 1) * modes, 0.0);
    table.g.assign(std::size_t(steps + 1) * modes, 0.0);
    const double h = horizon / steps;
    const auto modes_span = basis.modes().first(modes);
    auto fill = [&](const SpaceTimeField& field, const ModalField& modal, std::vector<double>& out) {
        if (!field && !modal)
            return false;
        for (int i = 0; i <= steps; ++i) {
            const double t = i * h;
            std::span<double> row(out.data() + std::size_t(i) * modes, modes);
            if (modal) {
                modal(t, row);
            } else {
                const auto c = project([&](double x) { return field(t, x); }, modes_span, basis.quadrature());
                std::copy(c.begin(), c.end(), row.begin());
            }
        }
        return true;
    };
    table.has_f = fill(forcing.f, forcing.f_modal, table.f);
    table.has_g = fill(forcing.g, forcing.g_modal, table.g);
    return table;
}

struct InitialData {
    std::vector<double> c0;
    std::vector<double> cdot0;

    static InitialData zero(int modes) { return {std::vector<double>(modes, 0.0), std::vector<double>(modes, 0.0)}; }
};

struct ModeState {
    double c = 0.0;
    double cdot = 0.0;
};

/// Exact one-step weights of the forced oscillator c'' + w^2 c = F on a step of length h.
struct StepWeights {
    double cos_wh = 1.0, sin_over_w = 0.0, w_sin = 0.0;
    double alpha0 = 0.0; // int_0^h sin(w r)/w dr
    double gamma = 0.0;  // (1/h) int_0^h r sin(w r)/w dr
    double beta0 = 0.0;  // int_0^h cos(w r) dr
    double delta = 0.0;  // (1/h) int_0^h r cos(w r) dr

    StepWeights() = default;
    StepWeights(double w, double h)
    {
        const double z = w * h;
        cos_wh = std::cos(z);
        w_sin = w * std::sin(z);
        if (z < 1e-3) {
            const double w2 = w * w, h2 = h * h;
            sin_over_w = h * (1.0 - w2 * h2 / 6.0 + w2 * w2 * h2 * h2 / 120.0);
            alpha0 = h2 * (0.5 - w2 * h2 / 24.0 + w2 * w2 * h2 * h2 / 720.0);
            gamma = h2 * (1.0 / 3.0 - w2 * h2 / 30.0 + w2 * w2 * h2 * h2 / 840.0);
            beta0 = sin_over_w;
            delta = h * (0.5 - w2 * h2 / 8.0 + w2 * w2 * h2 * h2 / 144.0);
        } else {
            const double s = std::sin(z);
            sin_over_w = s / w;
            alpha0 = (1.0 - cos_wh) / (w * w);
            gamma = (s - z * cos_wh) / (h * w * w * w);
            beta0 = sin_over_w;
            delta = (z * s + cos_wh - 1.0) / (h * w * w);
        }
    }
};

/// One step with drift linear in time between f0 (left) and f1 (right) and the
/// noise kick g dB applied at the left endpoint.
inline ModeState step_mode(ModeState s, const StepWeights& w, double f0, double f1, double g, double dB) noexcept
{
    const double v = s.cdot + g * dB;
    const double df = f1 - f0;
    ModeState out;
    out.c = w.cos_wh * s.c + w.sin_over_w * v + f0 * w.alpha0 + df * (w.alpha0 - w.gamma);
    out.cdot = -w.w_sin * s.c + w.cos_wh * v + f0 * w.beta0 + df * (w.beta0 - w.delta);
    return out;
}

/// Left-point form: f and g frozen at the start of the step.
inline ModeState step_mode(ModeState s, double omega, double f, double g, double dB, double h)
{
    require(omega >= 0.0 && h > 0.0, "step_mode: need omega >= 0 and h > 0");
    return step_mode(s, StepWeights(omega, h), f, f, g, dB);
}

/// Time-discretized modal paths for one Brownian path.
struct ModalTrajectory {
    int steps = 0;
    int modes = 0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::vector<double> dB;   // steps
    std::vector<double> c;    // (steps + 1) * modes
    std::vector<double> cdot; // (steps + 1) * modes
    std::vector<double> f;    // realized drift, (steps + 1) * modes
    std::shared_ptr<const ModalForcingTable> forcing;

    double h() const noexcept { return horizon / steps; }
    double time(int i) const noexcept { return i * h(); }
    std::span<const double> c_at(int i) const { return std::span<const double>(c).subspan(std::size_t(i) * modes, modes); }
    std::span<const double> cdot_at(int i) const
    {
        return std::span<const double>(cdot).subspan(std::size_t(i) * modes, modes);
    }
    std::span<const double> f_at(int i) const { return std::span<const double>(f).subspan(std::size_t(i) * modes, modes); }
    std::span<const double> g_at(int i) const { return forcing->g_at(i); }
};

/// The truncated system for a fixed configuration and forcing. Immutable and
/// safe to share between worker threads.
class GalerkinSystem {
public:
    GalerkinSystem(SimulationConfig config, std::shared_ptr<const ModalBasis> basis, const Forcing& forcing)
        : config_(config), basis_(std::move(basis)), feedback_(forcing.feedback)
    {
        require(basis_ != nullptr, "GalerkinSystem: basis required");
        config_.validate(basis_->size());
        require(std::abs(basis_->interval().a - config_.interval.a) < 1e-14 &&
                    std::abs(basis_->interval().b - config_.interval.b) < 1e-14,
                "GalerkinSystem: basis interval differs from configuration");
        table_ = std::make_shared<const ModalForcingTable>(
            tabulate_forcing(forcing, *basis_, config_.modes, config_.horizon, config_.steps));
        weights_.reserve(config_.modes);
        for (int k = 0; k < config_.modes; ++k)
            weights_.emplace_back(std::sqrt(basis_->eigenvalues()[k]), config_.step());
    }

    const SimulationConfig& config() const noexcept { return config_; }
    const ModalBasis& basis() const noexcept { return *basis_; }
    std::shared_ptr<const ModalBasis> basis_ptr() const noexcept { return basis_; }
    const ModalForcingTable& forcing() const noexcept { return *table_; }

    /// Brownian increments for a trial; a pure function of (seed, trial).
    std::vector<double> increments(std::uint64_t trial) const
    {
        const NormalStream stream(config_.seed, trial);
        const double sqrt_h = std::sqrt(config_.step());
        std::vector<double> dB(config_.steps);
        for (int i = 0; i < config_.steps; i += 2) {
            const auto z = stream.pair(static_cast<std::uint32_t>(i / 2));
            dB[i] = sqrt_h * z[0];
            if (i + 1 < config_.steps)
                dB[i + 1] = sqrt_h * z[1];
        }
        return dB;
    }

    ModalTrajectory simulate(const InitialData& init, std::uint64_t trial) const
    {
        const int M = config_.modes;
        const int n = config_.steps;
        require(static_cast<int>(init.c0.size()) >= M && static_cast<int>(init.cdot0.size()) >= M,
                "simulate: initial data shorter than mode count");
        ModalTrajectory tr;
        tr.steps = n;
        tr.modes = M;
        tr.horizon = config_.horizon;
        tr.seed = config_.seed;
        tr.trial = trial;
        tr.forcing = table_;
        tr.dB = increments(trial);
        tr.c.resize(std::size_t(n + 1) * M);
        tr.cdot.resize(std::size_t(n + 1) * M);
        tr.f = table_->f;
        for (int k = 0; k < M; ++k) {
            tr.c[k] = init.c0[k];
            tr.cdot[k] = init.cdot0[k];
        }
        std::vector<double> extra(M, 0.0);
        const double h = config_.step();
        for (int i = 0; i < n; ++i) {
            const double* c = tr.c.data() + std::size_t(i) * M;
            const double* cd = tr.cdot.data() + std::size_t(i) * M;
            double* cn = tr.c.data() + std::size_t(i + 1) * M;
            double* cdn = tr.cdot.data() + std::size_t(i + 1) * M;
            const double* f0 = table_->f.data() + std::size_t(i) * M;
            const double* f1 = table_->f.data() + std::size_t(i + 1) * M;
            const double* g0 = table_->g.data() + std::size_t(i) * M;
            if (feedback_) {
                std::fill(extra.begin(), extra.end(), 0.0);
                feedback_(i * h, {c, std::size_t(M)}, {cd, std::size_t(M)}, extra);
                for (int k = 0; k < M; ++k)
                    tr.f[std::size_t(i) * M + k] += extra[k];
            }
            for (int k = 0; k < M; ++k) {
                const double fl = feedback_ ? f0[k] + extra[k] : f0[k];
                const double fr = feedback_ ? fl : f1[k];
                const ModeState s = step_mode({c[k], cd[k]}, weights_[k], fl, fr, g0[k], tr.dB[i]);
                if (!std::isfinite(s.c) || !std::isfinite(s.cdot)) {
                    std::ostringstream os;
                    os << "simulate: non-finite state in mode " << (k + 1) << " at step " << (i + 1);
                    throw SimulationError(os.str());
                }
                cn[k] = s.c;
                cdn[k] = s.cdot;
            }
        }
        if (feedback_) {
            std::fill(extra.begin(), extra.end(), 0.0);
            feedback_(n * h, tr.c_at(n), tr.cdot_at(n), extra);
            for (int k = 0; k < M; ++k)
                tr.f[std::size_t(n) * M + k] += extra[k];
        }
        return tr;
    }

private:
    SimulationConfig config_;
    std::shared_ptr<const ModalBasis> basis_;
    ModalFeedback feedback_;
    std::shared_ptr<const ModalForcingTable> table_;
    std::vector<StepWeights> weights_;
};

/// y and derivatives at one time on a spatial grid.
struct FieldSnapshot {
    double t = 0.0;
    std::vector<double> x;
    std::array<std::vector<double>, 5> y; // y, y_x, y_xx, y_xxx, y_xxxx
    std::vector<double> y_t;
};

inline FieldSnapshot reconstruct(const ModalTrajectory& tr, const ModalBasis& basis, int ti, std::span<const double> x)
{
    require(ti >= 0 && ti <= tr.steps, "reconstruct: time index out of range");
    require(tr.modes <= basis.size(), "reconstruct: basis has too few modes");
    FieldSnapshot snap;
    snap.t = tr.time(ti);
    snap.x.assign(x.begin(), x.end());
    for (auto& v : snap.y)
        v.assign(x.size(), 0.0);
    snap.y_t.assign(x.size(), 0.0);
    const auto c = tr.c_at(ti);
    const auto cd = tr.cdot_at(ti);
    for (std::size_t q = 0; q < x.size(); ++q) {
        for (int k = 0; k < tr.modes; ++k) {
            const auto& m = basis.mode(k);
            for (int j = 0; j <= 4; ++j)
                snap.y[j][q] += c[k] * m.derivative(x[q], j);
            snap.y_t[q] += cd[k] * m.derivative(x[q], 0);
        }
    }
    return snap;
}

struct BoundaryTrace {
    std::vector<double> t;
    std::vector<double> y_xx;
    std::vector<double> y_xxx;
};

inline BoundaryTrace boundary_trace(const ModalTrajectory& tr, const ModalBasis& basis)
{
    BoundaryTrace out;
    const auto v2 = basis.at_b(2);
    const auto v3 = basis.at_b(3);
    for (int i = 0; i <= tr.steps; ++i) {
        const auto c = tr.c_at(i);
        double s2 = 0.0, s3 = 0.0;
        for (int k = 0; k < tr.modes; ++k) {
            s2 += c[k] * v2[k];
            s3 += c[k] * v3[k];
        }
        out.t.push_back(tr.time(i));
        out.y_xx.push_back(s2);
        out.y_xxx.push_back(s3);
    }
    return out;
}

/// Multiplies a trajectory by a time cutoff: c -> chi c, c' -> chi' c + chi c',
/// drift -> chi f + chi'' c + 2 chi' c', noise amplitude -> chi g.
template <class Cutoff>
ModalTrajectory apply_cutoff(const ModalTrajectory& tr, const Cutoff& chi)
{
    ModalTrajectory z = tr;
    auto table = std::make_shared<ModalForcingTable>(*tr.forcing);
    const int M = tr.modes;
    for (int i = 0; i <= tr.steps; ++i) {
        const auto [x0, x1, x2] = chi(tr.time(i));
        for (int k = 0; k < M; ++k) {
            const std::size_t idx = std::size_t(i) * M + k;
            const double c = tr.c[idx], cd = tr.cdot[idx];
            z.c[idx] = x0 * c;
            z.cdot[idx] = x1 * c + x0 * cd;
            z.f[idx] = x0 * tr.f[idx] + x2 * c + 2.0 * x1 * cd;
            table->g[idx] = x0 * tr.forcing->g[idx];
        }
    }
    table->has_f = true;
    z.forcing = table;
    return z;
}

/// CSV: t, dB, then c_k, c'_k for every mode. dB on the final row is empty.
inline void write_trajectory_csv(std::ostream& os, const ModalTrajectory& tr)
{
    os << "t,dB";
    for (int k = 1; k <= tr.modes; ++k)
        os << ",c" << k << ",cdot" << k;
    os << '\n';
    os.precision(17);
    for (int i = 0; i <= tr.steps; ++i) {
        os << tr.time(i) << ',';
        if (i < tr.steps)
            os << tr.dB[i];
        for (int k = 0; k < tr.modes; ++k)
            os << ',' << tr.c_at(i)[k] << ',' << tr.cdot_at(i)[k];
        os << '\n';
    }
}

} // namespace sbeam
