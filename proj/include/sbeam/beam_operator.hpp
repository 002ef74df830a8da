#pragma once

// Eigenbasis of the clamped fourth-order operator y -> y_xxxx on [a, b]
// (y = y_x = 0 at both ends), with quadrature-based projection.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sbeam/errors.hpp"
#include "sbeam/quadrature.hpp"

namespace sbeam {

struct Interval {
    double a = 1.0;
    double b = 2.0;

    double length() const noexcept { return b - a; }
    bool contains(double x, double slack = 1e-12) const noexcept
    {
        const double tol = slack * std::max(1.0, std::abs(a) + std::abs(b));
        return x >= a - tol && x <= b + tol;
    }
    void validate() const
    {
        require(std::isfinite(a) && std::isfinite(b), "Interval: endpoints must be finite");
        require(b > a, "Interval: requires b > a");
    }
};

/// Overflow-safe characteristic residual cos(mu L) - 1/cosh(mu L).
/// Shares its roots with cosh(mu L) cos(mu L) = 1 for mu > 0.
inline double characteristic_residual(double mu, double length)
{
    const double z = mu * length;
    return std::cos(z) - 1.0 / std::cosh(z);
}

inline double characteristic_derivative(double mu, double length)
{
    const double z = mu * length;
    const double sech = 1.0 / std::cosh(z);
    return length * (-std::sin(z) + std::tanh(z) * sech);
}

/// k-th positive root of cosh(mu L) cos(mu L) = 1.
///
/// The root is isolated by scanning ((k - 1/2) pi / L, (k + 3/2) pi / L) for sign
/// changes of the overflow-safe residual and picking the change closest to
/// (k + 1/2) pi / L; it is then refined by bisection and polished by Newton
/// steps kept inside the bracket.
inline double solve_characteristic(int k, double length, int max_iterations = 200)
{
    require(k >= 1, "solve_characteristic: k must be >= 1");
    require(length > 0.0 && std::isfinite(length), "solve_characteristic: L must be positive");
    constexpr double pi = std::numbers::pi;
    const double lo0 = (k - 0.5) * pi / length;
    const double hi0 = (k + 1.5) * pi / length;
    const double target = (k + 0.5) * pi / length;

    constexpr int scan = 128;
    double best_lo = 0.0, best_hi = 0.0, best_dist = INFINITY;
    double prev_mu = lo0;
    double prev_f = characteristic_residual(lo0, length);
    for (int i = 1; i <= scan; ++i) {
        const double mu = lo0 + (hi0 - lo0) * i / scan;
        const double f = characteristic_residual(mu, length);
        if ((prev_f <= 0.0 && f >= 0.0) || (prev_f >= 0.0 && f <= 0.0)) {
            const double dist = std::abs(0.5 * (prev_mu + mu) - target);
            if (dist < best_dist) {
                best_dist = dist;
                best_lo = prev_mu;
                best_hi = mu;
            }
        }
        prev_mu = mu;
        prev_f = f;
    }
    if (!std::isfinite(best_dist)) {
        std::ostringstream os;
        os << "solve_characteristic: no sign change for k=" << k << " in (" << lo0 << ", " << hi0 << ")";
        throw ConvergenceError(os.str());
    }

    double lo = best_lo, hi = best_hi;
    double flo = characteristic_residual(lo, length);
    // bisection down to a narrow bracket
    for (int i = 0; i < 40 && (hi - lo) > 1e-6 * target; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = characteristic_residual(mid, length);
        if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double mu = 0.5 * (lo + hi);
    for (int i = 0; i < max_iterations; ++i) {
        const double f = characteristic_residual(mu, length);
        if (std::abs(f) < 1e-12)
            return mu;
        if ((f <= 0.0) == (flo <= 0.0)) {
            lo = mu;
            flo = f;
        } else {
            hi = mu;
        }
        const double df = characteristic_derivative(mu, length);
        double next = mu - f / df;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (next == mu)
            break;
        mu = next;
    }
    const double f = characteristic_residual(mu, length);
    if (std::abs(f) < 1e-12)
        return mu;
    std::ostringstream os;
    os.precision(17);
    os << "solve_characteristic: k=" << k << " did not converge; bracket [" << lo << ", " << hi
       << "], residual " << f;
    throw ConvergenceError(os.str());
}

/// One L2-normalized clamped-beam eigenfunction.
///
/// Stored as v(s) = P e^{-mu s} + Q e^{mu (s - L)} + R cos(mu s) + S sin(mu s), s = x - a,
/// which is the usual cosh/sinh/cos/sin form rewritten so that no term grows
/// beyond O(1) on the interval.
class EigenMode {
public:
    EigenMode(int k, Interval interval)
        : k_(k), interval_(interval)
    {
        interval.validate();
        const double length = interval.length();
        mu_ = solve_characteristic(k, length);
        const double z = mu_ * length;
        const double e = std::exp(-z);
        const double sz = std::sin(z), cz = std::cos(z);
        const double den = 1.0 - e * e - 2.0 * sz * e;
        const double sigma = (1.0 + e * e - 2.0 * cz * e) / den;
        coef_ = {0.5 * (1.0 + sigma), (cz - sz - e) / den, -1.0, sigma};

        // ||v||^2 over a fine rule; the closed-form value is L for this family.
        const Quadrature fine(interval.a, interval.b, 32, 24);
        const double norm2 = fine.integrate([&](double x) {
            const double v = raw(x, 0);
            return v * v;
        });
        const double scale = 1.0 / std::sqrt(norm2);
        for (double& c : coef_)
            c *= scale;
        raw_norm_squared_ = norm2;
    }

    int index() const noexcept { return k_; }
    double wavenumber() const noexcept { return mu_; }
    double eigenvalue() const noexcept { return mu_ * mu_ * mu_ * mu_; }
    const Interval& interval() const noexcept { return interval_; }
    /// Squared L2 norm of the unnormalized shape (diagnostic; equals L analytically).
    double raw_norm_squared() const noexcept { return raw_norm_squared_; }

    /// d^order v / dx^order at x, any order >= 0.
    double derivative(double x, int order) const { return raw(x, order); }

private:
    double raw(double x, int order) const
    {
        const double s = x - interval_.a;
        const double length = interval_.length();
        const double mun = std::pow(mu_, order);
        const double sign = (order % 2 == 0) ? 1.0 : -1.0;
        const double th = mu_ * s;
        double trig = 0.0;
        switch (order % 4) {
        case 0: trig = coef_[2] * std::cos(th) + coef_[3] * std::sin(th); break;
        case 1: trig = -coef_[2] * std::sin(th) + coef_[3] * std::cos(th); break;
        case 2: trig = -coef_[2] * std::cos(th) - coef_[3] * std::sin(th); break;
        default: trig = coef_[2] * std::sin(th) - coef_[3] * std::cos(th); break;
        }
        return mun * (sign * coef_[0] * std::exp(-th) + coef_[1] * std::exp(mu_ * (s - length)) + trig);
    }

    int k_;
    Interval interval_;
    double mu_ = 0.0;
    std::array<double, 4> coef_{};
    double raw_norm_squared_ = 0.0;
};

/// Value of the order-th derivative of a mode at x in [a, b]; order in 0..4.
inline double eval_mode(const EigenMode& mode, double x, int order)
{
    require(order >= 0 && order <= 4, "eval_mode: order must be in 0..4");
    require(mode.interval().contains(x), "eval_mode: x outside [a, b]");
    return mode.derivative(x, order);
}

template <class F, class G>
double inner_product(F&& f, G&& g, const Quadrature& quad)
{
    return quad.integrate([&](double x) { return f(x) * g(x); });
}

template <class F>
std::vector<double> project(F&& field, std::span<const EigenMode> modes, const Quadrature& quad)
{
    const auto nodes = quad.nodes();
    const auto weights = quad.weights();
    std::vector<double> fw(nodes.size());
    for (std::size_t q = 0; q < nodes.size(); ++q)
        fw[q] = weights[q] * field(nodes[q]);
    std::vector<double> out(modes.size(), 0.0);
    for (std::size_t k = 0; k < modes.size(); ++k) {
        double sum = 0.0;
        for (std::size_t q = 0; q < nodes.size(); ++q)
            sum += fw[q] * modes[k].derivative(nodes[q], 0);
        out[k] = sum;
    }
    return out;
}

/// First M modes together with their values (orders 0..4) at the quadrature
/// nodes and at both endpoints. Immutable after construction.
class ModalBasis {
public:
    static constexpr int max_order = 4;

    ModalBasis(Interval interval, int modes, int panels = 8, int order = 16)
        : ModalBasis(interval, modes, Quadrature(interval.a, interval.b, panels, order))
    {
    }

    ModalBasis(Interval interval, int modes, Quadrature quad)
        : interval_(interval), quad_(std::move(quad))
    {
        interval.validate();
        require(modes >= 1, "ModalBasis: need at least one mode");
        modes_.reserve(modes);
        for (int k = 1; k <= modes; ++k)
            modes_.emplace_back(k, interval);
        const std::size_t nq = quad_.size();
        for (int j = 0; j <= max_order; ++j) {
            table_[j].resize(static_cast<std::size_t>(modes) * nq);
            ends_a_[j].resize(modes);
            ends_b_[j].resize(modes);
            for (int k = 0; k < modes; ++k) {
                for (std::size_t q = 0; q < nq; ++q)
                    table_[j][k * nq + q] = modes_[k].derivative(quad_.nodes()[q], j);
                ends_a_[j][k] = modes_[k].derivative(interval.a, j);
                ends_b_[j][k] = modes_[k].derivative(interval.b, j);
            }
        }
        for (const auto& m : modes_)
            eigenvalues_.push_back(m.eigenvalue());
    }

    const Interval& interval() const noexcept { return interval_; }
    const Quadrature& quadrature() const noexcept { return quad_; }
    int size() const noexcept { return static_cast<int>(modes_.size()); }
    std::span<const EigenMode> modes() const noexcept { return modes_; }
    const EigenMode& mode(int k0) const { return modes_.at(k0); }
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }

    /// v_k^{(order)} at every quadrature node, k zero-based.
    std::span<const double> nodal(int order, int k0) const
    {
        const std::size_t nq = quad_.size();
        return std::span<const double>(table_[order]).subspan(k0 * nq, nq);
    }
    std::span<const double> at_a(int order) const { return ends_a_[order]; }
    std::span<const double> at_b(int order) const { return ends_b_[order]; }

    template <class F>
    std::vector<double> project(F&& field) const
    {
        return sbeam::project(std::forward<F>(field), modes(), quad_);
    }

private:
    Interval interval_;
    Quadrature quad_;
    std::vector<EigenMode> modes_;
    std::vector<double> eigenvalues_;
    std::array<std::vector<double>, max_order + 1> table_;
    std::array<std::vector<double>, max_order + 1> ends_a_;
    std::array<std::vector<double>, max_order + 1> ends_b_;
};

} // namespace sbeam
