#pragma once

// Closed-form space-time fields y(t, x) = sum_i amp_i phi_i(t) psi_i(x) with
// exact derivatives, used as manufactured solutions.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sbeam/beam_operator.hpp"
#include "sbeam/errors.hpp"
#include "sbeam/philox.hpp"
#include "sbeam/taylor_jet.hpp"

namespace sbeam {

using Polynomial = std::vector<double>; // coefficients of v^0, v^1, ...

inline Polynomial poly_mul(const Polynomial& p, const Polynomial& q)
{
    if (p.empty() || q.empty())
        return {};
    Polynomial r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            r[i + j] += p[i] * q[j];
    return r;
}

/// (v - a)^m (b - v)^n
inline Polynomial bump(double a, int m, double b, int n)
{
    Polynomial r{1.0};
    for (int i = 0; i < m; ++i)
        r = poly_mul(r, {-a, 1.0});
    for (int i = 0; i < n; ++i)
        r = poly_mul(r, {b, -1.0});
    return r;
}

inline Polynomial poly_derivative(const Polynomial& p)
{
    if (p.size() <= 1)
        return {};
    Polynomial r(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i)
        r[i - 1] = static_cast<double>(i) * p[i];
    return r;
}

template <class T>
T poly_eval(const Polynomial& p, const T& v)
{
    T acc(0.0);
    for (std::size_t i = p.size(); i-- > 0;)
        acc = acc * v + p[i];
    return acc;
}

/// P(v) * cos(omega v + phase); with omega = phase = 0 this is P alone.
struct Factor {
    Polynomial poly{1.0};
    double omega = 0.0;
    double phase = 0.0;

    bool trig() const noexcept { return omega != 0.0 || phase != 0.0; }

    double derivative(double v, int n) const
    {
        if (!trig()) {
            Polynomial p = poly;
            for (int k = 0; k < n; ++k)
                p = poly_derivative(p);
            return poly_eval(p, v);
        }
        // Leibniz rule between P^{(k)} and cos^{(n-k)}
        double sum = 0.0;
        Polynomial p = poly;
        double binom = 1.0;
        for (int k = 0; k <= n; ++k) {
            const int r = n - k;
            const double trig_r = std::pow(omega, r) * std::cos(omega * v + phase + r * std::numbers::pi / 2);
            sum += binom * poly_eval(p, v) * trig_r;
            binom = binom * (n - k) / (k + 1);
            p = poly_derivative(p);
        }
        return sum;
    }

    template <class J>
    J eval(const J& v) const
    {
        using std::cos;
        J out = poly_eval(poly, v);
        if (trig())
            out = out * cos(omega * v + phase);
        return out;
    }
};

struct SeparableTerm {
    double amplitude = 1.0;
    Factor time;
    Factor space;
};

class ManufacturedField {
public:
    ManufacturedField() = default;
    ManufacturedField(std::string name, std::vector<SeparableTerm> terms)
        : name_(std::move(name)), terms_(std::move(terms))
    {
    }

    const std::string& name() const noexcept { return name_; }
    const std::vector<SeparableTerm>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept
    {
        for (const auto& t : terms_)
            if (t.amplitude != 0.0)
                return false;
        return true;
    }

    /// d^i/dx^i d^j/dt^j y at (t, x).
    double derivative(double t, double x, int i, int j) const
    {
        double s = 0.0;
        for (const auto& term : terms_)
            s += term.amplitude * term.time.derivative(t, j) * term.space.derivative(x, i);
        return s;
    }
    double value(double t, double x) const { return derivative(t, x, 0, 0); }

    /// f = y_tt + y_xxxx, the drift that makes y an exact solution with g = 0.
    double forcing(double t, double x) const { return derivative(t, x, 0, 2) + derivative(t, x, 4, 0); }

    template <class J>
    J eval(const J& t, const J& x) const
    {
        J s(0.0);
        for (const auto& term : terms_)
            s = s + term.amplitude * (term.time.eval(t) * term.space.eval(x));
        return s;
    }

    ManufacturedField scaled(double kappa) const
    {
        ManufacturedField out = *this;
        for (auto& t : out.terms_)
            t.amplitude *= kappa;
        return out;
    }

    /// max over terms of |phi|, |phi'| at t = 0 and t = T, times |amp|.
    double end_value_defect(double horizon) const
    {
        double m = 0.0;
        for (const auto& term : terms_)
            for (double t : {0.0, horizon})
                for (int j = 0; j <= 1; ++j)
                    m = std::max(m, std::abs(term.amplitude * term.time.derivative(t, j)));
        return m;
    }

    /// max over terms of |psi|, |psi'| at both ends, times |amp|.
    double clamp_defect(const Interval& I) const
    {
        double m = 0.0;
        for (const auto& term : terms_)
            for (double x : {I.a, I.b})
                for (int i = 0; i <= 1; ++i)
                    m = std::max(m, std::abs(term.amplitude * term.space.derivative(x, i)));
        return m;
    }

private:
    std::string name_;
    std::vector<SeparableTerm> terms_;
};

/// amp * t^3 (T - t)^3 * (x - a)^2 (b - x)^2
inline ManufacturedField default_manufactured(const Interval& I, double horizon, double amplitude = 1.0)
{
    return ManufacturedField("quartic", {{amplitude, {bump(0.0, 3, horizon, 3)}, {bump(I.a, 2, I.b, 2)}}});
}

/// Five fields satisfying the clamped and zero-end conditions.
inline std::vector<ManufacturedField> manufactured_corpus(const Interval& I, double horizon)
{
    const double a = I.a, b = I.b, T = horizon;
    std::vector<ManufacturedField> corpus;
    corpus.push_back(default_manufactured(I, T));
    corpus.push_back(ManufacturedField(
        "skewed", {{1.0, {poly_mul(bump(0.0, 3, T, 3), {1.0, 1.0})}, {poly_mul(bump(a, 2, b, 2), {0.0, 1.0})}}}));
    corpus.push_back(ManufacturedField(
        "oscillating", {{1.0, {bump(0.0, 3, T, 3), 2.0 * std::numbers::pi / T, 0.0}, {bump(a, 2, b, 2), 3.0, 0.5}}}));
    corpus.push_back(ManufacturedField("cubic_end", {{1.0, {bump(0.0, 4, T, 3)}, {bump(a, 3, b, 2)}}}));
    corpus.push_back(ManufacturedField(
        "two_term", {{1.0, {bump(0.0, 3, T, 3)}, {bump(a, 2, b, 2)}},
                     {0.5, {bump(0.0, 3, T, 4)}, {bump(a, 2, b, 2), std::numbers::pi / (b - a), -std::numbers::pi * a / (b - a)}}}));
    return corpus;
}

/// Sum of `terms` random separable products of polynomial-times-cosine
/// factors. Clamped and zero at t = 0, T, so it also serves the zero-end system.
inline ManufacturedField random_manufactured(const Interval& I, double horizon, std::uint64_t seed, int terms = 3)
{
    require(terms >= 1, "random_manufactured: need at least one term");
    const NormalStream rng(seed, 0x5EEDull);
    int k = 0;
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(k++); };
    std::vector<SeparableTerm> out;
    for (int i = 0; i < terms; ++i) {
        SeparableTerm term;
        term.amplitude = u(-1.0, 1.0);
        const int mt = 2 + static_cast<int>(u(0.0, 3.0)), nt = 2 + static_cast<int>(u(0.0, 3.0));
        const int mx = 2 + static_cast<int>(u(0.0, 2.0)), nx = 2 + static_cast<int>(u(0.0, 2.0));
        term.time.poly = poly_mul(bump(0.0, mt, horizon, nt), {1.0, u(-1.0, 1.0)});
        term.space.poly = poly_mul(bump(I.a, mx, I.b, nx), {u(-1.0, 1.0), 1.0});
        if (u(0.0, 1.0) < 0.5) {
            term.time.omega = u(0.5, 8.0) / horizon;
            term.time.phase = u(0.0, 6.0);
        }
        if (u(0.0, 1.0) < 0.5) {
            term.space.omega = u(0.5, 8.0) / I.length();
            term.space.phase = u(0.0, 6.0);
        }
        out.push_back(term);
    }
    return ManufacturedField("random_" + std::to_string(seed), std::move(out));
}

} // namespace sbeam
