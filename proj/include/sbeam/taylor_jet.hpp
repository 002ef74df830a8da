#pragma once

// Truncated bivariate Taylor polynomials in (dx, dt) for exact mixed partial
// derivatives of closed-form expressions.

#include <algorithm>
#include <array>
#include <cmath>

namespace sbeam {

/// f(x0 + dx, t0 + dt) = sum_{i <= NX, j <= NT} c[i][j] dx^i dt^j.
/// Differentiation lowers the tracked order, so an expression whose order
/// would run out fails to compile rather than returning silently wrong values.
template <int NX, int NT>
struct Jet {
    static_assert(NX >= 0 && NT >= 0);
    static constexpr int nx = NX;
    static constexpr int nt = NT;
    static constexpr int size = (NX + 1) * (NT + 1);

    std::array<double, size> c{};

    Jet() = default;
    Jet(double v) { c[0] = v; } // NOLINT(google-explicit-constructor)

    static Jet variable_x(double x0)
    {
        Jet j(x0);
        if constexpr (NX >= 1)
            j.at(1, 0) = 1.0;
        return j;
    }
    static Jet variable_t(double t0)
    {
        Jet j(t0);
        if constexpr (NT >= 1)
            j.at(0, 1) = 1.0;
        return j;
    }

    double& at(int i, int j) { return c[i * (NT + 1) + j]; }
    double at(int i, int j) const { return c[i * (NT + 1) + j]; }
    double value() const { return c[0]; }

    /// d^i/dx^i d^j/dt^j at the expansion point.
    double derivative(int i, int j) const
    {
        double f = at(i, j);
        for (int k = 2; k <= i; ++k)
            f *= k;
        for (int k = 2; k <= j; ++k)
            f *= k;
        return f;
    }

    template <int MX, int MT>
    Jet<MX, MT> truncate() const
    {
        static_assert(MX <= NX && MT <= NT);
        Jet<MX, MT> out;
        for (int i = 0; i <= MX; ++i)
            for (int j = 0; j <= MT; ++j)
                out.at(i, j) = at(i, j);
        return out;
    }

    Jet operator-() const
    {
        Jet out;
        for (int k = 0; k < size; ++k)
            out.c[k] = -c[k];
        return out;
    }
    Jet& operator+=(const Jet& o)
    {
        for (int k = 0; k < size; ++k)
            c[k] += o.c[k];
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        for (int k = 0; k < size; ++k)
            c[k] -= o.c[k];
        return *this;
    }
    Jet& operator*=(double s)
    {
        for (double& v : c)
            v *= s;
        return *this;
    }
};

namespace detail {
template <int A, int B, int C, int D>
using JetMin = Jet<std::min(A, C), std::min(B, D)>;
}

template <int A, int B, int C, int D>
detail::JetMin<A, B, C, D> operator+(const Jet<A, B>& p, const Jet<C, D>& q)
{
    using R = detail::JetMin<A, B, C, D>;
    R out = p.template truncate<R::nx, R::nt>();
    out += q.template truncate<R::nx, R::nt>();
    return out;
}

template <int A, int B, int C, int D>
detail::JetMin<A, B, C, D> operator-(const Jet<A, B>& p, const Jet<C, D>& q)
{
    using R = detail::JetMin<A, B, C, D>;
    R out = p.template truncate<R::nx, R::nt>();
    out -= q.template truncate<R::nx, R::nt>();
    return out;
}

template <int A, int B, int C, int D>
detail::JetMin<A, B, C, D> operator*(const Jet<A, B>& p, const Jet<C, D>& q)
{
    using R = detail::JetMin<A, B, C, D>;
    constexpr int NX = R::nx, NT = R::nt;
    R out;
    for (int i1 = 0; i1 <= NX; ++i1)
        for (int j1 = 0; j1 <= NT; ++j1) {
            const double a = p.at(i1, j1);
            if (a == 0.0)
                continue;
            for (int i2 = 0; i2 <= NX - i1; ++i2)
                for (int j2 = 0; j2 <= NT - j1; ++j2)
                    out.at(i1 + i2, j1 + j2) += a * q.at(i2, j2);
        }
    return out;
}

template <int A, int B>
Jet<A, B> operator+(Jet<A, B> p, double s)
{
    p.c[0] += s;
    return p;
}
template <int A, int B>
Jet<A, B> operator+(double s, Jet<A, B> p)
{
    p.c[0] += s;
    return p;
}
template <int A, int B>
Jet<A, B> operator-(Jet<A, B> p, double s)
{
    p.c[0] -= s;
    return p;
}
template <int A, int B>
Jet<A, B> operator-(double s, const Jet<A, B>& p)
{
    Jet<A, B> out = -p;
    out.c[0] += s;
    return out;
}
template <int A, int B>
Jet<A, B> operator*(Jet<A, B> p, double s)
{
    p *= s;
    return p;
}
template <int A, int B>
Jet<A, B> operator*(double s, Jet<A, B> p)
{
    p *= s;
    return p;
}

template <int A, int B>
Jet<A - 1, B> dx(const Jet<A, B>& p)
{
    static_assert(A >= 1, "dx: x-order exhausted");
    Jet<A - 1, B> out;
    for (int i = 0; i < A; ++i)
        for (int j = 0; j <= B; ++j)
            out.at(i, j) = (i + 1) * p.at(i + 1, j);
    return out;
}

template <int A, int B>
Jet<A, B - 1> dt(const Jet<A, B>& p)
{
    static_assert(B >= 1, "dt: t-order exhausted");
    Jet<A, B - 1> out;
    for (int i = 0; i <= A; ++i)
        for (int j = 0; j < B; ++j)
            out.at(i, j) = (j + 1) * p.at(i, j + 1);
    return out;
}

/// K-fold derivatives.
template <int K, int A, int B>
auto dxk(const Jet<A, B>& p)
{
    if constexpr (K == 0)
        return p;
    else
        return dxk<K - 1>(dx(p));
}

template <int K, int A, int B>
auto dtk(const Jet<A, B>& p)
{
    if constexpr (K == 0)
        return p;
    else
        return dtk<K - 1>(dt(p));
}

namespace detail {
/// sum_k w[k] n^k for a jet n with zero constant term.
template <int A, int B>
Jet<A, B> nilpotent_series(const Jet<A, B>& n, const double* w, int terms)
{
    Jet<A, B> out(w[0]);
    Jet<A, B> power(1.0);
    for (int k = 1; k < terms; ++k) {
        power = power * n;
        Jet<A, B> term = power;
        term *= w[k];
        out += term;
    }
    return out;
}
} // namespace detail

template <int A, int B>
Jet<A, B> exp(const Jet<A, B>& p)
{
    constexpr int terms = A + B + 1;
    std::array<double, terms> w{};
    const double e0 = std::exp(p.value());
    double fact = 1.0;
    for (int k = 0; k < terms; ++k) {
        if (k > 0)
            fact *= k;
        w[k] = e0 / fact;
    }
    Jet<A, B> n = p;
    n.c[0] = 0.0;
    return detail::nilpotent_series(n, w.data(), terms);
}

/// cos and sin share the expansion sin/cos(v + n) with n nilpotent.
template <int A, int B>
Jet<A, B> sin_cos_shift(const Jet<A, B>& p, double phase)
{
    constexpr int terms = A + B + 1;
    std::array<double, terms> w{};
    double fact = 1.0;
    for (int k = 0; k < terms; ++k) {
        if (k > 0)
            fact *= k;
        // d^k/dv^k sin(v + phase) = sin(v + phase + k pi/2)
        w[k] = std::sin(p.value() + phase + k * 1.5707963267948966) / fact;
    }
    Jet<A, B> n = p;
    n.c[0] = 0.0;
    return detail::nilpotent_series(n, w.data(), terms);
}

template <int A, int B>
Jet<A, B> sin(const Jet<A, B>& p)
{
    return sin_cos_shift(p, 0.0);
}

template <int A, int B>
Jet<A, B> cos(const Jet<A, B>& p)
{
    return sin_cos_shift(p, 1.5707963267948966);
}

} // namespace sbeam
