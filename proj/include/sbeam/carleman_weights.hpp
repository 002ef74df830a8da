#pragma once

// Weight l = lambda[(x - x0)^2 + (t - T)^2 t^2], theta = e^l, the multiplier
// coefficients built from it, and the time cutoff chi.

#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbeam/errors.hpp"
#include "sbeam/philox.hpp"
#include "sbeam/taylor_jet.hpp"

namespace sbeam {

struct WeightField {
    double lambda = 1.0;
    double x0 = 0.0;
    double horizon = 1.0;

    void validate() const
    {
        require(lambda > 0.0 && std::isfinite(lambda), "WeightField: lambda must be positive");
        require(horizon > 0.0 && std::isfinite(horizon), "WeightField: T must be positive");
        require(std::isfinite(x0), "WeightField: x0 must be finite");
    }

    /// l as a jet; used where partials must come from the raw definition.
    template <int NX, int NT>
    Jet<NX, NT> jet(double t, double x) const
    {
        const auto X = Jet<NX, NT>::variable_x(x) - x0;
        const auto Tt = Jet<NX, NT>::variable_t(t);
        const auto Tm = Tt - horizon;
        return lambda * (X * X + Tm * Tm * Tt * Tt);
    }
};

struct WeightPartials {
    double l, theta;
    double l_t, l_tt, l_ttt;
    double l_x, l_xx, l_xxx, l_xxxx;
    double l_tx;
};

inline WeightPartials eval_weight(const WeightField& w, double t, double x)
{
    const double T = w.horizon, lam = w.lambda, s = x - w.x0;
    WeightPartials p{};
    p.l = lam * (s * s + (t - T) * (t - T) * t * t);
    p.theta = std::exp(p.l);
    p.l_t = 2.0 * lam * t * (t - T) * (2.0 * t - T);
    p.l_tt = 2.0 * lam * (6.0 * t * t - 6.0 * t * T + T * T);
    p.l_ttt = 2.0 * lam * (12.0 * t - 6.0 * T);
    p.l_x = 2.0 * lam * s;
    p.l_xx = 2.0 * lam;
    p.l_xxx = 0.0;
    p.l_xxxx = 0.0;
    p.l_tx = 0.0;
    return p;
}

/// Exponents p_i in H_i >= C_i lambda^{p_i}.
inline constexpr std::array<int, 5> h_powers{3, 7, 5, 3, 1};

struct MultiplierCoefficients {
    double A, G, B, D, Phi, Phi1;
    double GP;   // G - Phi1
    double GP_x; // (G - Phi1)_x
    double BB;   // B - (G - Phi1)_x
    bool has_derived = false;
    // printed expansions (x0 = 0)
    double F1 = NAN, F2 = NAN, F3 = NAN, F4 = NAN;
    double H1 = NAN, H2 = NAN, H3 = NAN, H4 = NAN, H5 = NAN;
    // F3 from the u_x^2 group with the third x-derivative of [B - (G - Phi1)_x]
    double F3_corrected = NAN, H3_corrected = NAN;

    std::array<double, 5> H() const { return {H1, H2, H3, H4, H5}; }
};

/// A, G, B, D, Phi, Phi1 for any x0; F/H are filled only when x0 = 0.
inline MultiplierCoefficients coefficients(const WeightField& w, double t, double x)
{
    const auto p = eval_weight(w, t, x);
    MultiplierCoefficients m{};
    const double lx = p.l_x, lxx = p.l_xx, lxxx = p.l_xxx, lxxxx = p.l_xxxx;
    m.A = lx * lx * lx * lx + 4.0 * lx * lxxx - lxxxx - 6.0 * lx * lx * lxx + 3.0 * lxx * lxx + p.l_t * p.l_t - p.l_tt;
    m.G = 6.0 * lx * lx - 6.0 * lxx;
    m.B = 12.0 * lx * lxx - 4.0 * lx * lx * lx - 4.0 * lxxx;
    m.D = -4.0 * lx;
    m.Phi1 = -6.0 * lxx;
    m.Phi = -8.0 * lx * lx * lxx;
    m.GP = m.G - m.Phi1;
    m.GP_x = 12.0 * lx * lxx;
    m.BB = m.B - m.GP_x;

    if (w.x0 != 0.0)
        return m;
    m.has_derived = true;
    const double lam = w.lambda;
    const double x2 = x * x, x4 = x2 * x2, x6 = x4 * x2;
    const double l2 = lam * lam, l3 = l2 * lam, l4 = l3 * lam, l5 = l4 * lam, l6 = l5 * lam, l7 = l6 * lam;
    const double AP = m.A - m.Phi;
    const double AP_t = 2.0 * p.l_t * p.l_tt - p.l_ttt;
    m.F1 = 32.0 * lam;
    m.F2 = 352.0 * l3 * x2;
    m.F3 = 2304.0 * l5 * x4 - 768.0 * l4 * x2 + 192.0 * l3 * x + 320.0 * l3;
    m.F4 = 1536.0 * l7 * x6 + 512.0 * l6 * x4 - 4224.0 * l5 * x2 + 384.0 * l4 -
           32.0 * l3 * x2 * (p.l_t * p.l_t - p.l_tt) + 2.0 * p.l_tt * AP + 2.0 * p.l_t * AP_t;
    m.F3_corrected = 2304.0 * l5 * x4 - 768.0 * l4 * x2 + 512.0 * l3;
    m.H1 = 2.0 * p.l_tt + 4.0 * lx * lx * lxx;
    m.H2 = m.F4;
    m.H3 = m.F3 - 12.0 * p.l_tt * lx * lx;
    m.H4 = m.F2 + 2.0 * p.l_tt;
    m.H5 = m.F1;
    m.H3_corrected = m.F3_corrected - 12.0 * p.l_tt * lx * lx;
    return m;
}

inline MultiplierCoefficients derived_coefficients(const WeightField& w, double t, double x)
{
    if (w.x0 != 0.0)
        throw UnsupportedConfiguration("F/H coefficients are defined for x0 = 0 only");
    return coefficients(w, t, x);
}

/// The u^2, u_x^2, u_xx^2, u_xxx^2 brace groups of the multiplier identity,
/// rebuilt from the raw definitions with jets. The u_x^2 group is returned as
/// printed (second x-derivative of [B - (G - Phi1)_x]) and with the third
/// derivative that the term-by-term expansion produces.
struct BraceGroups {
    double c0, c1_printed, c1_corrected, c2, c3;
};

inline BraceGroups brace_groups(const WeightField& w, double t, double x)
{
    const auto l = w.jet<7, 3>(t, x);
    const auto lx = dx(l);
    const auto lxx = dx(lx);
    const auto lxxx = dx(lxx);
    const auto lxxxx = dx(lxxx);
    const auto lt = dt(l);
    const auto ltt = dt(lt);
    const auto A = lx * lx * lx * lx + 4.0 * lx * lxxx - lxxxx - 6.0 * lx * lx * lxx + 3.0 * lxx * lxx + lt * lt - ltt;
    const auto G = 6.0 * lx * lx - 6.0 * lxx;
    const auto B = 12.0 * lx * lxx - 4.0 * lx * lx * lx - 4.0 * lxxx;
    const auto D = -4.0 * lx;
    const auto Phi1 = -6.0 * lxx;
    const auto Phi = -8.0 * lx * lx * lxx;
    const auto GP = G - Phi1;
    const auto BB = B - dx(GP);
    const auto AP = A - Phi;

    const auto c0 = -dx(dx(GP) * Phi) - dx(AP * BB) + dtk<2>(Phi) + dxk<2>(GP * Phi) + dxk<4>(Phi) + dxk<2>(AP * Phi1) -
                    dxk<3>(AP * D) + 2.0 * AP * Phi + 2.0 * dt(lt * AP);
    const auto c1_rest = -4.0 * dxk<2>(Phi) + 2.0 * dx(GP) * BB - dx(GP * BB) - dx(dx(GP) * Phi1) +
                         dxk<2>(dx(GP) * D) - 2.0 * GP * Phi - 2.0 * AP * Phi1 + 3.0 * dx(AP * D);
    const auto c2 = 3.0 * dx(BB) + dxk<2>(Phi1) + 2.0 * Phi + 2.0 * GP * Phi1 - 2.0 * dx(GP) * D - dx(GP * D);
    const auto c3 = -dx(D) - 2.0 * Phi1;
    return {c0.value(), c1_rest.value() - dxk<2>(BB).value(), c1_rest.value() - dxk<3>(BB).value(), c2.value(),
            c3.value()};
}

struct AuditEntry {
    std::string name;      // closed-form quantity
    std::string reference; // brace-group variant it is compared with
    double max_rel_diff = 0.0;
    double worst_t = 0.0, worst_x = 0.0, worst_lambda = 0.0;
    bool agrees = true;
};

struct AuditReport {
    int points = 0;
    double tolerance = 1e-10;
    std::vector<AuditEntry> entries;

    const AuditEntry& entry(const std::string& name, const std::string& reference) const
    {
        for (const auto& e : entries)
            if (e.name == name && e.reference == reference)
                return e;
        throw ContractViolation("AuditReport: no entry " + name + "/" + reference);
    }
    /// Every closed form agrees with the printed brace groups.
    bool printed_consistent() const
    {
        for (const auto& e : entries)
            if (e.reference == "printed" && !e.agrees)
                return false;
        return true;
    }
    std::vector<AuditEntry> discrepancies() const
    {
        std::vector<AuditEntry> out;
        for (const auto& e : entries)
            if (!e.agrees)
                out.push_back(e);
        return out;
    }
};

/// Compares the closed-form F1..F4, H1..H5 against values re-derived from the
/// raw coefficient definitions at random (t, x, lambda), both against the
/// printed brace groups and against the corrected u_x^2 group.
inline AuditReport audit_coefficients(double a, double b, double horizon, int points, std::uint64_t seed,
                                      double tol = 1e-10, double lambda_min = 1.0, double lambda_max = 12.0)
{
    AuditReport rep;
    rep.points = points;
    rep.tolerance = tol;
    const std::array<std::pair<const char*, const char*>, 13> layout{{{"F1", "printed"},
                                                                      {"F2", "printed"},
                                                                      {"F3", "printed"},
                                                                      {"F4", "printed"},
                                                                      {"H1", "printed"},
                                                                      {"H2", "printed"},
                                                                      {"H3", "printed"},
                                                                      {"H4", "printed"},
                                                                      {"H5", "printed"},
                                                                      {"F3", "corrected"},
                                                                      {"H3", "corrected"},
                                                                      {"F3_corrected", "corrected"},
                                                                      {"H3_corrected", "corrected"}}};
    for (const auto& [n, r] : layout)
        rep.entries.push_back({n, r});
    const NormalStream rng(seed, 0xA0D17ull);
    for (int i = 0; i < points; ++i) {
        const double t = horizon * rng.uniform(3 * i);
        const double x = a + (b - a) * rng.uniform(3 * i + 1);
        const double lam = lambda_min + (lambda_max - lambda_min) * rng.uniform(3 * i + 2);
        const WeightField w{lam, 0.0, horizon};
        const auto m = coefficients(w, t, x);
        const auto g = brace_groups(w, t, x);

        const auto l = w.jet<2, 2>(t, x);
        const double lx = dx(l).value(), lxx = dxk<2>(l).value(), ltt = dtk<2>(l).value();
        const double h1 = 2.0 * ltt + 4.0 * lx * lx * lxx;
        const std::array<double, 13> derived{g.c3, g.c2, g.c1_printed, g.c0, h1, g.c0,
                                             g.c1_printed - 12.0 * ltt * lx * lx, g.c2 + 2.0 * ltt, g.c3,
                                             g.c1_corrected, g.c1_corrected - 12.0 * ltt * lx * lx,
                                             g.c1_corrected, g.c1_corrected - 12.0 * ltt * lx * lx};
        const std::array<double, 13> closed{m.F1, m.F2, m.F3, m.F4, m.H1, m.H2, m.H3, m.H4, m.H5,
                                            m.F3, m.H3, m.F3_corrected, m.H3_corrected};
        for (std::size_t k = 0; k < closed.size(); ++k) {
            const double den = std::max({std::abs(derived[k]), std::abs(closed[k]), 1.0});
            const double rel = std::abs(derived[k] - closed[k]) / den;
            auto& e = rep.entries[k];
            if (rel > e.max_rel_diff) {
                e.max_rel_diff = rel;
                e.worst_t = t;
                e.worst_x = x;
                e.worst_lambda = lam;
            }
        }
    }
    for (auto& e : rep.entries)
        e.agrees = e.max_rel_diff <= tol;
    return rep;
}

struct LowerBoundRow {
    double lambda = 0.0;
    std::array<double, 5> min_ratio{}; // min over Q of H_i / lambda^{p_i}
    double min_ratio_h3_corrected = 0.0;
    bool all_positive = false;
};

struct LowerBoundTable {
    std::vector<LowerBoundRow> rows;
    /// Smallest grid lambda from which every later row is positive; NaN if none.
    double empirical_lambda0 = NAN;
};

inline LowerBoundTable coefficient_lower_bounds(double a, double b, double horizon, std::span<const double> lambdas,
                                                int nt = 201, int nx = 101)
{
    require(!lambdas.empty(), "coefficient_lower_bounds: empty lambda grid");
    require(a > 0.0 && b > a, "coefficient_lower_bounds: need 0 < a < b");
    LowerBoundTable table;
    for (double lam : lambdas) {
        const WeightField w{lam, 0.0, horizon};
        LowerBoundRow row;
        row.lambda = lam;
        row.min_ratio.fill(std::numeric_limits<double>::infinity());
        row.min_ratio_h3_corrected = std::numeric_limits<double>::infinity();
        for (int i = 0; i < nt; ++i) {
            const double t = horizon * i / (nt - 1);
            for (int j = 0; j < nx; ++j) {
                const double x = a + (b - a) * j / (nx - 1);
                const auto m = coefficients(w, t, x);
                const auto H = m.H();
                for (int k = 0; k < 5; ++k)
                    row.min_ratio[k] = std::min(row.min_ratio[k], H[k] / std::pow(lam, h_powers[k]));
                row.min_ratio_h3_corrected =
                    std::min(row.min_ratio_h3_corrected, m.H3_corrected / std::pow(lam, h_powers[2]));
            }
        }
        row.all_positive = true;
        for (double r : row.min_ratio)
            row.all_positive = row.all_positive && r > 0.0;
        table.rows.push_back(row);
    }
    for (std::size_t i = table.rows.size(); i-- > 0;) {
        if (!table.rows[i].all_positive)
            break;
        table.empirical_lambda0 = table.rows[i].lambda;
    }
    return table;
}

/// Coefficient table over a (t, x) grid for one lambda, as CSV.
inline void write_coefficients_csv(std::ostream& os, const WeightField& w, double a, double b, int nt, int nx)
{
    os << "lambda,t,x,A,G,B,D,Phi,Phi1,F1,F2,F3,F4,H1,H2,H3,H4,H5,F3_corrected,H3_corrected\n";
    os.precision(17);
    for (int i = 0; i < nt; ++i) {
        const double t = w.horizon * i / std::max(1, nt - 1);
        for (int j = 0; j < nx; ++j) {
            const double x = a + (b - a) * j / std::max(1, nx - 1);
            const auto m = coefficients(w, t, x);
            os << w.lambda << ',' << t << ',' << x << ',' << m.A << ',' << m.G << ',' << m.B << ',' << m.D << ','
               << m.Phi << ',' << m.Phi1 << ',' << m.F1 << ',' << m.F2 << ',' << m.F3 << ',' << m.F4 << ',' << m.H1
               << ',' << m.H2 << ',' << m.H3 << ',' << m.H4 << ',' << m.H5 << ',' << m.F3_corrected << ','
               << m.H3_corrected << '\n';
        }
    }
}

/// Quintic-smoothstep cutoff: 0 on [0, eps/2], 1 on [eps, T - eps], mirrored.
class Cutoff {
public:
    /// max |s'| = 15/8 and max |s''| = 10/sqrt(3) for s(u) = 6u^5 - 15u^4 + 10u^3;
    /// the ramp has width eps/2, so each derivative picks up a factor 2/eps.
    static constexpr double c1 = 15.0 / 4.0;
    static inline const double c2 = 40.0 / std::sqrt(3.0);

    Cutoff(double epsilon, double horizon)
        : eps_(epsilon), T_(horizon)
    {
        require(horizon > 0.0, "Cutoff: T must be positive");
        require(epsilon > 0.0 && epsilon < 0.5 * horizon, "Cutoff: epsilon must lie in (0, T/2)");
    }

    double epsilon() const noexcept { return eps_; }
    double horizon() const noexcept { return T_; }

    std::array<double, 3> operator()(double t) const
    {
        require(t >= -1e-12 * T_ && t <= T_ * (1.0 + 1e-12), "Cutoff: t outside [0, T]");
        if (t <= 0.5 * T_) {
            return left(t);
        }
        const auto r = left(T_ - t);
        return {r[0], -r[1], r[2]};
    }

private:
    std::array<double, 3> left(double t) const
    {
        const double w = 0.5 * eps_;
        if (t <= w)
            return {0.0, 0.0, 0.0};
        if (t >= eps_)
            return {1.0, 0.0, 0.0};
        const double u = (t - w) / w;
        const double u2 = u * u, u3 = u2 * u;
        const double s = u3 * (10.0 - 15.0 * u + 6.0 * u2);
        const double s1 = 30.0 * u2 * (1.0 - u) * (1.0 - u);
        const double s2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
        return {s, s1 / w, s2 / (w * w)};
    }

    double eps_, T_;
};

inline std::array<double, 3> eval_cutoff(const Cutoff& c, double t)
{
    return c(t);
}

} // namespace sbeam
