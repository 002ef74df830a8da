#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "sbeam/errors.hpp"

namespace sbeam {

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int n)
{
    require(n >= 1, "gauss_legendre: order must be positive");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Roots are symmetric; Newton on P_n from the Chebyshev-like initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double pn = (n == 1) ? x : p1;
            const double pnm1 = (n == 1) ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double pn = (n == 1) ? x : p1;
        const double pnm1 = (n == 1) ? 1.0 : p0;
        dp = n * (x * pn - pnm1) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Composite Gauss–Legendre quadrature on [a, b] with equal panels.
class Quadrature {
public:
    Quadrature(double a, double b, int panels = 8, int order = 16)
        : a_(a), b_(b), panels_(panels), order_(order)
    {
        require(b > a, "Quadrature: requires b > a");
        require(panels >= 1 && order >= 1, "Quadrature: panel count and order must be positive");
        const auto rule = gauss_legendre(order);
        const double width = (b - a) / panels;
        nodes_.reserve(static_cast<std::size_t>(panels) * order);
        weights_.reserve(nodes_.capacity());
        for (int p = 0; p < panels; ++p) {
            const double left = a + p * width;
            const double mid = left + 0.5 * width;
            for (int i = 0; i < order; ++i) {
                nodes_.push_back(mid + 0.5 * width * rule.nodes[i]);
                weights_.push_back(0.5 * width * rule.weights[i]);
            }
        }
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int panels() const noexcept { return panels_; }
    int order() const noexcept { return order_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }

    template <class F>
    double integrate(F&& f) const
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            sum += weights_[i] * f(nodes_[i]);
        return sum;
    }

private:
    double a_, b_;
    int panels_, order_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Trapezoid weights on a uniform grid of n+1 points with spacing h.
inline std::vector<double> trapezoid_weights(std::size_t points, double h)
{
    require(points >= 2, "trapezoid_weights: need at least two points");
    std::vector<double> w(points, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

} // namespace sbeam
