#pragma once

// Time slices of a solution on spatial quadrature nodes, shared by the
// identity and estimate integrators.

#include <array>
#include <vector>

#include "sbeam/beam_operator.hpp"
#include "sbeam/manufactured.hpp"
#include "sbeam/quadrature.hpp"
#include "sbeam/spectral_sde.hpp"

namespace sbeam {

/// One time slice of a solution on the spatial quadrature nodes.
struct SliceData {
    double t = 0.0;
    std::array<std::vector<double>, 4> y;  // y, y_x, y_xx, y_xxx at the nodes
    std::array<std::vector<double>, 4> yt; // y_t and its first three x-derivatives
    std::vector<double> f;                 // drift
    std::vector<double> g;                 // noise amplitude
    std::array<double, 2> yxx_ab{};        // y_xx at a, b
    std::array<double, 2> yxxx_ab{};       // y_xxx at a, b
};

/// Closed-form slice with f = y_tt + y_xxxx and g = 0.
inline SliceData manufactured_slice(const ManufacturedField& y, const Interval& I, const Quadrature& xq, double t)
{
    const auto xs = xq.nodes();
    SliceData s;
    s.t = t;
    for (int j = 0; j < 4; ++j) {
        s.y[j].resize(xs.size());
        s.yt[j].resize(xs.size());
        for (std::size_t q = 0; q < xs.size(); ++q) {
            s.y[j][q] = y.derivative(t, xs[q], j, 0);
            s.yt[j][q] = y.derivative(t, xs[q], j, 1);
        }
    }
    s.f.resize(xs.size());
    s.g.assign(xs.size(), 0.0);
    for (std::size_t q = 0; q < xs.size(); ++q)
        s.f[q] = y.forcing(t, xs[q]);
    for (int e = 0; e < 2; ++e) {
        const double xe = e == 0 ? I.a : I.b;
        s.yxx_ab[e] = y.derivative(t, xe, 2, 0);
        s.yxxx_ab[e] = y.derivative(t, xe, 3, 0);
    }
    return s;
}

/// Slice i of a modal trajectory on the nodes of `basis`.
inline SliceData trajectory_slice(const ModalTrajectory& tr, const ModalBasis& basis, int i)
{
    const int M = tr.modes;
    const std::size_t nq = basis.quadrature().size();
    SliceData s;
    s.t = tr.time(i);
    const auto c = tr.c_at(i);
    const auto cd = tr.cdot_at(i);
    const auto f = tr.f_at(i);
    const auto g = tr.g_at(i);
    for (int j = 0; j < 4; ++j) {
        s.y[j].assign(nq, 0.0);
        s.yt[j].assign(nq, 0.0);
    }
    s.f.assign(nq, 0.0);
    s.g.assign(nq, 0.0);
    for (int k = 0; k < M; ++k) {
        for (int j = 0; j < 4; ++j) {
            const auto v = basis.nodal(j, k);
            for (std::size_t q = 0; q < nq; ++q) {
                s.y[j][q] += c[k] * v[q];
                s.yt[j][q] += cd[k] * v[q];
            }
        }
        const auto v0 = basis.nodal(0, k);
        for (std::size_t q = 0; q < nq; ++q) {
            s.f[q] += f[k] * v0[q];
            s.g[q] += g[k] * v0[q];
        }
    }
    for (int e = 0; e < 2; ++e) {
        const auto v2 = e == 0 ? basis.at_a(2) : basis.at_b(2);
        const auto v3 = e == 0 ? basis.at_a(3) : basis.at_b(3);
        double s2 = 0.0, s3 = 0.0;
        for (int k = 0; k < M; ++k) {
            s2 += c[k] * v2[k];
            s3 += c[k] * v3[k];
        }
        s.yxx_ab[e] = s2;
        s.yxxx_ab[e] = s3;
    }
    return s;
}

} // namespace sbeam
