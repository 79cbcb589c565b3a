#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "halfspace/core.hpp"
#include "halfspace/grid.hpp"
#include "halfspace/weight.hpp"

namespace halfspace {

/// Conductance of a vertical edge [lo, hi]: (hi-lo) / ∫_lo^hi t^{-a} dt.
/// Exact for the degenerate coefficient, reduces to the midpoint value to
/// second order away from the boundary, and reproduces x_n^{1-a} exactly.
/// For a >= 1 the bottom edge [0, h] has infinite resistance; its conductance
/// is returned as 0.
inline double vertical_edge_weight(double a, double lo, double hi) {
    if (!(hi > lo) || !(lo >= 0.0)) throw validation_error("bad vertical edge");
    if (lo == 0.0 && a >= 1.0) return 0.0;
    if (std::abs(1.0 - a) < 1e-12) return (hi - lo) / std::log(hi / lo);
    const double om = 1.0 - a;
    return (hi - lo) * om / (std::pow(hi, om) - std::pow(lo, om));
}

/// The coefficient is constant along horizontal edges, so tangential edges at
/// height y_n carry exactly y_n^a.
inline double tangential_edge_weight(double a, double height) {
    return std::pow(height, a);
}

/// Flux-form stencil for div(x_n^a grad u) at a free point y with step h.
/// Needs y_n >= h so the lower edge stays inside the closed half space.
template <int N, class F>
inline double stencil_residual(const F& u, double a, const Point<N>& y, double h) {
    const double yn = y[N - 1];
    if (!(yn >= h) || !(h > 0.0)) throw domain_error("stencil needs y_n >= h > 0");
    const double u0 = u(y);
    const double wt = tangential_edge_weight(a, yn);
    double acc = 0.0;
    for (int i = 0; i < N - 1; ++i)
        acc += wt * (u(shifted(y, i, h)) - 2.0 * u0 + u(shifted(y, i, -h)));
    const double w_up = vertical_edge_weight(a, yn, yn + h);
    const double w_dn = vertical_edge_weight(a, yn - h, yn);
    acc += w_up * (u(shifted(y, N - 1, h)) - u0) - w_dn * (u0 - u(shifted(y, N - 1, -h)));
    return acc / (h * h);
}

namespace op_detail {

/// Per-row weights for a grid: vertical edge k->k+1 and tangential row k.
struct RowWeights {
    std::vector<double> vertical;    // size m_v - 1, edge [kh, (k+1)h]
    std::vector<double> tangential;  // size m_v, row height kh (index 0 unused off-seam)
};

template <int N>
inline RowWeights row_weights(const HalfSpaceGrid<N>& g, double a) {
    RowWeights w;
    const double h = g.spacing;
    w.vertical.resize(g.vertical_nodes - 1);
    for (int k = 0; k + 1 < g.vertical_nodes; ++k)
        w.vertical[k] = vertical_edge_weight(a, k * h, (k + 1) * h);
    w.tangential.resize(g.vertical_nodes, 0.0);
    for (int k = 1; k < g.vertical_nodes; ++k)
        w.tangential[k] = tangential_edge_weight(a, k * h);
    // Height-zero tangential weight: finite only for a >= 0.
    w.tangential[0] = (a == 0.0) ? 1.0 : (a > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return w;
}

}  // namespace op_detail

/// Interior residual field of div(x_n^a grad u); zero on all boundary nodes.
template <int N>
inline ScalarField<N> apply_operator(const ScalarField<N>& u) {
    const auto& g = u.grid;
    const double a = u.weight.a;
    const double h2 = g.spacing * g.spacing;
    const op_detail::RowWeights w = op_detail::row_weights(g, a);

    ScalarField<N> out(g, u.weight);
    g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
        if (g.is_boundary(idx)) return;
        const int k = idx[N - 1];
        const double u0 = u.values[lin];
        double acc = 0.0;
        for (int i = 0; i < N - 1; ++i) {
            auto up = idx, dn = idx;
            ++up[i];
            --dn[i];
            acc += w.tangential[k] *
                   (u.values[g.linear_index(up)] - 2.0 * u0 + u.values[g.linear_index(dn)]);
        }
        auto up = idx, dn = idx;
        ++up[N - 1];
        --dn[N - 1];
        acc += w.vertical[k] * (u.values[g.linear_index(up)] - u0) -
               w.vertical[k - 1] * (u0 - u.values[g.linear_index(dn)]);
        out.values[lin] = acc / h2;
    });
    return out;
}

/// One-sided discrete weighted flux lim x_n^a d_n u at the bottom row:
/// the conductance of the first vertical edge times the difference quotient,
/// (1-a) (u(.,h) - u(.,0)) / h^{1-a}. Optionally Richardson-extrapolated
/// against the two-layer quotient with the leading exponent 1+a.
template <int N>
inline BoundaryField<N> boundary_flux(const ScalarField<N>& u, bool richardson = false) {
    const auto& g = u.grid;
    const double a = u.weight.a;
    const double h = g.spacing;
    if (!(a < 1.0))
        throw validation_error("discrete weighted flux needs a < 1 (bottom edge is insulating otherwise)");
    const double w1 = vertical_edge_weight(a, 0.0, h);
    const double w2 = vertical_edge_weight(a, 0.0, 2.0 * h);

    BoundaryField<N> flux(g);
    const int mv = g.vertical_nodes;
    std::size_t t = 0;
    g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
        if (idx[N - 1] != 0) return;
        const double f1 = w1 * (u.values[lin + 1] - u.values[lin]) / h;
        double value = f1;
        if (richardson && mv > 2) {
            const double f2 = w2 * (u.values[lin + 2] - u.values[lin]) / (2.0 * h);
            const double p = std::pow(2.0, 1.0 + a);
            value = (p * f1 - f2) / (p - 1.0);
        }
        flux.values[t++] = value;
    });
    return flux;
}

/// Even reflection across the boundary plane: apply the |x_n|^a flux-form
/// stencil on the doubled grid and return the worst residual over the seam
/// rows (k = 0 and k = ±1; the reflected rows coincide by symmetry).
/// Requires 0 <= a < 1 (the seam's tangential weight is |0|^a) and a field
/// whose discrete weighted flux vanishes.
template <int N>
inline double even_reflection_residual(const ScalarField<N>& u, double flux_tol = 1e-8) {
    const auto& g = u.grid;
    const double a = u.weight.a;
    if (!(a >= 0.0 && a < 1.0))
        throw validation_error("even reflection needs a in [0, 1)");
    if (g.vertical_nodes < 3) throw validation_error("grid too shallow for a seam stencil");

    const double scale = std::max(1.0, u.linf());
    if (boundary_flux(u).max_abs() > flux_tol * scale)
        throw precondition_error("even reflection requires zero weighted boundary flux");

    const double h = g.spacing;
    const double h2 = h * h;
    const op_detail::RowWeights w = op_detail::row_weights(g, a);
    const double wt_seam = (a == 0.0) ? 1.0 : 0.0;  // |0|^a for a in [0,1)

    double worst = 0.0;
    g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
        if (idx[N - 1] != 0) return;
        for (int i = 0; i < N - 1; ++i)
            if (idx[i] == 0 || idx[i] == g.tangential_nodes - 1) return;

        const double u0 = u.values[lin];
        const double u1 = u.values[lin + 1];

        // Seam row: reflected lower neighbor equals u1.
        double seam = 2.0 * w.vertical[0] * (u1 - u0);
        if (wt_seam != 0.0) {
            for (int i = 0; i < N - 1; ++i) {
                auto up = idx, dn = idx;
                ++up[i];
                --dn[i];
                seam += wt_seam * (u.values[g.linear_index(up)] - 2.0 * u0 +
                                   u.values[g.linear_index(dn)]);
            }
        }
        worst = std::max(worst, std::abs(seam / h2));

        // First row off the seam: the ordinary interior stencil.
        if (g.vertical_nodes > 3) {
            const double u2 = u.values[lin + 2];
            double row1 = w.vertical[1] * (u2 - u1) - w.vertical[0] * (u1 - u0);
            for (int i = 0; i < N - 1; ++i) {
                auto up = idx, dn = idx;
                ++up[i];
                --dn[i];
                ++up[N - 1];
                ++dn[N - 1];
                row1 += w.tangential[1] * (u.values[g.linear_index(up)] - 2.0 * u1 +
                                           u.values[g.linear_index(dn)]);
            }
            worst = std::max(worst, std::abs(row1 / h2));
        }
    });
    return worst;
}

}  // namespace halfspace
