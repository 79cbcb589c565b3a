#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <type_traits>
#include <utility>
#include <vector>

#include "halfspace/core.hpp"
#include "halfspace/weight.hpp"

namespace halfspace {

/// Truncated, vertex-centered, uniformly spaced box in the upper half space:
/// tangential axes span [-L, L] with m_t nodes each, the vertical axis spans
/// [0, H] with m_v nodes, and the spacing is shared: h = 2L/(m_t-1) = H/(m_v-1).
/// The bottom row sits exactly on the boundary plane.
template <int N>
struct HalfSpaceGrid {
    static_assert(N == 2 || N == 3, "desk-scale grids are 2- or 3-dimensional");

    double half_width = 1.0;   // L
    double height = 1.0;       // H
    int tangential_nodes = 3;  // m_t per tangential axis
    int vertical_nodes = 3;    // m_v
    double spacing = 1.0;      // h

    HalfSpaceGrid(double L, double H, int m_t, int m_v)
        : half_width(L), height(H), tangential_nodes(m_t), vertical_nodes(m_v) {
        if (!(L > 0.0) || !(H > 0.0)) throw validation_error("grid extents must be positive");
        if (m_t < 3 || m_v < 3) throw validation_error("grids need at least 3 nodes per axis");
        const double ht = 2.0 * L / (m_t - 1);
        const double hv = H / (m_v - 1);
        if (std::abs(ht - hv) > 1e-9 * std::max(ht, hv))
            throw validation_error("grid spacing must be uniform: 2L/(m_t-1) == H/(m_v-1)");
        spacing = hv;
    }

    /// Grid with m_v derived from the shared spacing 2L/(m_t-1).
    static HalfSpaceGrid with_spacing_from_tangential(double L, double H, int m_t) {
        const double h = 2.0 * L / (m_t - 1);
        const double ratio = H / h;
        const int m_v = static_cast<int>(std::lround(ratio)) + 1;
        return HalfSpaceGrid(L, H, m_t, m_v);
    }

    std::size_t node_count() const {
        std::size_t c = vertical_nodes;
        for (int i = 0; i < N - 1; ++i) c *= static_cast<std::size_t>(tangential_nodes);
        return c;
    }

    using Index = std::array<int, N>;

    Point<N> node(const Index& idx) const {
        Point<N> p;
        for (int i = 0; i < N - 1; ++i) p[i] = -half_width + idx[i] * spacing;
        p[N - 1] = idx[N - 1] * spacing;
        return p;
    }

    /// Row-major linearization, first axis slowest, vertical axis fastest.
    std::size_t linear_index(const Index& idx) const {
        std::size_t lin = 0;
        for (int i = 0; i < N - 1; ++i)
            lin = lin * static_cast<std::size_t>(tangential_nodes) + static_cast<std::size_t>(idx[i]);
        return lin * static_cast<std::size_t>(vertical_nodes) + static_cast<std::size_t>(idx[N - 1]);
    }

    bool is_bottom(const Index& idx) const { return idx[N - 1] == 0; }

    /// Lateral truncation faces or the top face.
    bool is_far(const Index& idx) const {
        if (idx[N - 1] == vertical_nodes - 1) return true;
        for (int i = 0; i < N - 1; ++i)
            if (idx[i] == 0 || idx[i] == tangential_nodes - 1) return true;
        return false;
    }

    bool is_boundary(const Index& idx) const { return is_bottom(idx) || is_far(idx); }

    template <class F>
    void for_each_node(F&& fn) const {  // fn(Index, linear)
        Index idx{};
        const int mt = tangential_nodes, mv = vertical_nodes;
        if constexpr (N == 2) {
            std::size_t lin = 0;
            for (idx[0] = 0; idx[0] < mt; ++idx[0])
                for (idx[1] = 0; idx[1] < mv; ++idx[1]) fn(idx, lin++);
        } else {
            std::size_t lin = 0;
            for (idx[0] = 0; idx[0] < mt; ++idx[0])
                for (idx[1] = 0; idx[1] < mt; ++idx[1])
                    for (idx[2] = 0; idx[2] < mv; ++idx[2]) fn(idx, lin++);
        }
    }

    bool operator==(const HalfSpaceGrid& o) const {
        return half_width == o.half_width && height == o.height &&
               tangential_nodes == o.tangential_nodes && vertical_nodes == o.vertical_nodes;
    }
};

/// Nodal values of a scalar field plus the weight exponent it lives under.
/// Carrying `a` makes mixed-exponent arithmetic detectable at run time.
template <int N>
struct ScalarField {
    HalfSpaceGrid<N> grid;
    WeightExponent weight;
    std::vector<double> values;

    ScalarField(const HalfSpaceGrid<N>& g, WeightExponent a)
        : grid(g), weight(a), values(g.node_count(), 0.0) {}

    static ScalarField sampled(const HalfSpaceGrid<N>& g, WeightExponent a, const ScalarFn<N>& fn) {
        ScalarField f(g, a);
        g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
            f.values[lin] = fn(g.node(idx));
        });
        return f;
    }

    double& at(const typename HalfSpaceGrid<N>::Index& idx) { return values[grid.linear_index(idx)]; }
    double at(const typename HalfSpaceGrid<N>::Index& idx) const {
        return values[grid.linear_index(idx)];
    }

    void require_compatible(const ScalarField& other) const {
        if (!(grid == other.grid)) throw validation_error("fields live on different grids");
        if (weight != other.weight)
            throw validation_error("fields carry different weight exponents");
    }

    double linf() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    std::pair<double, double> min_max() const {
        double lo = values.empty() ? 0.0 : values[0], hi = lo;
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return {lo, hi};
    }
};

/// Values attached to the bottom row only (fluxes or traces).
template <int N>
struct BoundaryField {
    HalfSpaceGrid<N> grid;
    std::vector<double> values;  // tangential lattice, same ordering as the field rows

    explicit BoundaryField(const HalfSpaceGrid<N>& g)
        : grid(g), values(g.node_count() / static_cast<std::size_t>(g.vertical_nodes), 0.0) {}

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

enum class BoundaryKind { dirichlet, weighted_neumann };

/// Complete boundary data for the truncated box: the physical bottom face
/// carries either a trace or a weighted flux; the artificial lateral/top
/// faces always carry Dirichlet values.
template <int N>
struct BoundaryDatum {
    BoundaryKind kind = BoundaryKind::dirichlet;
    ScalarFn<N> bottom;  // trace (dirichlet) or flux density (weighted_neumann), at x_n = 0
    ScalarFn<N> far;     // Dirichlet values on lateral/top faces

    static BoundaryDatum dirichlet(ScalarFn<N> bottom_trace, ScalarFn<N> far_values) {
        return {BoundaryKind::dirichlet, std::move(bottom_trace), std::move(far_values)};
    }
    static BoundaryDatum weighted_neumann(ScalarFn<N> bottom_flux, ScalarFn<N> far_values) {
        return {BoundaryKind::weighted_neumann, std::move(bottom_flux), std::move(far_values)};
    }
    static BoundaryDatum constant_dirichlet(double c) {
        auto fn = [c](const Point<N>&) { return c; };
        return {BoundaryKind::dirichlet, fn, fn};
    }
};

/// Multilinear interpolation inside the grid box.
template <int N>
inline double interpolate(const ScalarField<N>& f, const std::type_identity_t<Point<N>>& p) {
    const auto& g = f.grid;
    const double eps = 1e-12 * g.spacing;
    for (int i = 0; i < N - 1; ++i)
        if (p[i] < -g.half_width - eps || p[i] > g.half_width + eps)
            throw domain_error("interpolation point outside the tangential extent");
    if (p[N - 1] < -eps || p[N - 1] > g.height + eps)
        throw domain_error("interpolation point outside the vertical extent");

    std::array<int, N> cell;
    std::array<double, N> frac;
    for (int i = 0; i < N; ++i) {
        const double coord = (i < N - 1) ? (p[i] + g.half_width) : p[N - 1];
        const int cells = (i < N - 1) ? g.tangential_nodes - 1 : g.vertical_nodes - 1;
        double s = coord / g.spacing;
        int c = static_cast<int>(std::floor(s));
        c = std::max(0, std::min(cells - 1, c));
        cell[i] = c;
        frac[i] = std::min(1.0, std::max(0.0, s - c));
    }

    double acc = 0.0;
    const int corners = 1 << N;
    for (int m = 0; m < corners; ++m) {
        typename HalfSpaceGrid<N>::Index idx;
        double w = 1.0;
        for (int i = 0; i < N; ++i) {
            const int bit = (m >> i) & 1;
            idx[i] = cell[i] + bit;
            w *= bit ? frac[i] : (1.0 - frac[i]);
        }
        acc += w * f.values[g.linear_index(idx)];
    }
    return acc;
}

}  // namespace halfspace
