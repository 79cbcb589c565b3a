#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "halfspace/core.hpp"
#include "halfspace/grid.hpp"
#include "halfspace/operator.hpp"

namespace halfspace {

struct SolveConfig {
    double tolerance = 1e-10;  // relative residual target
    long max_iterations = 0;   // 0: 10 * m_t * m_v
    enum class Preconditioner { none, diagonal } preconditioner = Preconditioner::diagonal;
    std::optional<double> initial_guess;  // constant start; default derives from the data
    int threads = 1;
};

struct SolveReport {
    long iterations = 0;
    bool converged = false;
    double residual_l2_rel = 0.0;
    double residual_linf = 0.0;
    std::vector<double> residual_history;  // relative l2 per iteration
    std::vector<double> energy_history;    // 0.5 x'Ax - b'x per iteration
    std::vector<std::string> warnings;
};

struct solver_failure : numeric_error {
    SolveReport report;
    solver_failure(const std::string& msg, SolveReport rep)
        : numeric_error(msg), report(std::move(rep)) {}
};

namespace solver_detail {

/// Interior-unknown view of the grid plus the eliminated boundary couplings.
template <int N>
struct System {
    const HalfSpaceGrid<N>& grid;
    double a;
    BoundaryKind bottom;
    op_detail::RowWeights w;
    double inv_h2;

    std::vector<std::size_t> unknown_of_node;  // node linear index -> unknown id or npos
    std::vector<std::size_t> node_of_unknown;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    System(const HalfSpaceGrid<N>& g, double a_, BoundaryKind bottom_)
        : grid(g), a(a_), bottom(bottom_), w(op_detail::row_weights(g, a_)),
          inv_h2(1.0 / (g.spacing * g.spacing)) {
        unknown_of_node.assign(g.node_count(), npos);
        g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
            if (grid.is_boundary(idx)) return;
            unknown_of_node[lin] = node_of_unknown.size();
            node_of_unknown.push_back(lin);
        });
    }

    std::size_t size() const { return node_of_unknown.size(); }

    /// y = A x with A = -div(x_n^a grad .) after boundary elimination; SPD.
    void apply(const std::vector<double>& x, std::vector<double>& y, int threads) const {
        const auto& g = grid;
        const int mv = g.vertical_nodes;
        parallel_for(size(), threads, [&](std::size_t lo, std::size_t hi) {
            typename HalfSpaceGrid<N>::Index idx;
            for (std::size_t uid = lo; uid < hi; ++uid) {
                const std::size_t lin = node_of_unknown[uid];
                decompose(lin, idx);
                const int k = idx[N - 1];
                double diag = 0.0, off = 0.0;

                for (int i = 0; i < N - 1; ++i) {
                    const std::size_t stride = stride_of_axis(i);
                    diag += 2.0 * w.tangential[k];
                    off += w.tangential[k] * neighbor_value(x, lin, idx[i], +1, stride);
                    off += w.tangential[k] * neighbor_value(x, lin, idx[i], -1, stride);
                }
                // vertical up
                diag += w.vertical[k];
                if (k + 1 < mv - 1) off += w.vertical[k] * value_at(x, lin + 1);
                // vertical down
                if (k > 1) {
                    diag += w.vertical[k - 1];
                    off += w.vertical[k - 1] * value_at(x, lin - 1);
                } else if (bottom == BoundaryKind::dirichlet) {
                    diag += w.vertical[0];
                }  // weighted-neumann: bottom edge replaced by the prescribed flux

                y[uid] = (diag * x[uid] - off) * inv_h2;
            }
        });
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(size(), 0.0);
        typename HalfSpaceGrid<N>::Index idx;
        for (std::size_t uid = 0; uid < size(); ++uid) {
            decompose(node_of_unknown[uid], idx);
            const int k = idx[N - 1];
            double diag = 2.0 * (N - 1) * w.tangential[k] + w.vertical[k];
            if (k > 1 || bottom == BoundaryKind::dirichlet) diag += w.vertical[k - 1];
            d[uid] = diag * inv_h2;
        }
        return d;
    }

    /// Right-hand side from the boundary data.
    std::vector<double> rhs(const BoundaryDatum<N>& data) const {
        const auto& g = grid;
        std::vector<double> b(size(), 0.0);
        typename HalfSpaceGrid<N>::Index idx;
        for (std::size_t uid = 0; uid < size(); ++uid) {
            const std::size_t lin = node_of_unknown[uid];
            decompose(lin, idx);
            const int k = idx[N - 1];
            double acc = 0.0;
            for (int i = 0; i < N - 1; ++i) {
                if (idx[i] == 1) {
                    auto nb = idx;
                    nb[i] = 0;
                    acc += w.tangential[k] * data.far(g.node(nb));
                }
                if (idx[i] == g.tangential_nodes - 2) {
                    auto nb = idx;
                    nb[i] = g.tangential_nodes - 1;
                    acc += w.tangential[k] * data.far(g.node(nb));
                }
            }
            if (k == g.vertical_nodes - 2) {
                auto nb = idx;
                nb[N - 1] = g.vertical_nodes - 1;
                acc += w.vertical[k] * data.far(g.node(nb));
            }
            if (k == 1) {
                auto nb = idx;
                nb[N - 1] = 0;
                if (bottom == BoundaryKind::dirichlet) {
                    acc += w.vertical[0] * data.bottom(g.node(nb));
                } else {
                    acc -= data.bottom(g.node(nb)) * g.spacing;  // prescribed flux enters as -f/h
                }
            }
            b[uid] = acc * inv_h2;
        }
        return b;
    }

  private:
    std::size_t stride_of_axis(int axis) const {
        std::size_t s = grid.vertical_nodes;
        for (int i = N - 2; i > axis; --i) s *= grid.tangential_nodes;
        return s;
    }

    void decompose(std::size_t lin, typename HalfSpaceGrid<N>::Index& idx) const {
        idx[N - 1] = static_cast<int>(lin % grid.vertical_nodes);
        lin /= grid.vertical_nodes;
        for (int i = N - 2; i >= 0; --i) {
            idx[i] = static_cast<int>(lin % grid.tangential_nodes);
            lin /= grid.tangential_nodes;
        }
    }

    double value_at(const std::vector<double>& x, std::size_t lin) const {
        const std::size_t uid = unknown_of_node[lin];
        return uid == npos ? 0.0 : x[uid];
    }

    double neighbor_value(const std::vector<double>& x, std::size_t lin, int coord, int dir,
                          std::size_t stride) const {
        const int next = coord + dir;
        if (next <= 0 || next >= grid.tangential_nodes - 1) return 0.0;  // Dirichlet face -> rhs
        return value_at(x, dir > 0 ? lin + stride : lin - stride);
    }
};

inline double det_dot(const std::vector<double>& a, const std::vector<double>& b,
                      std::vector<double>& scratch) {
    scratch.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) scratch[i] = a[i] * b[i];
    return pairwise_sum(scratch);
}

}  // namespace solver_detail

/// Constant initial guess from the Dirichlet data: harmonic mean when every
/// sample is positive (scale-correct for the positive families), arithmetic
/// mean otherwise.
template <int N>
inline double default_initial_guess(const HalfSpaceGrid<N>& g, const BoundaryDatum<N>& data) {
    double inv_sum = 0.0, sum = 0.0;
    std::size_t count = 0;
    bool all_positive = true;
    g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t) {
        if (!g.is_boundary(idx)) return;
        const bool bottom = g.is_bottom(idx) && !g.is_far(idx);
        double v;
        if (bottom) {
            if (data.kind != BoundaryKind::dirichlet) return;
            v = data.bottom(g.node(idx));
        } else {
            v = data.far(g.node(idx));
        }
        sum += v;
        ++count;
        if (v > 0.0)
            inv_sum += 1.0 / v;
        else
            all_positive = false;
    });
    if (count == 0) return 0.0;
    if (all_positive && inv_sum > 0.0) return static_cast<double>(count) / inv_sum;
    return sum / static_cast<double>(count);
}

/// Solve the discrete boundary-value problem by preconditioned conjugate
/// gradients on the symmetric positive definite interior system.
template <int N>
inline std::pair<ScalarField<N>, SolveReport> solve(const HalfSpaceGrid<N>& grid, WeightExponent a,
                                                    const BoundaryDatum<N>& data,
                                                    const SolveConfig& cfg = {}) {
    if (!(cfg.tolerance > 0.0)) throw validation_error("solver tolerance must be positive");
    SolveReport rep;
    if (data.kind == BoundaryKind::weighted_neumann) {
        if (!(a.a > -1.0 && a.a < 1.0))
            throw validation_error("weighted-neumann bottom data needs a in (-1, 1)");
        if (!a.neumann_window(N))
            rep.warnings.push_back("weight exponent outside the uniqueness window (max{-1,2-n}, 1); discretization untested there");
    } else if (a.a >= 1.0) {
        rep.warnings.push_back("a >= 1: the bottom edge is insulating and bottom data does not couple");
    }

    solver_detail::System<N> sys(grid, a.a, data.kind);
    const std::size_t n = sys.size();
    const std::vector<double> b = sys.rhs(data);

    const long max_iter = cfg.max_iterations > 0
                              ? cfg.max_iterations
                              : 10L * grid.tangential_nodes * grid.vertical_nodes;

    std::vector<double> x(n, cfg.initial_guess ? *cfg.initial_guess
                                               : default_initial_guess<N>(grid, data));
    std::vector<double> r(n), z(n), p(n), q(n), scratch;

    sys.apply(x, r, cfg.threads);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];

    std::vector<double> inv_diag;
    if (cfg.preconditioner == SolveConfig::Preconditioner::diagonal) {
        inv_diag = sys.diagonal();
        for (double& d : inv_diag) d = 1.0 / d;
    }
    auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (inv_diag.empty())
            out = in;
        else
            for (std::size_t i = 0; i < n; ++i) out[i] = inv_diag[i] * in[i];
    };

    const double b_norm = std::sqrt(std::max(solver_detail::det_dot(b, b, scratch), 0.0));
    const double ref = b_norm > 0.0 ? b_norm : 1.0;

    auto push_state = [&]() {
        const double rn = std::sqrt(std::max(solver_detail::det_dot(r, r, scratch), 0.0));
        rep.residual_history.push_back(rn / ref);
        // E = 0.5 x'Ax - b'x = -0.5 x'(b + r)
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) e += x[i] * (b[i] + r[i]);
        rep.energy_history.push_back(-0.5 * e);
        return rn / ref;
    };

    double rel = push_state();
    precondition(r, z);
    p = z;
    double rz = solver_detail::det_dot(r, z, scratch);

    long it = 0;
    while (rel > cfg.tolerance && it < max_iter) {
        ++it;
        sys.apply(p, q, cfg.threads);
        const double pq = solver_detail::det_dot(p, q, scratch);
        if (!(pq > 0.0)) break;  // loss of positive definiteness in rounding
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * q[i];
        rel = push_state();
        precondition(r, z);
        const double rz_new = solver_detail::det_dot(r, z, scratch);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    rep.iterations = it;
    rep.residual_l2_rel = rel;
    rep.converged = rel <= cfg.tolerance;
    if (!rep.converged)
        throw solver_failure("conjugate-gradient iteration did not reach the tolerance", rep);

    // Assemble the full field: interior solution and far faces first, then
    // the bottom row (the weighted-neumann elimination reads the row above).
    ScalarField<N> u(grid, a);
    grid.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
        const std::size_t uid = sys.unknown_of_node[lin];
        if (uid != solver_detail::System<N>::npos)
            u.values[lin] = x[uid];
        else if (grid.is_far(idx))
            u.values[lin] = data.far(grid.node(idx));
    });
    grid.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
        if (!grid.is_bottom(idx) || grid.is_far(idx)) return;
        if (data.kind == BoundaryKind::dirichlet) {
            u.values[lin] = data.bottom(grid.node(idx));
        } else {
            const double w0 = vertical_edge_weight(a.a, 0.0, grid.spacing);
            u.values[lin] = u.values[lin + 1] - data.bottom(grid.node(idx)) * grid.spacing / w0;
        }
    });

    const ScalarField<N> res = apply_operator(u);
    rep.residual_linf = res.linf();
    return {std::move(u), rep};
}

// ---------------------------------------------------------------------------
// Discrete maximum principle certificate.
// ---------------------------------------------------------------------------

struct MaxPrincipleResult {
    bool ok = false;
    double worst_violation = 0.0;
    double lower = 0.0, upper = 0.0;  // Dirichlet data range used for the bound
};

template <int N>
inline MaxPrincipleResult max_principle_check(const ScalarField<N>& u, const BoundaryDatum<N>& data,
                                              double solver_tolerance = 1e-10) {
    const auto& g = u.grid;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t) {
        if (!g.is_boundary(idx)) return;
        const bool pure_bottom = g.is_bottom(idx) && !g.is_far(idx);
        if (pure_bottom && data.kind != BoundaryKind::dirichlet) return;  // flux carries no bound
        const double v = pure_bottom ? data.bottom(g.node(idx)) : data.far(g.node(idx));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    });
    const double range = hi - lo;
    const double tol = 10.0 * solver_tolerance * (range > 0.0 ? range : std::max(1.0, std::abs(hi)));

    MaxPrincipleResult out;
    out.lower = lo;
    out.upper = hi;
    for (double v : u.values) {
        out.worst_violation = std::max(out.worst_violation, std::max(lo - tol - v, v - hi - tol));
    }
    out.worst_violation = std::max(out.worst_violation, 0.0);
    out.ok = out.worst_violation == 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Least-squares fit against the classified family c_star x_n^{1-a} + c2.
// ---------------------------------------------------------------------------

struct FamilyFit {
    double c_star = 0.0;
    double c2 = 0.0;
    double residual = 0.0;  // relative L-infinity deviation
    bool degenerate = false;
};

template <int N>
inline FamilyFit fit_family(const ScalarField<N>& u) {
    const auto& g = u.grid;
    if (g.vertical_nodes < 3) throw precondition_error("family fit needs at least 2 interior heights");
    const double p = u.weight.family_exponent();

    FamilyFit fit;
    const std::size_t n = u.values.size();
    if (p == 0.0) {  // a == 1: the basis collapses to {1, 1}
        fit.degenerate = true;
        double mean = 0.0;
        for (double v : u.values) mean += v;
        fit.c2 = mean / static_cast<double>(n);
    } else {
        double spp = 0, sp1 = 0, spu = 0, s1u = 0;
        g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
            const double phi = std::pow(idx[N - 1] * g.spacing, p);
            const double v = u.values[lin];
            spp += phi * phi;
            sp1 += phi;
            spu += phi * v;
            s1u += v;
        });
        const double s11 = static_cast<double>(n);
        const double det = spp * s11 - sp1 * sp1;
        if (!(det > 1e-12 * std::max(1.0, spp * s11))) {
            fit.degenerate = true;
            fit.c2 = s1u / s11;
        } else {
            fit.c_star = (spu * s11 - s1u * sp1) / det;
            fit.c2 = (spp * s1u - sp1 * spu) / det;
        }
    }

    double worst = 0.0;
    g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
        const double phi = fit.degenerate ? 0.0 : std::pow(idx[N - 1] * g.spacing, p);
        worst = std::max(worst, std::abs(u.values[lin] - fit.c_star * phi - fit.c2));
    });
    const double scale = u.linf();
    fit.residual = scale > 0.0 ? worst / scale : worst;
    return fit;
}

}  // namespace halfspace
