#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "halfspace/core.hpp"
#include "halfspace/grid.hpp"
#include "halfspace/moebius.hpp"
#include "halfspace/solver.hpp"
#include "halfspace/weight.hpp"

namespace halfspace {

/// Member of the classified one-parameter family c_star x_n^{1-a} + c2.
template <int N>
inline ScalarFn<N> classified_profile(WeightExponent a, double c_star, double c2) {
    const double p = a.family_exponent();
    return [=](const Point<N>& y) { return c_star * std::pow(y[N - 1], p) + c2; };
}

/// The shifted family member whose sphere comparison holds in each regime:
/// 1 + x_n^{1-a} above the special exponent, x_n^{1-a} - 1 below it, and the
/// zero-trace profile x_n^{n-1} at a = 2-n.
template <int N>
inline ScalarFn<N> comparison_family(WeightExponent a) {
    if (a.special(N)) return classified_profile<N>(a, 1.0, 0.0);
    if (a.a > 2.0 - N) return classified_profile<N>(a, 1.0, 1.0);
    return classified_profile<N>(a, 1.0, -1.0);
}

template <int N>
struct MapScan {
    MoebiusMap<N> map;
    double min_w = std::numeric_limits<double>::infinity();
    Point<N> argmin{};
};

template <int N>
struct ScanReport {
    std::vector<MapScan<N>> per_map;
    double global_min = std::numeric_limits<double>::infinity();
    double threshold = -1e-12;
    struct Violation {
        std::size_t map_index;
        Point<N> point;
        double w;
    };
    std::vector<Violation> violations;
};

/// Sphere-comparison scan: w(y) = u(y) - u_{x,lambda}(y) over the probe set,
/// one minimum per map, with every probe strictly outside every closed ball.
template <int N>
inline ScanReport<N> moving_sphere_scan(const ScalarFn<N>& u, WeightExponent a,
                                        std::span<const MoebiusMap<N>> maps,
                                        std::span<const Point<N>> probes,
                                        double threshold = -1e-12, int threads = 1) {
    for (const auto& m : maps)
        for (const auto& y : probes)
            if (!(dist(y, m.center) > m.radius))
                throw precondition_error("probe point inside a comparison ball");

    ScanReport<N> rep;
    rep.threshold = threshold;
    rep.per_map.resize(maps.size());
    std::vector<std::vector<typename ScanReport<N>::Violation>> local(maps.size());

    parallel_for(maps.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t mi = lo; mi < hi; ++mi) {
            TransformedFunction<N> v = kelvin<N>(u, maps[mi], a);
            MapScan<N> scan;
            scan.map = maps[mi];
            for (const Point<N>& y : probes) {
                const double w = u(y) - v(y);
                if (w < scan.min_w) {
                    scan.min_w = w;
                    scan.argmin = y;
                }
                if (w < threshold) local[mi].push_back({mi, y, w});
            }
            rep.per_map[mi] = scan;
        }
    });

    for (std::size_t mi = 0; mi < maps.size(); ++mi) {
        rep.global_min = std::min(rep.global_min, rep.per_map[mi].min_w);
        rep.violations.insert(rep.violations.end(), local[mi].begin(), local[mi].end());
    }
    return rep;
}

/// Same scan on a grid field via multilinear interpolation; probes and their
/// inverted images must stay inside the grid box.
template <int N>
inline ScanReport<N> moving_sphere_scan(const ScalarField<N>& u,
                                        std::span<const MoebiusMap<N>> maps,
                                        std::span<const Point<N>> probes,
                                        double threshold = -1e-12, int threads = 1) {
    ScalarFn<N> fn = [&u](const Point<N>& p) { return interpolate(u, p); };
    return moving_sphere_scan<N>(fn, u.weight, maps, probes, threshold, threads);
}

/// Worst tangential spread over heights, normalized by the field range.
/// 0 for fields of x_n alone, 1 for a purely tangential ramp.
template <int N>
inline double tangential_variation(const ScalarField<N>& u) {
    const auto& g = u.grid;
    const auto [lo, hi] = u.min_max();
    const double range = hi - lo;
    // constant to rounding: no variation worth normalizing
    if (range <= 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)))) return 0.0;

    std::vector<double> row_lo(g.vertical_nodes, std::numeric_limits<double>::infinity());
    std::vector<double> row_hi(g.vertical_nodes, -std::numeric_limits<double>::infinity());
    g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
        const int k = idx[N - 1];
        row_lo[k] = std::min(row_lo[k], u.values[lin]);
        row_hi[k] = std::max(row_hi[k], u.values[lin]);
    });
    double spread = 0.0;
    for (int k = 0; k < g.vertical_nodes; ++k) spread = std::max(spread, row_hi[k] - row_lo[k]);
    return spread / range;
}

enum class Scenario { dirichlet, neumann };

/// Deterministic map/probe battery for a grid field: ball centers and radii
/// seeded, radii log-spaced in [h, L/2], balls kept inside the box; probes
/// are grid nodes plus Halton points, all outside every ball.
template <int N>
struct ScanBattery {
    std::vector<MoebiusMap<N>> maps;
    std::vector<Point<N>> probes;
};

template <int N>
inline ScanBattery<N> sample_scan_battery(const HalfSpaceGrid<N>& g, std::size_t map_count,
                                          std::size_t probe_count, std::uint64_t seed) {
    ScanBattery<N> b;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const double L = g.half_width;
    const double lam_max = 0.5 * L;
    const double lam_min = std::min(g.spacing, 0.5 * lam_max);
    while (b.maps.size() < map_count) {
        const double lam = log_uniform(rng, lam_min, lam_max);
        Point<N> c{};
        bool inside = true;
        for (int i = 0; i < N - 1; ++i) {
            c[i] = uniform(rng, -L, L);
            inside = inside && std::abs(c[i]) + lam < L - g.spacing;
        }
        c[N - 1] = 0.0;
        if (inside) b.maps.emplace_back(c, lam);
    }

    auto admissible = [&](const Point<N>& y) {
        if (!(y[N - 1] > 0.0) || y[N - 1] > g.height) return false;
        for (int i = 0; i < N - 1; ++i)
            if (std::abs(y[i]) > L) return false;
        for (const auto& m : b.maps)
            if (dist(y, m.center) <= 1.02 * m.radius) return false;
        return true;
    };

    g.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t) {
        if (b.probes.size() >= probe_count) return;
        // thin the lattice deterministically so probes spread over the box
        for (int i = 0; i < N; ++i)
            if (idx[i] % 3 != 1) return;
        const Point<N> y = g.node(idx);
        if (admissible(y)) b.probes.push_back(y);
    });
    std::uint64_t h_index = 0;
    const unsigned bases[3] = {2, 3, 5};
    while (b.probes.size() < probe_count && h_index < 100000) {
        Point<N> y;
        for (int i = 0; i < N - 1; ++i) y[i] = -L + 2.0 * L * halton(h_index, bases[i]);
        y[N - 1] = g.height * halton(h_index, bases[N - 1]);
        ++h_index;
        if (admissible(y)) b.probes.push_back(y);
    }
    if (b.probes.empty()) throw numeric_error("scan battery found no admissible probes");
    return b;
}

template <int N>
struct UniquenessReport {
    ScalarField<N> field;
    SolveReport solve;
    FamilyFit fit;
    double variation = 0.0;
    ScanReport<N> scan;
};

/// End-to-end uniqueness experiment: solve boundary data consistent with a
/// family member, fit the family, measure tangential variation, and scan the
/// solved field against its sphere transforms.
template <int N>
inline UniquenessReport<N> uniqueness_experiment(Scenario scenario, WeightExponent a,
                                                 const HalfSpaceGrid<N>& grid,
                                                 const SolveConfig& cfg, double c_star, double c2,
                                                 std::uint64_t seed = 0, std::size_t scan_maps = 12,
                                                 std::size_t scan_probes = 256) {
    if (c_star != 0.0 && !(a.a < 1.0))
        throw validation_error("family data with c_star != 0 needs a < 1");
    const ScalarFn<N> family = classified_profile<N>(a, c_star, c2);

    BoundaryDatum<N> datum = [&] {
        if (scenario == Scenario::dirichlet) {
            ScalarFn<N> bottom = [c2](const Point<N>&) { return c2; };  // trace of the family
            return BoundaryDatum<N>::dirichlet(bottom, family);
        }
        const double flux = c_star * a.family_exponent();
        ScalarFn<N> bottom = [flux](const Point<N>&) { return flux; };
        return BoundaryDatum<N>::weighted_neumann(bottom, family);
    }();

    auto [field, solve_report] = solve<N>(grid, a, datum, cfg);

    UniquenessReport<N> rep{std::move(field), std::move(solve_report), {}, 0.0, {}};
    rep.fit = fit_family(rep.field);
    rep.variation = tangential_variation(rep.field);

    const ScanBattery<N> battery = sample_scan_battery<N>(grid, scan_maps, scan_probes, seed);
    rep.scan = moving_sphere_scan<N>(rep.field, battery.maps, battery.probes,
                                     -1e-12, cfg.threads);
    return rep;
}

}  // namespace halfspace
