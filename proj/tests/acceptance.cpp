// Acceptance suite: ten quantitative criteria, one pass/fail line each.
// Exit code = number of failed criteria.

#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "halfspace/halfspace.hpp"

using namespace halfspace;

namespace {

int failures = 0;

template <class Body>
void criterion(int id, const char* label, double time_limit_s, Body&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string metric;
    try {
        ok = body(metric);
    } catch (const std::exception& e) {
        ok = false;
        metric = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < time_limit_s;
    if (!(ok && in_time)) ++failures;
    std::printf("[%s] C%-2d %-28s %s (%.1fs < %.0fs)\n", (ok && in_time) ? "PASS" : "FAIL", id,
                label, metric.c_str(), dt, time_limit_s);
    std::fflush(stdout);
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

// --- shared batteries -------------------------------------------------------

template <int N>
std::vector<Point<N>> probe_box() {
    std::vector<Point<N>> probes;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if constexpr (N == 2) {
                probes.push_back({0.5 + 0.3 * i, 0.8 + 0.3 * j});
            } else {
                probes.push_back({0.5 + 0.3 * i, 0.1 * i - 0.2, 0.8 + 0.3 * j});
            }
        }
    return probes;
}

template <int N>
std::vector<ScalarFn<N>> nonsolution_functions() {
    std::vector<ScalarFn<N>> fns;
    fns.push_back([](const Point<N>& y) {
        return std::sin(y[0]) * std::exp(y[N - 1]) + y[N - 1] * y[N - 1];
    });
    fns.push_back([](const Point<N>& y) {
        double tang = y[0];
        if constexpr (N == 3) tang += 0.5 * y[1];
        return std::cos(tang) + y[0] * y[N - 1];
    });
    fns.push_back([](const Point<N>& y) { return std::exp(-0.25 * norm2(y)) * (1.0 + y[N - 1]); });
    return fns;
}

std::set<double> weight_battery(int n) {
    std::set<double> a{-0.5, 0.0, 0.5};
    a.insert(2.0 - n);
    return a;
}

const std::vector<double> rate_steps{1.0 / 32, 1.0 / 64, 1.0 / 128};

template <int N>
double worst_invariance_rate() {
    Point<N> c{};
    c[0] = -0.4;
    if constexpr (N == 3) c[1] = 0.2;
    const MoebiusMap<N> map(c, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (double a : weight_battery(N))
        for (const auto& fn : nonsolution_functions<N>()) {
            const auto rep =
                invariance_rate<N>(fn, map, WeightExponent(a), probe_box<N>(), rate_steps);
            if (!rep.below_floor) worst = std::min(worst, rep.rate);
        }
    return worst;
}

template <int N>
double kernel_solution_rate(const KernelSpec& spec, double a) {
    std::vector<double> linf;
    for (double h : rate_steps) {
        double worst = 0.0;
        for (const Point<N>& p : probe_box<N>()) {
            const ScalarFn<N> u = [&](const Point<N>& y) {
                double rho2 = 0.0;
                for (int i = 0; i + 1 < N; ++i) rho2 += y[i] * y[i];
                return eval_kernel_radial(spec, std::sqrt(rho2), y[N - 1]);
            };
            worst = std::max(worst, std::abs(stencil_residual<N>(u, a, p, h)));
        }
        linf.push_back(worst);
    }
    const RateFit fit = fit_convergence_rate(rate_steps, linf);
    return fit.below_floor ? std::numeric_limits<double>::infinity() : fit.rate;
}

ScalarFn<2> random_trig(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9e3779b9ULL + 1);
    std::array<double, 3> w{}, phix{}, phiy{};
    for (int i = 0; i < 3; ++i) {
        w[i] = uniform(rng, -1.0, 1.0);
        phix[i] = uniform(rng, 0.0, 2.0 * pi);
        phiy[i] = uniform(rng, 0.0, 2.0 * pi);
    }
    return [=](const Point<2>& p) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i)
            acc += w[i] * std::cos((i + 1) * p[0] + phix[i]) * std::cos((i + 1) * p[1] + phiy[i]);
        return acc;
    };
}

template <int N>
double family_scan_min(double a_val, std::uint64_t seed) {
    const WeightExponent a(a_val);
    std::mt19937_64 rng(seed);
    std::vector<MoebiusMap<N>> maps;
    while (maps.size() < 50) {
        Point<N> c{};
        for (int i = 0; i + 1 < N; ++i) c[i] = uniform(rng, -2.0, 2.0);
        maps.emplace_back(c, log_uniform(rng, 0.1, 1.0));
    }
    std::vector<Point<N>> probes;
    std::uint64_t idx = 0;
    const unsigned bases[3] = {2, 3, 5};
    while (probes.size() < 1000 && idx < 1000000) {
        Point<N> y{};
        for (int i = 0; i + 1 < N; ++i) y[i] = -4.0 + 8.0 * halton(idx, bases[i]);
        y[N - 1] = 4.0 * halton(idx, bases[N - 1]);
        ++idx;
        if (!(y[N - 1] > 1e-3)) continue;
        bool ok = true;
        for (const auto& m : maps) ok = ok && dist(y, m.center) > 1.01 * m.radius;
        if (ok) probes.push_back(y);
    }
    const auto rep = moving_sphere_scan<N>(comparison_family<N>(a), a, maps, probes);
    return rep.global_min;
}

}  // namespace

int main() {
    std::printf("acceptance suite, version %s\n", version);

    criterion(1, "invariance identity rate", 30.0, [](std::string& metric) {
        const double worst = std::min(worst_invariance_rate<2>(), worst_invariance_rate<3>());
        metric = fmt("min rate %.3f (need >= 1.8)", worst);
        return worst >= 1.8;
    });

    criterion(2, "kernel solutions residual", 10.0, [](std::string& metric) {
        double worst = std::numeric_limits<double>::infinity();
        for (double a : weight_battery(2)) {
            worst = std::min(worst, kernel_solution_rate<2>(KernelSpec::gamma_dirichlet_type(a, 2), a));
            worst = std::min(worst, kernel_solution_rate<2>(KernelSpec::gamma_neumann_type(a, 2), a));
        }
        for (double a : weight_battery(3)) {
            worst = std::min(worst, kernel_solution_rate<3>(KernelSpec::gamma_dirichlet_type(a, 3), a));
            worst = std::min(worst, kernel_solution_rate<3>(KernelSpec::gamma_neumann_type(a, 3), a));
        }
        metric = fmt("min rate %.3f (need >= 1.8)", worst);
        return worst >= 1.8;
    });

    criterion(3, "weight-shift kernel identity", 1.0, [](std::string& metric) {
        std::mt19937_64 rng(101);
        std::vector<std::array<double, 2>> pts;
        for (int i = 0; i < 1000; ++i)
            pts.push_back({uniform(rng, 0.0, 2.0), uniform(rng, 1e-3, 2.0)});
        const std::array<std::array<double, 3>, 7> pairs{{{0.0, 0.0, 3},
                                                          {0.5, 0.25, 3},
                                                          {-0.5, 0.3, 3},
                                                          {0.25, -0.5, 3},
                                                          {0.9, 0.05, 3},
                                                          {0.5, 0.25, 2},
                                                          {-0.5, 0.5, 2}}};
        double worst = 0.0;
        for (const auto& p : pairs)
            worst = std::max(worst, weight_shift_identity_deviation(
                                        WeightExponent(p[0]), p[1], static_cast<int>(p[2]), pts));
        metric = fmt("max deviation %.2e (need <= 1e-12)", worst);
        return worst <= 1e-12;
    });

    criterion(4, "normalization dual route", 5.0, [](std::string& metric) {
        double worst = 0.0;
        for (int n : {2, 3})
            for (double a : {-0.5, 0.0, 0.5}) {
                const KernelSpec spec = KernelSpec::poisson_type(a, n);
                const double quad = kernel_normalization(spec);
                const double closed = kernel_normalization_closed_form(spec);
                worst = std::max(worst, std::abs(quad - closed) / closed);
            }
        metric = fmt("max relative gap %.2e (need <= 1e-6)", worst);
        return worst <= 1e-6;
    });

    criterion(5, "fractional laplacian vs oracle", 60.0, [](std::string& metric) {
        const auto f = BoundaryFunction<1>::gaussian(1.0, 1.0, {0.0});
        double worst = 0.0;
        for (double s : {0.25, 0.5, 0.75})
            for (double x : {0.0, 0.5, 1.0}) {
                const FracOrder order = FracOrder::from_s(s);
                const double flux = fractional_laplacian<1>(f, order, {x}).value;
                const double oracle = fourier_oracle(f, order, x);
                worst = std::max(worst, std::abs(flux - oracle) / std::abs(oracle));
            }
        metric = fmt("max relative error %.2e (need <= 1e-2)", worst);
        return worst <= 1e-2;
    });

    criterion(6, "dirichlet uniqueness fit", 120.0, [](std::string& metric) {
        const HalfSpaceGrid<2> g2(1.0, 2.0, 129, 129);
        const auto r2 =
            uniqueness_experiment<2>(Scenario::dirichlet, WeightExponent(0.5), g2, {}, 2.0, 0.0, 11);
        const HalfSpaceGrid<3> g3(1.0, 2.0, 65, 65);
        const auto r3 =
            uniqueness_experiment<3>(Scenario::dirichlet, WeightExponent(0.5), g3, {}, 1.5, 0.0, 13);

        const double scale2 = r2.field.linf(), scale3 = r3.field.linf();
        const double err = std::max(
            {std::abs(r2.fit.c_star - 2.0) / 2.0, std::abs(r2.fit.c2) / scale2,
             std::abs(r3.fit.c_star - 1.5) / 1.5, std::abs(r3.fit.c2) / scale3});
        const double var = std::max(r2.variation, r3.variation);
        metric = fmt("coefficient error %.2e (<= 2e-2), variation %.2e (<= 1e-2)", err, var);
        return err <= 0.02 && var <= 0.01;
    });

    criterion(7, "neumann constancy", 60.0, [](std::string& metric) {
        double worst = 0.0;
        for (double a : {-0.5, 0.0, 0.5}) {
            {
                const HalfSpaceGrid<2> g(1.0, 2.0, 65, 65);
                const auto datum = BoundaryDatum<2>::weighted_neumann(
                    [](const Point<2>&) { return 0.0; }, [](const Point<2>&) { return 3.0; });
                auto [u, rep] = solve<2>(g, WeightExponent(a), datum);
                const auto [lo, hi] = u.min_max();
                worst = std::max(worst, (hi - lo) / 3.0);
            }
            {
                const HalfSpaceGrid<3> g(1.0, 2.0, 33, 33);
                const auto datum = BoundaryDatum<3>::weighted_neumann(
                    [](const Point<3>&) { return 0.0; }, [](const Point<3>&) { return 3.0; });
                auto [u, rep] = solve<3>(g, WeightExponent(a), datum);
                const auto [lo, hi] = u.min_max();
                worst = std::max(worst, (hi - lo) / 3.0);
            }
        }
        metric = fmt("max range/|C| %.2e (need <= 1e-8)", worst);
        return worst <= 1e-8;
    });

    criterion(8, "moving-sphere certificates", 10.0, [](std::string& metric) {
        double global = std::numeric_limits<double>::infinity();
        for (double a : {0.5, -0.5, 0.0})  // above, below, and at 2-n for n=2
            global = std::min(global, family_scan_min<2>(a, 1000 + static_cast<int>(10 * a)));
        for (double a : {0.5, 0.0, -0.5, -1.0, -1.5})  // includes 2-n = -1 for n=3
            global = std::min(global, family_scan_min<3>(a, 2000 + static_cast<int>(10 * a)));
        metric = fmt("global min %.2e (need >= -1e-12)", global);
        return global >= -1e-12;
    });

    criterion(9, "discrete maximum principle", 60.0, [](std::string& metric) {
        const HalfSpaceGrid<2> g(1.0, 2.0, 49, 49);
        int violations = 0;
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto datum = BoundaryDatum<2>::dirichlet(random_trig(3 * seed + 5),
                                                           random_trig(3 * seed + 7));
            auto [u, rep] = solve<2>(g, WeightExponent(0.5), datum);
            const MaxPrincipleResult mp = max_principle_check<2>(u, datum);
            if (!mp.ok) ++violations;
            worst = std::max(worst, mp.worst_violation);
        }
        metric = fmt("violations %.0f of 20 (need 0), worst %.1e", violations, worst);
        return violations == 0;
    });

    criterion(10, "even-reflection seam", 30.0, [](std::string& metric) {
        double worst = 0.0;
        for (double a : {0.0, 0.25, 0.5}) {
            for (int m : {33, 65}) {
                const HalfSpaceGrid<2> g(1.0, 2.0, m, m);
                const auto datum = BoundaryDatum<2>::weighted_neumann(
                    [](const Point<2>&) { return 0.0; }, [](const Point<2>&) { return 3.0; });
                auto [u, rep] = solve<2>(g, WeightExponent(a), datum);
                worst = std::max(worst, even_reflection_residual(u));
            }
        }
        metric = fmt("max seam residual %.2e (need <= 1e-6)", worst);
        return worst <= 1e-6;
    });

    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures;
}
