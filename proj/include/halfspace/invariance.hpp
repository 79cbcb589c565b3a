#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "halfspace/core.hpp"
#include "halfspace/moebius.hpp"
#include "halfspace/weight.hpp"

namespace halfspace {

/// Scalar function with an optional analytic gradient; when the gradient is
/// absent a centered difference stands in.
template <int N>
struct DifferentiableFn {
    ScalarFn<N> value;
    std::function<Point<N>(const Point<N>&)> gradient;  // may be empty

    bool has_gradient() const { return static_cast<bool>(gradient); }

    Point<N> grad(const Point<N>& p, double h) const {
        if (gradient) return gradient(p);
        Point<N> g;
        for (int i = 0; i < N; ++i)
            g[i] = (value(shifted(p, i, h)) - value(shifted(p, i, -h))) / (2.0 * h);
        return g;
    }
};

/// div(y_n^a grad u) at y by centered second-order differences:
/// y_n^a * lap_h(u) + a * y_n^{a-1} * dn_h(u). The stencil may touch the
/// boundary plane (u must be defined there) but never crosses it.
template <int N, class F>
inline double weighted_divergence_fd(const F& u, double a, const Point<N>& y, double h) {
    const double yn = y[N - 1];
    if (!(yn > 0.0)) throw domain_error("weighted divergence needs y_n > 0");
    if (yn - h < -1e-14 * (1.0 + yn))
        throw domain_error("finite-difference stencil would cross the boundary (y_n < h)");
    const double u0 = u(y);
    double lap = 0.0;
    for (int i = 0; i < N; ++i)
        lap += (u(shifted(y, i, h)) - 2.0 * u0 + u(shifted(y, i, -h))) / (h * h);
    const double dn = (u(shifted(y, N - 1, h)) - u(shifted(y, N - 1, -h))) / (2.0 * h);
    return std::pow(yn, a) * lap + a * std::pow(yn, a - 1.0) * dn;
}

template <int N>
struct ResidualField {
    std::vector<Point<N>> points;
    std::vector<double> values;  // lhs - rhs per probe
    double linf = 0.0;
};

/// Residual of the conformal-invariance identity
///   div(y_n^a grad u_map)(y) = (r/|y-c|)^{n+2-a} div(y_n^a grad u)(y^inv)
/// with both sides discretized by the same centered stencil of step h. The
/// identity holds for arbitrary C^2 functions, so the residual is pure
/// truncation error, O(h^2) on probes at fixed distance from boundary and
/// center.
template <int N>
inline ResidualField<N> invariance_residual(const ScalarFn<N>& u, const MoebiusMap<N>& map,
                                            WeightExponent a, std::span<const Point<N>> probe,
                                            double h) {
    if (!(h > 0.0)) throw validation_error("finite-difference step must be positive");
    TransformedFunction<N> v = kelvin<N>(u, map, a);
    ResidualField<N> out;
    out.points.assign(probe.begin(), probe.end());
    out.values.resize(probe.size());
    for (std::size_t idx = 0; idx < probe.size(); ++idx) {
        const Point<N>& y = probe[idx];
        if (!(y[N - 1] >= h)) throw domain_error("probe point too close to the boundary");
        if (dist(y, map.center) <= 2.0 * h)
            throw domain_error("probe point touches the inversion center");
        const Point<N> yi = map.invert(y);
        if (!(yi[N - 1] - h > 0.0))
            throw domain_error("inverted stencil would cross the boundary; shrink h or move the probe");
        const double lhs = weighted_divergence_fd<N>(v, a.a, y, h);
        const double factor = std::pow(map.radius / dist(y, map.center), N + 2 - a.a);
        const double rhs = factor * weighted_divergence_fd<N>(u, a.a, yi, h);
        out.values[idx] = lhs - rhs;
        out.linf = std::max(out.linf, std::abs(lhs - rhs));
    }
    return out;
}

struct InvarianceRateReport {
    std::vector<double> steps;
    std::vector<double> linf;
    double rate = 0.0;
    bool below_floor = false;
};

template <int N>
inline InvarianceRateReport invariance_rate(const ScalarFn<N>& u, const MoebiusMap<N>& map,
                                            WeightExponent a, std::span<const Point<N>> probe,
                                            std::span<const double> steps) {
    InvarianceRateReport rep;
    for (double h : steps) {
        rep.steps.push_back(h);
        rep.linf.push_back(invariance_residual<N>(u, map, a, probe, h).linf);
    }
    const RateFit fit = fit_convergence_rate(rep.steps, rep.linf);
    rep.rate = fit.rate;
    rep.below_floor = fit.below_floor;
    return rep;
}

/// Gradient of the transformed function from the closed-form derivative of
/// the Kelvin factor and the inversion Jacobian, given the base value and
/// gradient at the inverted point. This is the algebraic route; the
/// finite-difference route in flux_invariance_check cross-validates it.
template <int N>
inline Point<N> transformed_gradient(const MoebiusMap<N>& map, WeightExponent a, const Point<N>& y,
                                     double value_at_inverted, const Point<N>& grad_at_inverted) {
    const Point<N> d = sub(y, map.center);
    const double r2 = norm2(d);
    if (r2 == 0.0) throw singularity_error("transformed gradient undefined at the map center");
    const double lam = map.radius;
    const double tau = N - 2 + a.a;
    const double radial = dot(grad_at_inverted, d);

    Point<N> g;
    if (a.special(N)) {
        // u(y^inv) + ln(r/|y-c|): Jacobian part plus the log gradient.
        const double jac = lam * lam / r2;
        for (int i = 0; i < N; ++i)
            g[i] = jac * grad_at_inverted[i] - 2.0 * jac * d[i] * radial / r2 - d[i] / r2;
        return g;
    }
    const double pw = std::pow(lam * lam / r2, 0.5 * (N + a.a));  // lam^{n+a} / r^{n+a}
    const double factor_u = tau * std::pow(lam, tau) * std::pow(r2, -0.5 * (N + a.a));
    for (int i = 0; i < N; ++i)
        g[i] = -factor_u * d[i] * value_at_inverted + pw * grad_at_inverted[i] -
               2.0 * pw * d[i] * radial / r2;
    return g;
}

template <int N>
struct FluxCheckReport {
    std::vector<double> flux_fd;      // extrapolated one-sided route per probe
    std::vector<double> flux_closed;  // closed-form-gradient route per probe
    double max_abs_flux = 0.0;        // worst |flux| over probes, FD route
    double route_disagreement = 0.0;  // max |fd - closed|
};

/// Boundary limit of y_n^a d_n(u_map) at tangential probes, two ways:
/// (a) one-sided weighted difference quotients at heights h, h/2, h/4,
///     Richardson-extrapolated with leading exponents (1+a, 2);
/// (b) the closed-form transformed gradient evaluated at the same heights and
///     extrapolated identically.
/// For a base with vanishing weighted flux both routes tend to zero.
template <int N>
inline FluxCheckReport<N> flux_invariance_check(const DifferentiableFn<N>& u,
                                                const MoebiusMap<N>& map, WeightExponent a,
                                                std::span<const Point<N>> boundary_probes,
                                                double h = 1.0 / 32.0) {
    if (!(a.a > -1.0)) throw validation_error("flux limit requires a > -1");
    if (!(h > 0.0)) throw validation_error("flux step must be positive");
    TransformedFunction<N> v = kelvin<N>(u.value, map, a);

    FluxCheckReport<N> rep;
    rep.flux_fd.reserve(boundary_probes.size());
    rep.flux_closed.reserve(boundary_probes.size());
    const double heights[3] = {h, 0.5 * h, 0.25 * h};

    for (const Point<N>& p : boundary_probes) {
        if (p[N - 1] != 0.0) throw validation_error("flux probes must lie on the boundary plane");
        if (dist(p, map.center) == 0.0)
            throw singularity_error("flux probe coincides with the map center");

        const double v0 = v(p);
        double fd[3], closed[3];
        for (int l = 0; l < 3; ++l) {
            const double t = heights[l];
            const Point<N> q = shifted(p, N - 1, t);
            // the quotient recovers the t^{1-a} coefficient; (1-a) turns it
            // into the weighted flux, matching the resistance-integrated
            // discrete flux convention
            fd[l] = (1.0 - a.a) * std::pow(t, a.a - 1.0) * (v(q) - v0);
            const Point<N> qi = map.invert(q);
            const Point<N> grad = transformed_gradient<N>(map, a, q, u.value(qi), u.grad(qi, 0.5 * t));
            closed[l] = std::pow(t, a.a) * grad[N - 1];
        }
        const double p1 = 1.0 + a.a;
        const double ffd = richardson3(fd[0], fd[1], fd[2], p1, 2.0);
        const double fcl = richardson3(closed[0], closed[1], closed[2], p1, 2.0);
        rep.flux_fd.push_back(ffd);
        rep.flux_closed.push_back(fcl);
        rep.max_abs_flux = std::max(rep.max_abs_flux, std::abs(ffd));
        rep.route_disagreement = std::max(rep.route_disagreement, std::abs(ffd - fcl));
    }
    return rep;
}

}  // namespace halfspace
