#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "halfspace/core.hpp"

namespace halfspace {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;          // accumulated local error estimates
    std::size_t evaluations = 0;
    bool depth_exhausted = false;
};

namespace quad_detail {

// Gauss 7 / Kronrod 15 pair on [-1, 1].
inline constexpr double kronrod_nodes[8] = {
    0.991455371120812639207, 0.949107912342758524526, 0.864864423359769072789,
    0.741531185599394439864, 0.586087235467691130295, 0.405845151377397166907,
    0.207784955007898467601, 0.0};
inline constexpr double kronrod_weights[8] = {
    0.022935322010529224964, 0.063092092629978553291, 0.104790010322250183840,
    0.140653259715525918745, 0.169004726639267902827, 0.190350578064785409913,
    0.204432940075298892414, 0.209482141084727828013};
inline constexpr double gauss_weights[4] = {
    0.129484966168869693271, 0.279705391489276667901, 0.381830050505118944950,
    0.417959183673469387755};

template <class F>
inline void gk15(const F& f, double lo, double hi, double& kronrod, double& gauss) {
    const double c = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    // Nodes are interior; keep them there even when rounding would push a
    // sample onto an endpoint where the integrand may be singular.
    const double lo_in = std::nextafter(lo, hi);
    const double hi_in = std::nextafter(hi, lo);
    auto at = [&](double x) { return f(std::min(hi_in, std::max(lo_in, x))); };
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = at(c - half * kronrod_nodes[i]);
        fv[14 - i] = at(c + half * kronrod_nodes[i]);
    }
    fv[7] = at(c);

    // Pairwise-style fixed-order accumulation keeps runs bit-reproducible.
    double kterms[15];
    for (int i = 0; i < 7; ++i) {
        kterms[i] = kronrod_weights[i] * fv[i];
        kterms[14 - i] = kronrod_weights[i] * fv[14 - i];
    }
    kterms[7] = kronrod_weights[7] * fv[7];
    kronrod = half * pairwise_sum(std::span<const double>(kterms, 15));

    double gterms[7];
    for (int i = 0; i < 3; ++i) {
        gterms[i] = gauss_weights[i] * fv[2 * i + 1];
        gterms[6 - i] = gauss_weights[i] * fv[13 - 2 * i];
    }
    gterms[3] = gauss_weights[3] * fv[7];
    gauss = half * pairwise_sum(std::span<const double>(gterms, 7));
}

template <class F>
inline void adapt(const F& f, double lo, double hi, double tol, int depth, QuadResult& out) {
    double k, g;
    gk15(f, lo, hi, k, g);
    out.evaluations += 15;
    const double err = std::abs(k - g);
    const bool rounding_floor = err <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(k);
    const bool width_floor = (hi - lo) < 16.0 * std::numeric_limits<double>::epsilon() *
                                             std::max(std::abs(lo), std::abs(hi));
    if (err <= tol || rounding_floor || width_floor || depth <= 0) {
        out.value += k;
        out.error += err;
        if (err > tol && depth <= 0) out.depth_exhausted = true;
        return;
    }
    const double mid = 0.5 * (lo + hi);
    adapt(f, lo, mid, 0.5 * tol, depth - 1, out);
    adapt(f, mid, hi, 0.5 * tol, depth - 1, out);
}

}  // namespace quad_detail

/// Adaptive Gauss-Kronrod on a finite interval with an absolute tolerance.
template <class F>
inline QuadResult integrate(const F& f, double lo, double hi, double abs_tol, int max_depth = 48) {
    if (!(lo <= hi)) throw validation_error("integration bounds out of order");
    if (!(abs_tol > 0.0)) throw validation_error("quadrature tolerance must be positive");
    QuadResult out;
    if (lo == hi) return out;
    quad_detail::adapt(f, lo, hi, abs_tol, max_depth, out);
    return out;
}

}  // namespace halfspace
