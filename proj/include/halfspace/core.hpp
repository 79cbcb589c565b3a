#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace halfspace {

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Error taxonomy. validation/precondition errors map to CLI exit code 1,
// numeric_error to exit code 2.
// ---------------------------------------------------------------------------

struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// Evaluation at an inversion center.
struct singularity_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Iteration, quadrature, or extrapolation failed to reach the requested quality.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small fixed-dimension points. The last coordinate is the distinguished
// vertical one; the open half space is {p[N-1] > 0}.
// ---------------------------------------------------------------------------

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
using ScalarFn = std::function<double(const Point<N>&)>;

template <std::size_t N>
inline Point<N> add(const Point<N>& a, const Point<N>& b) {
    Point<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
inline Point<N> sub(const Point<N>& a, const Point<N>& b) {
    Point<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
inline Point<N> scale(double s, const Point<N>& a) {
    Point<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
    return r;
}

template <std::size_t N>
inline double dot(const Point<N>& a, const Point<N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t N>
inline double norm2(const Point<N>& a) { return dot(a, a); }

template <std::size_t N>
inline double norm(const Point<N>& a) { return std::sqrt(norm2(a)); }

template <std::size_t N>
inline double dist2(const Point<N>& a, const Point<N>& b) { return norm2(sub(a, b)); }

template <std::size_t N>
inline double dist(const Point<N>& a, const Point<N>& b) { return std::sqrt(dist2(a, b)); }

template <std::size_t N>
inline Point<N> shifted(const Point<N>& p, int axis, double delta) {
    Point<N> r = p;
    r[axis] += delta;
    return r;
}

template <std::size_t N>
inline bool all_finite(const Point<N>& p) {
    for (std::size_t i = 0; i < N; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Deterministic reductions and sampling.
// ---------------------------------------------------------------------------

/// Pairwise tree summation; fixed association independent of chunking.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Canonical double in [0,1) from the raw engine; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Log-uniform sample in [lo, hi], lo > 0.
inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo * std::exp(uniform01(rng) * std::log(hi / lo));
}

/// Van der Corput radical inverse; bases 2,3,5 give low-discrepancy tuples.
inline double halton(std::uint64_t index, unsigned base) {
    double f = 1.0, r = 0.0;
    for (std::uint64_t i = index + 1; i > 0; i /= base) {
        f /= base;
        r += f * static_cast<double>(i % base);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Least-squares convergence order from (h, err) samples.
// ---------------------------------------------------------------------------

struct RateFit {
    double rate = 0.0;
    bool below_floor = false;  // every error under the rounding floor
};

inline RateFit fit_convergence_rate(std::span<const double> hs, std::span<const double> errs,
                                    double floor = 1e-13) {
    if (hs.size() != errs.size() || hs.size() < 2)
        throw validation_error("rate fit needs matching h/error sequences of length >= 2");
    bool all_small = true;
    for (double e : errs) all_small = all_small && (e < floor);
    if (all_small) return {std::numeric_limits<double>::infinity(), true};

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double x = std::log(hs[i]);
        const double y = std::log(std::max(errs[i], floor));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return {(n * sxy - sx * sy) / (n * sxx - sx * sx), false};
}

/// Two-stage Richardson extrapolation of f(h), f(h/2), f(h/4) with leading
/// error exponents p1 then p2.
inline double richardson3(double f_h, double f_h2, double f_h4, double p1, double p2) {
    const double w1 = std::pow(2.0, p1);
    const double g1 = (w1 * f_h2 - f_h) / (w1 - 1.0);
    const double g2 = (w1 * f_h4 - f_h2) / (w1 - 1.0);
    const double w2 = std::pow(2.0, p2);
    return (w2 * g2 - g1) / (w2 - 1.0);
}

// ---------------------------------------------------------------------------
// Minimal static-chunk parallel loop. Results must be written to disjoint
// slots so the output is independent of the thread count.
// ---------------------------------------------------------------------------

inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t, std::size_t)>& run_range) {
    if (threads <= 1 || count < 64) {
        run_range(0, count);
        return;
    }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(k);
    const std::size_t chunk = (count + k - 1) / k;
    for (std::size_t t = 0; t < k; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] { run_range(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace halfspace
