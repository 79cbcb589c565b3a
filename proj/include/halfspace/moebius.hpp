#pragma once

#include <cmath>
#include <utility>

#include "halfspace/core.hpp"
#include "halfspace/weight.hpp"

namespace halfspace {

/// Inversion through the sphere of radius `radius` centered at a boundary
/// point: y -> center + radius^2 (y - center)/|y - center|^2. Fixes the
/// sphere, swaps inside and outside, maps the open half space to itself.
template <int N>
struct MoebiusMap {
    Point<N> center{};
    double radius = 1.0;

    MoebiusMap() = default;
    MoebiusMap(const Point<N>& c, double r) : center(c), radius(r) {
        if (!all_finite(c)) throw validation_error("inversion center must be finite");
        if (c[N - 1] != 0.0)
            throw validation_error("inversion center must lie on the boundary hyperplane");
        if (!(r > 0.0) || !std::isfinite(r))
            throw validation_error("inversion radius must be positive and finite");
    }

    Point<N> invert(const Point<N>& y) const {
        const double d2 = dist2(y, center);
        if (d2 == 0.0) throw singularity_error("inversion undefined at its center");
        const double s = radius * radius / d2;
        Point<N> out;
        for (int i = 0; i < N; ++i) out[i] = center[i] + s * (y[i] - center[i]);
        return out;
    }
};

template <int N>
inline Point<N> invert_point(const MoebiusMap<N>& map, const Point<N>& y) {
    return map.invert(y);
}

enum class KelvinVariant { standard, logarithmic };

/// Kelvin-type transform of a scalar function on the open half space.
///   standard:     (radius/|y-c|)^{n-2+a} * u(y^inv)
///   logarithmic:  u(y^inv) + ln(radius/|y-c|),  selected exactly at a = 2-n
template <int N>
class TransformedFunction {
  public:
    TransformedFunction(ScalarFn<N> base, MoebiusMap<N> map, WeightExponent a)
        : base_(std::move(base)),
          map_(map),
          exponent_(a),
          variant_(a.special(N) ? KelvinVariant::logarithmic : KelvinVariant::standard) {}

    double operator()(const Point<N>& y) const {
        const double d = dist(y, map_.center);
        if (d == 0.0) throw singularity_error("transformed function undefined at the map center");
        const double inner = base_(map_.invert(y));
        if (variant_ == KelvinVariant::logarithmic)
            return inner + std::log(map_.radius / d);
        return std::pow(map_.radius / d, N - 2 + exponent_.a) * inner;
    }

    const MoebiusMap<N>& map() const { return map_; }
    WeightExponent exponent() const { return exponent_; }
    KelvinVariant variant() const { return variant_; }
    const ScalarFn<N>& base() const { return base_; }

  private:
    ScalarFn<N> base_;
    MoebiusMap<N> map_;
    WeightExponent exponent_;
    KelvinVariant variant_;
};

template <int N>
inline TransformedFunction<N> kelvin(ScalarFn<N> u, const MoebiusMap<N>& map, WeightExponent a) {
    return TransformedFunction<N>(std::move(u), map, a);
}

}  // namespace halfspace
