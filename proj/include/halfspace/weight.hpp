#pragma once

#include <algorithm>
#include <cmath>

#include "halfspace/core.hpp"

namespace halfspace {

/// Exponent a of the degenerate weight x_n^a. Regime queries are derived,
/// never stored, so a WeightExponent cannot get out of sync with itself.
struct WeightExponent {
    double a = 0.0;

    WeightExponent() = default;
    explicit WeightExponent(double value) : a(value) {
        if (!std::isfinite(value)) throw validation_error("weight exponent must be finite");
    }

    /// Kernel normalization integral converges.
    bool integrable_kernel() const { return a < 1.0; }

    /// Window in which the weighted-Neumann uniqueness statement holds.
    bool neumann_window(int n) const {
        return a > std::max(-1.0, 2.0 - static_cast<double>(n)) && a < 1.0;
    }

    /// The exponent where the Kelvin factor degenerates and the transform
    /// picks up an additive logarithm. Exact comparison on purpose: the two
    /// transform formulas do not deform into each other.
    bool special(int n) const { return a == 2.0 - static_cast<double>(n); }

    /// Exponent of the one-parameter solution family x_n^{1-a}.
    double family_exponent() const { return 1.0 - a; }
};

inline bool operator==(WeightExponent lhs, WeightExponent rhs) { return lhs.a == rhs.a; }
inline bool operator!=(WeightExponent lhs, WeightExponent rhs) { return !(lhs == rhs); }

}  // namespace halfspace
