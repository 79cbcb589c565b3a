#pragma once

namespace halfspace {

inline constexpr const char* version = "0.1.0";

/// Convention stamped into every report: the boundary-value kernel is scaled
/// to unit boundary mass, the boundary-flux kernel is left unscaled.
inline constexpr const char* normalization_convention = "mass-one";

}  // namespace halfspace
