#pragma once

#include <cmath>
#include <numbers>

namespace linguomotor {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double degrees) { return degrees * (kPi / 180.0); }
constexpr double rad_to_deg(double radians) { return radians * (180.0 / kPi); }

// Wraps into (-pi, pi]; -pi maps to +pi. Values already in range are returned
// bit-identical so that zero-motion integration never perturbs a heading.
inline double wrap_angle(double theta) {
  if (theta > -kPi && theta <= kPi) return theta;
  double r = std::fmod(theta + kPi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - kPi;
}

}  // namespace linguomotor
