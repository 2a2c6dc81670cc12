#pragma once

#include <algorithm>
#include <cmath>

#include "linguomotor/core/types.hpp"

namespace linguomotor::sim {

inline JointVector clamp_joints(const JointVector& target, const JointLimits& limits) {
  std::array<double, kJointCount> out{};
  for (std::size_t i = 0; i < kJointCount; ++i) {
    out[i] = std::clamp(target[i], limits[i].min_rad, limits[i].max_rad);
  }
  return JointVector(out);
}

inline bool within_limits(const JointVector& joints, const JointLimits& limits) {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (joints[i] < limits[i].min_rad || joints[i] > limits[i].max_rad) return false;
  }
  return true;
}

/// Exact unicycle motion for constant (v, omega) held for `duration` seconds.
///
/// For omega != 0 the arc is evaluated in chord form,
///   dx = v t sinc(omega t / 2) cos(theta + omega t / 2),
/// which equals (v/omega)(sin theta' - sin theta) but stays well conditioned
/// as omega approaches zero.
inline BasePose2D integrate_unicycle(const BasePose2D& start, double v, double omega, double duration) {
  if (v == 0.0 && omega == 0.0) return start;
  const double theta = start.theta();
  if (omega == 0.0) {
    const double d = v * duration;
    return BasePose2D(start.x() + d * std::cos(theta), start.y() + d * std::sin(theta), theta);
  }
  const double half = 0.5 * omega * duration;
  const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
  const double chord = v * duration * sinc;
  const double mid = theta + half;
  return BasePose2D(start.x() + chord * std::cos(mid), start.y() + chord * std::sin(mid),
                    theta + omega * duration);
}

inline BasePose2D integrate_unicycle(const BasePose2D& start, const VelocityCommand& cmd) {
  return integrate_unicycle(start, cmd.v_x(), cmd.omega(), cmd.duration());
}

}  // namespace linguomotor::sim
