#pragma once

#include <algorithm>
#include <cmath>

#include "linguomotor/core/types.hpp"
#include "linguomotor/core/units.hpp"

namespace linguomotor::eval {

/// L-infinity distance over the seven joints, radians.
inline double joint_error(const JointVector& intended, const JointVector& achieved) {
  double worst = 0.0;
  for (std::size_t i = 0; i < kJointCount; ++i) worst = std::max(worst, std::abs(intended[i] - achieved[i]));
  return worst;
}

struct PlanarError {
  double distance = 0.0;  // m
  double heading = 0.0;   // rad, wrap-aware, in [0, pi]
};

inline PlanarError planar_error(const BasePose2D& intended, const BasePose2D& achieved) {
  return {std::hypot(intended.x() - achieved.x(), intended.y() - achieved.y()),
          std::abs(wrap_angle(intended.theta() - achieved.theta()))};
}

struct Thresholds {
  double joint_rad = 0.01;
  double position_m = 0.01;
  double heading_deg = 1.0;
};

}  // namespace linguomotor::eval
