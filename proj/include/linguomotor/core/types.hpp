#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "linguomotor/core/units.hpp"
#include "linguomotor/error.hpp"

namespace linguomotor {

inline constexpr std::size_t kJointCount = 7;

inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "right_j0", "right_j1", "right_j2", "right_j3",
    "right_j4", "right_j5", "right_j6"};

inline std::optional<std::size_t> joint_index(std::string_view name) {
  auto it = std::find(kJointNames.begin(), kJointNames.end(), name);
  if (it == kJointNames.end()) return std::nullopt;
  return static_cast<std::size_t>(it - kJointNames.begin());
}

/// Angles (radians) of the seven arm joints right_j0 .. right_j6.
///
/// Always complete and finite: the only ways to build one are from a full
/// array or from a name map that names every joint exactly once.
class JointVector {
 public:
  JointVector() { angles_.fill(0.0); }

  explicit JointVector(const std::array<double, kJointCount>& angles)
      : angles_(angles) {
    for (std::size_t i = 0; i < kJointCount; ++i) {
      if (!std::isfinite(angles_[i])) {
        throw Error(ErrorCode::InvalidJointVector,
                    std::string(kJointNames[i]) + " is not finite");
      }
    }
  }

  static JointVector from_map(const std::map<std::string, double>& named) {
    std::array<double, kJointCount> angles{};
    std::array<bool, kJointCount> seen{};
    for (const auto& [name, value] : named) {
      auto idx = joint_index(name);
      if (!idx) throw Error(ErrorCode::InvalidJointVector, "unknown joint '" + name + "'");
      angles[*idx] = value;
      seen[*idx] = true;
    }
    for (std::size_t i = 0; i < kJointCount; ++i) {
      if (!seen[i]) {
        throw Error(ErrorCode::InvalidJointVector,
                    "missing joint '" + std::string(kJointNames[i]) + "'");
      }
    }
    return JointVector(angles);
  }

  std::map<std::string, double> to_map() const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < kJointCount; ++i) out.emplace(kJointNames[i], angles_[i]);
    return out;
  }

  double operator[](std::size_t i) const { return angles_.at(i); }
  double at(std::string_view name) const {
    auto idx = joint_index(name);
    if (!idx) throw Error(ErrorCode::InvalidJointVector, "unknown joint '" + std::string(name) + "'");
    return angles_[*idx];
  }

  JointVector with(std::size_t i, double value) const {
    auto copy = angles_;
    copy.at(i) = value;
    return JointVector(copy);
  }

  const std::array<double, kJointCount>& array() const { return angles_; }

  friend bool operator==(const JointVector&, const JointVector&) = default;

 private:
  std::array<double, kJointCount> angles_;
};

struct JointRange {
  double min_rad = -3.0503;
  double max_rad = 3.0503;
  friend bool operator==(const JointRange&, const JointRange&) = default;
};

class JointLimits {
 public:
  JointLimits() : JointLimits(JointRange{}) {}

  explicit JointLimits(JointRange uniform) {
    ranges_.fill(uniform);
    validate();
  }

  explicit JointLimits(const std::array<JointRange, kJointCount>& ranges) : ranges_(ranges) {
    validate();
  }

  static JointLimits symmetric(double bound) { return JointLimits(JointRange{-bound, bound}); }

  const JointRange& operator[](std::size_t i) const { return ranges_.at(i); }
  const std::array<JointRange, kJointCount>& ranges() const { return ranges_; }

  friend bool operator==(const JointLimits&, const JointLimits&) = default;

 private:
  void validate() const {
    for (std::size_t i = 0; i < kJointCount; ++i) {
      const auto& r = ranges_[i];
      if (!(std::isfinite(r.min_rad) && std::isfinite(r.max_rad) && r.min_rad < r.max_rad)) {
        throw Error(ErrorCode::InvalidValue,
                    "joint limits for " + std::string(kJointNames[i]) + " need min < max");
      }
    }
  }

  std::array<JointRange, kJointCount> ranges_;
};

struct Quaternion {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z + w * w); }
  static Quaternion identity() { return {}; }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

inline constexpr double kQuaternionAcceptTolerance = 0.01;

/// Rescales a near-unit quaternion. Inputs further than 1% from unit norm are
/// treated as an invalid action rather than silently fixed.
inline Quaternion normalize_quaternion(const Quaternion& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || n <= 0.0 || std::abs(n - 1.0) >= kQuaternionAcceptTolerance) {
    throw Error(ErrorCode::NotNormalizable, "quaternion norm " + std::to_string(n));
  }
  if (n == 1.0) return q;
  return {q.x / n, q.y / n, q.z / n, q.w / n};
}

struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  friend bool operator==(const Position3&, const Position3&) = default;
};

inline double distance(const Position3& a, const Position3& b) {
  return Position3{a.x - b.x, a.y - b.y, a.z - b.z}.norm();
}

/// End-effector pose: position in meters, orientation as a unit quaternion.
class ArmPose {
 public:
  ArmPose() = default;
  ArmPose(Position3 position, Quaternion orientation)
      : position_(position), orientation_(normalize_quaternion(orientation)) {
    if (!(std::isfinite(position.x) && std::isfinite(position.y) && std::isfinite(position.z))) {
      throw Error(ErrorCode::InvalidValue, "pose position is not finite");
    }
  }

  const Position3& position() const { return position_; }
  const Quaternion& orientation() const { return orientation_; }

  friend bool operator==(const ArmPose&, const ArmPose&) = default;

 private:
  Position3 position_{};
  Quaternion orientation_{};
};

/// Planar base pose; theta is kept wrapped to (-pi, pi].
class BasePose2D {
 public:
  BasePose2D() = default;
  BasePose2D(double x, double y, double theta) : x_(x), y_(y), theta_(wrap_angle(theta)) {
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(theta))) {
      throw Error(ErrorCode::InvalidValue, "base pose is not finite");
    }
  }

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }
  double theta_deg() const { return rad_to_deg(theta_); }

  friend bool operator==(const BasePose2D&, const BasePose2D&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

/// Forward speed (m/s), yaw rate (rad/s) and how long to hold them (s).
class VelocityCommand {
 public:
  VelocityCommand() = default;
  VelocityCommand(double v_x, double omega, double duration)
      : v_x_(v_x), omega_(omega), duration_(duration) {
    if (!(std::isfinite(v_x) && std::isfinite(omega) && std::isfinite(duration))) {
      throw Error(ErrorCode::InvalidCommand, "velocity command is not finite");
    }
    if (duration < 0.0) throw Error(ErrorCode::InvalidCommand, "negative duration");
  }

  double v_x() const { return v_x_; }
  double omega() const { return omega_; }
  double duration() const { return duration_; }

  friend bool operator==(const VelocityCommand&, const VelocityCommand&) = default;

 private:
  double v_x_ = 0.0;
  double omega_ = 0.0;
  double duration_ = 0.0;
};

}  // namespace linguomotor
