#pragma once

#include <algorithm>
#include <cmath>

#include "linguomotor/bridge/granularity.hpp"
#include "linguomotor/bridge/mock_backend.hpp"
#include "linguomotor/bridge/tool_call.hpp"

namespace linguomotor::bridge {

/// Bounds applied to commands that came from qualitative prompts.
struct ClampBounds {
  double max_joint_delta = 0.2;   // rad per joint, relative to the current state
  double max_translation = 0.1;   // m per pose command
  double max_speed = 0.1;         // m/s
  double max_duration = 2.0;      // s
};

namespace detail {

// current + clamp(target - current) with the result guaranteed to stay
// within `bound` of current after rounding.
inline double clamp_step(double current, double target, double bound) {
  const double delta = target - current;
  if (std::abs(delta) <= bound) return target;
  double out = current + (delta > 0 ? bound : -bound);
  while (std::abs(out - current) > bound) out = std::nextafter(out, current);
  return out;
}

}  // namespace detail

struct ClampResult {
  ToolCall call;
  bool clamped = false;
};

/// Qualitative calls are limited to small moves; quantitative calls pass
/// through untouched.
inline ClampResult clamp_qualitative(const ToolCall& call, const GranularityLabel& label, const TurnContext& ctx,
                                     const ClampBounds& bounds = {}) {
  ClampResult out{call, false};
  if (!label.qualitative()) return out;
  const RobotCommand cmd = to_command(call);
  if (const auto* target = std::get_if<JointVector>(&cmd)) {
    std::array<double, kJointCount> a{};
    for (std::size_t i = 0; i < kJointCount; ++i) {
      a[i] = detail::clamp_step(ctx.joints[i], (*target)[i], bounds.max_joint_delta);
    }
    JointVector limited(a);
    if (!(limited == *target)) {
      out.call.arguments = joint_arguments(limited);
      out.clamped = true;
    }
  } else if (const auto* pose = std::get_if<PoseTarget>(&cmd)) {
    const Position3& from = ctx.position;
    const Position3 d{pose->position.x - from.x, pose->position.y - from.y, pose->position.z - from.z};
    const double len = d.norm();
    if (len > bounds.max_translation) {
      double scale = bounds.max_translation / len;
      Position3 p;
      do {
        p = {from.x + d.x * scale, from.y + d.y * scale, from.z + d.z * scale};
        scale *= 1.0 - 1e-15;
      } while (distance(p, from) > bounds.max_translation);
      out.call.arguments = pose_arguments(p, pose->orientation);
      out.clamped = true;
    }
  } else {
    const auto& v = std::get<VelocityCommand>(cmd);
    const double speed = std::clamp(v.v_x(), -bounds.max_speed, bounds.max_speed);
    const double duration = std::min(v.duration(), bounds.max_duration);
    if (speed != v.v_x() || duration != v.duration()) {
      out.call.arguments = drive_arguments(speed, v.omega(), duration);
      out.clamped = true;
    }
  }
  return out;
}

}  // namespace linguomotor::bridge
