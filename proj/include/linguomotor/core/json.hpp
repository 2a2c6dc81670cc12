#pragma once

// Canonical JSON shapes for the core types. The bus, the trace log and the
// HTTP API all use exactly these field names.

#include <string>

#include <nlohmann/json.hpp>

#include "linguomotor/core/types.hpp"
#include "linguomotor/error.hpp"

namespace linguomotor {

using Json = nlohmann::json;

namespace detail {

inline double number_field(const Json& obj, const char* key) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidValue, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::InvalidValue, std::string("missing field '") + key + "'");
  if (!it->is_number()) throw Error(ErrorCode::InvalidValue, std::string("field '") + key + "' is not a number");
  return it->get<double>();
}

}  // namespace detail

inline Json to_json(const JointVector& joints) {
  Json out = Json::object();
  for (std::size_t i = 0; i < kJointCount; ++i) out[std::string(kJointNames[i])] = joints[i];
  return out;
}

inline JointVector joint_vector_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidJointVector, "joint map must be an object");
  std::map<std::string, double> named;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw Error(ErrorCode::InvalidJointVector, "joint '" + key + "' is not a number");
    named[key] = value.get<double>();
  }
  return JointVector::from_map(named);
}

inline Json to_json(const Quaternion& q) {
  return Json{{"x", q.x}, {"y", q.y}, {"z", q.z}, {"w", q.w}};
}

inline Quaternion quaternion_from_json(const Json& j) {
  return {detail::number_field(j, "x"), detail::number_field(j, "y"),
          detail::number_field(j, "z"), detail::number_field(j, "w")};
}

inline Json to_json(const ArmPose& pose) {
  return Json{{"position_x", pose.position().x},
              {"position_y", pose.position().y},
              {"position_z", pose.position().z},
              {"orientation", to_json(pose.orientation())}};
}

inline ArmPose arm_pose_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("orientation")) {
    throw Error(ErrorCode::InvalidValue, "pose needs an orientation object");
  }
  Position3 p{detail::number_field(j, "position_x"), detail::number_field(j, "position_y"),
              detail::number_field(j, "position_z")};
  return ArmPose(p, quaternion_from_json(j.at("orientation")));
}

inline Json to_json(const BasePose2D& pose) {
  return Json{{"x", pose.x()}, {"y", pose.y()}, {"theta", pose.theta()}};
}

/// Odometry rendering: the canonical pose plus heading in degrees for display.
inline Json to_odom_json(const BasePose2D& pose) {
  Json out = to_json(pose);
  out["theta_deg"] = pose.theta_deg();
  return out;
}

inline BasePose2D base_pose_from_json(const Json& j) {
  return BasePose2D(detail::number_field(j, "x"), detail::number_field(j, "y"),
                    detail::number_field(j, "theta"));
}

inline Json to_json(const VelocityCommand& cmd) {
  return Json{{"v_x", cmd.v_x()}, {"omega", cmd.omega()}, {"duration", cmd.duration()}};
}

inline VelocityCommand velocity_command_from_json(const Json& j) {
  return VelocityCommand(detail::number_field(j, "v_x"), detail::number_field(j, "omega"),
                         detail::number_field(j, "duration"));
}

}  // namespace linguomotor
