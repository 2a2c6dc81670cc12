#pragma once

#include <string>
#include <variant>

#include "linguomotor/bridge/tool_schema.hpp"

namespace linguomotor::bridge {

enum class BackendSource { Mock, Remote, Replay };

inline std::string to_string(BackendSource s) {
  switch (s) {
    case BackendSource::Mock: return "mock";
    case BackendSource::Remote: return "remote";
    case BackendSource::Replay: return "replay";
  }
  return "unknown";
}

inline BackendSource backend_source_from_string(const std::string& s) {
  if (s == "mock") return BackendSource::Mock;
  if (s == "remote") return BackendSource::Remote;
  if (s == "replay") return BackendSource::Replay;
  throw Error(ErrorCode::InvalidValue, "unknown backend source '" + s + "'");
}

/// A validated robot command produced by a language backend.
struct ToolCall {
  std::string tool;
  Json arguments;
  std::string call_id;
  BackendSource source = BackendSource::Mock;
  std::string prompt_id;

  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct PoseTarget {
  Position3 position;
  Quaternion orientation;
};

using RobotCommand = std::variant<JointVector, PoseTarget, VelocityCommand>;

/// Typed view of a call's arguments. Expects arguments already validated
/// against the tool schema.
inline RobotCommand to_command(const ToolCall& call) {
  const Json& a = call.arguments;
  if (call.tool == kMoveArmToJointPositions) return joint_vector_from_json(a.at("joint_positions"));
  if (call.tool == kApproachPose) {
    return PoseTarget{{a.at("position_x").get<double>(), a.at("position_y").get<double>(),
                       a.at("position_z").get<double>()},
                      {a.at("orientation_x").get<double>(), a.at("orientation_y").get<double>(),
                       a.at("orientation_z").get<double>(), a.at("orientation_w").get<double>()}};
  }
  if (call.tool == kDrive) {
    return VelocityCommand(a.at("v_x").get<double>(), a.at("omega").get<double>(), a.at("duration").get<double>());
  }
  throw Error(ErrorCode::InvalidAction, "unknown tool '" + call.tool + "'");
}

inline Json joint_arguments(const JointVector& target) { return Json{{"joint_positions", to_json(target)}}; }

inline Json pose_arguments(const Position3& p, const Quaternion& q) {
  return Json{{"position_x", p.x},      {"position_y", p.y},      {"position_z", p.z},
              {"orientation_x", q.x},   {"orientation_y", q.y},   {"orientation_z", q.z},
              {"orientation_w", q.w}};
}

inline Json drive_arguments(double v_x, double omega, double duration) {
  return Json{{"v_x", v_x}, {"omega", omega}, {"duration", duration}};
}

inline Json to_json(const ToolCall& call) {
  return Json{{"call_id", call.call_id},
              {"tool", call.tool},
              {"arguments", call.arguments},
              {"source", to_string(call.source)},
              {"prompt_id", call.prompt_id}};
}

inline ToolCall tool_call_from_json(const Json& j) {
  return ToolCall{j.at("tool").get<std::string>(), j.at("arguments"), j.at("call_id").get<std::string>(),
                  backend_source_from_string(j.at("source").get<std::string>()),
                  j.value("prompt_id", std::string{})};
}

struct ToolReply {
  ToolCall call;
  std::string assistant_text;
};

struct Clarification {
  std::string text;
};

struct Refusal {
  ErrorCode reason = ErrorCode::InvalidAction;
  std::string detail;
};

/// Exactly one of: a tool call, a clarification question, or a refusal.
using BackendReply = std::variant<ToolReply, Clarification, Refusal>;

}  // namespace linguomotor::bridge
