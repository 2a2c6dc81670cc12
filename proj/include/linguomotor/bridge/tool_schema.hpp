#pragma once

#include <string>
#include <vector>

#include "linguomotor/core/json.hpp"

namespace linguomotor::bridge {

inline constexpr const char* kMoveArmToJointPositions = "move_arm_to_joint_positions";
inline constexpr const char* kApproachPose = "approach_pose";
inline constexpr const char* kDrive = "drive";

enum class ParamType { Number, JointMap };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::Number;
  std::string unit;
  bool required = true;
  std::string description;
};

struct ToolSchema {
  std::string name;
  std::string description;
  std::vector<ParamSpec> parameters;

  /// Function definition in the chat-completions "tools" format.
  Json to_function_tool() const {
    Json props = Json::object();
    Json required = Json::array();
    for (const auto& p : parameters) {
      Json prop;
      if (p.type == ParamType::Number) {
        prop = {{"type", "number"}, {"description", p.description + " [" + p.unit + "]"}};
      } else {
        Json joints = Json::object();
        Json joint_names = Json::array();
        for (auto n : kJointNames) {
          joints[std::string(n)] = {{"type", "number"}, {"description", "radians"}};
          joint_names.push_back(std::string(n));
        }
        prop = {{"type", "object"},
                {"description", p.description},
                {"properties", joints},
                {"required", joint_names},
                {"additionalProperties", false}};
      }
      props[p.name] = prop;
      if (p.required) required.push_back(p.name);
    }
    return Json{{"type", "function"},
                {"function",
                 {{"name", name},
                  {"description", description},
                  {"parameters", {{"type", "object"}, {"properties", props}, {"required", required}}}}}};
  }
};

/// The three tools the gateway exposes to a language backend.
class ToolRegistry {
 public:
  static const ToolRegistry& standard() {
    static const ToolRegistry registry;
    return registry;
  }

  const std::vector<ToolSchema>& tools() const { return tools_; }

  const ToolSchema* find(const std::string& name) const {
    for (const auto& t : tools_) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  Json function_tools() const {
    Json out = Json::array();
    for (const auto& t : tools_) out.push_back(t.to_function_tool());
    return out;
  }

  /// Throws InvalidAction unless `args` carries exactly the tool's parameters
  /// with finite numeric values (and a complete joint map where required).
  void validate(const std::string& tool, const Json& args) const {
    const ToolSchema* schema = find(tool);
    if (!schema) throw Error(ErrorCode::InvalidAction, "unknown tool '" + tool + "'");
    if (!args.is_object()) throw Error(ErrorCode::InvalidAction, tool + ": arguments must be an object");
    for (const auto& [key, value] : args.items()) {
      bool known = false;
      for (const auto& p : schema->parameters) known = known || p.name == key;
      if (!known) throw Error(ErrorCode::InvalidAction, tool + ": unexpected argument '" + key + "'");
    }
    for (const auto& p : schema->parameters) {
      auto it = args.find(p.name);
      if (it == args.end()) {
        if (p.required) throw Error(ErrorCode::InvalidAction, tool + ": missing argument '" + p.name + "'");
        continue;
      }
      if (p.type == ParamType::Number) {
        if (!it->is_number() || !std::isfinite(it->get<double>())) {
          throw Error(ErrorCode::InvalidAction, tool + ": '" + p.name + "' must be a finite number");
        }
      } else {
        try {
          joint_vector_from_json(*it);
        } catch (const Error& e) {
          throw Error(ErrorCode::InvalidAction, tool + ": " + e.detail());
        }
      }
    }
    if (tool == kDrive && args.at("duration").get<double>() < 0.0) {
      throw Error(ErrorCode::InvalidAction, "drive: duration must be non-negative");
    }
  }

 private:
  ToolRegistry() {
    tools_.push_back({kMoveArmToJointPositions,
                      "Move the 7-joint arm so each joint reaches the given absolute angle.",
                      {{"joint_positions", ParamType::JointMap, "rad", true,
                        "Target angle for every joint right_j0..right_j6"}}});
    tools_.push_back({kApproachPose,
                      "Move the arm end-effector to a position and orientation.",
                      {{"position_x", ParamType::Number, "m", true, "End-effector x"},
                       {"position_y", ParamType::Number, "m", true, "End-effector y"},
                       {"position_z", ParamType::Number, "m", true, "End-effector z"},
                       {"orientation_x", ParamType::Number, "unitless", true, "Quaternion x"},
                       {"orientation_y", ParamType::Number, "unitless", true, "Quaternion y"},
                       {"orientation_z", ParamType::Number, "unitless", true, "Quaternion z"},
                       {"orientation_w", ParamType::Number, "unitless", true, "Quaternion w"}}});
    tools_.push_back({kDrive,
                      "Drive the mobile base with a forward speed and yaw rate for a duration.",
                      {{"v_x", ParamType::Number, "m/s", true, "Forward speed, negative drives backwards"},
                       {"omega", ParamType::Number, "rad/s", true, "Yaw rate, counter-clockwise positive"},
                       {"duration", ParamType::Number, "s", true, "How long to hold the command"}}});
  }

  std::vector<ToolSchema> tools_;
};

}  // namespace linguomotor::bridge
