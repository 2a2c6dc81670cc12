#pragma once

#include <regex>
#include <string>
#include <vector>

#include "linguomotor/core/json.hpp"
#include "linguomotor/error.hpp"

namespace linguomotor::bus {

/// A validated topic path such as "/base/cmd_vel".
class TopicName {
 public:
  explicit TopicName(std::string path) : path_(std::move(path)) {
    static const std::regex kPattern("/[a-z0-9_]+(/[a-z0-9_]+)*");
    if (!std::regex_match(path_, kPattern)) {
      throw Error(ErrorCode::InvalidTopicName, "'" + path_ + "'");
    }
  }

  const std::string& str() const { return path_; }

  friend bool operator==(const TopicName&, const TopicName&) = default;
  friend auto operator<=>(const TopicName&, const TopicName&) = default;

 private:
  std::string path_;
};

enum class FieldType { Number, Boolean, String, Object };

inline std::string to_string(FieldType t) {
  switch (t) {
    case FieldType::Number: return "number";
    case FieldType::Boolean: return "boolean";
    case FieldType::String: return "string";
    case FieldType::Object: return "object";
  }
  return "unknown";
}

struct Field {
  std::string name;
  FieldType type = FieldType::Number;
  std::vector<Field> children;  // required sub-fields when type == Object

  friend bool operator==(const Field&, const Field&) = default;
};

// Declared payload shape of a topic. Every listed field is required; extra
// fields are allowed (e.g. odometry carries theta_deg for display).
struct PayloadSchema {
  std::string name;
  std::vector<Field> fields;

  friend bool operator==(const PayloadSchema&, const PayloadSchema&) = default;
};

namespace detail {

inline bool type_matches(const Json& v, FieldType t) {
  switch (t) {
    case FieldType::Number: return v.is_number();
    case FieldType::Boolean: return v.is_boolean();
    case FieldType::String: return v.is_string();
    case FieldType::Object: return v.is_object();
  }
  return false;
}

inline void validate_fields(const Json& obj, const std::vector<Field>& fields, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::PayloadInvalid, where + " is not an object");
  for (const auto& f : fields) {
    auto it = obj.find(f.name);
    if (it == obj.end()) throw Error(ErrorCode::PayloadInvalid, "missing field '" + where + f.name + "'");
    if (!type_matches(*it, f.type)) {
      throw Error(ErrorCode::PayloadInvalid, "field '" + where + f.name + "' must be " + to_string(f.type));
    }
    if (f.type == FieldType::Number && !std::isfinite(it->get<double>())) {
      throw Error(ErrorCode::PayloadInvalid, "field '" + where + f.name + "' is not finite");
    }
    if (f.type == FieldType::Object) validate_fields(*it, f.children, where + f.name + ".");
  }
}

inline Json fields_to_json(const std::vector<Field>& fields) {
  Json out = Json::object();
  for (const auto& f : fields) {
    out[f.name] = f.type == FieldType::Object ? fields_to_json(f.children) : Json(to_string(f.type));
  }
  return out;
}

}  // namespace detail

inline void validate(const PayloadSchema& schema, const Json& payload) {
  detail::validate_fields(payload, schema.fields, "");
}

/// Handshake rendering: {"name": ..., "fields": {field: type | {nested}}}.
inline Json to_json(const PayloadSchema& schema) {
  return Json{{"name", schema.name}, {"fields", detail::fields_to_json(schema.fields)}};
}

namespace schemas {

inline PayloadSchema joint_vector() {
  PayloadSchema s{"JointVector", {}};
  for (auto name : kJointNames) s.fields.push_back({std::string(name), FieldType::Number, {}});
  return s;
}

inline PayloadSchema arm_pose() {
  return {"ArmPose",
          {{"position_x", FieldType::Number, {}},
           {"position_y", FieldType::Number, {}},
           {"position_z", FieldType::Number, {}},
           {"orientation",
            FieldType::Object,
            {{"x", FieldType::Number, {}},
             {"y", FieldType::Number, {}},
             {"z", FieldType::Number, {}},
             {"w", FieldType::Number, {}}}}}};
}

inline PayloadSchema base_pose() {
  return {"BasePose2D",
          {{"x", FieldType::Number, {}}, {"y", FieldType::Number, {}}, {"theta", FieldType::Number, {}}}};
}

inline PayloadSchema velocity_command() {
  return {"VelocityCommand",
          {{"v_x", FieldType::Number, {}},
           {"omega", FieldType::Number, {}},
           {"duration", FieldType::Number, {}}}};
}

inline PayloadSchema estop() { return {"EStop", {{"engaged", FieldType::Boolean, {}}}}; }

}  // namespace schemas

namespace topics {

inline const TopicName kJointCommand{"/arm/joint_command"};
inline const TopicName kJointStates{"/arm/joint_states"};
inline const TopicName kPoseCommand{"/arm/pose_command"};
inline const TopicName kArmPose{"/arm/pose"};
inline const TopicName kCmdVel{"/base/cmd_vel"};
inline const TopicName kOdom{"/base/odom"};
inline const TopicName kEStop{"/safety/estop"};

}  // namespace topics

}  // namespace linguomotor::bus
