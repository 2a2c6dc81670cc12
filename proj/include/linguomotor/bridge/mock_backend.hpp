#pragma once

// Deterministic grammar-based language backend. It understands the prompt
// forms used in the arm and base experiments and asks for a magnitude when
// it cannot map a prompt onto a tool call.
//
// Productions, first match wins (prompt is normalized first):
//   a  move <joint> by <N> degrees                      joint delta +N deg
//   b  move <joint> to the (left|right) by <N> degrees  absolute -N / +N deg
//   c  rotate the base <N> degrees                      right_j0 delta +N deg
//   d  move all joints to <v>                           every joint to v rad
//   e  move the arm to position_x = <x>, position_y = <y>[,] [and] position_z = <z>
//        [while keeping the current orientation]        approach_pose
//   f  move (forward|back|backward) [at a speed of <v> [m/s]] [for <t> seconds]
//        [turning at <w> degrees per second]            drive
//      move along x-axis with a speed of <v> m/s for <t> seconds
//   g  move the arm (up|down)                           right_j1 delta -/+ step
//   h  rotate the arm                                   right_j6 delta + step

#include <atomic>
#include <optional>
#include <regex>
#include <sstream>

#include "linguomotor/bridge/granularity.hpp"
#include "linguomotor/bridge/tool_call.hpp"

namespace linguomotor::bridge {

struct MockConfig {
  double qualitative_joint_step = 0.1;   // rad, rule g
  double rotate_arm_step = 0.2;          // rad, rule h
  double qualitative_speed = 0.1;        // m/s, rule f without magnitudes
  double default_duration = 1.0;         // s, rule f without a duration
  double timed_speed = 1.0;              // m/s, rule f with a duration but no speed
  bool allow_turn_rate = false;          // accept "turning at <N> degrees per second"
};

/// What the robot currently looks like, as far as a backend needs to know.
struct TurnContext {
  JointVector joints{};
  Quaternion orientation{};
  Position3 position{};
  BasePose2D base{};
  std::string prompt_id;
};

enum class Rule { JointDelta, JointSideAbsolute, BaseRotate, AllJoints, PoseTarget, Drive, ArmUpDown, RotateArm };

inline char rule_letter(Rule r) {
  switch (r) {
    case Rule::JointDelta: return 'a';
    case Rule::JointSideAbsolute: return 'b';
    case Rule::BaseRotate: return 'c';
    case Rule::AllJoints: return 'd';
    case Rule::PoseTarget: return 'e';
    case Rule::Drive: return 'f';
    case Rule::ArmUpDown: return 'g';
    case Rule::RotateArm: return 'h';
  }
  return '?';
}

/// Result of matching a prompt against the grammar, before any robot state
/// is consulted. Angles stay in the units they were written in.
struct ParsedCommand {
  Rule rule = Rule::JointDelta;
  std::size_t joint = 0;
  double degrees = 0.0;       // a, b (signed by side), c
  double value = 0.0;         // d
  Position3 position{};       // e
  bool keep_orientation = false;
  double direction = 1.0;     // f: +1 forward / -1 back; g: +1 up / -1 down
  std::optional<double> speed;
  std::optional<double> duration;
  std::optional<double> turn_rate_deg;
  bool along_x = false;
};

namespace detail {

inline const std::string kNum = R"(([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:e[-+]?\d+)?))";

inline std::regex grammar_re(const std::string& body) {
  return std::regex("^" + body + "$", std::regex::ECMAScript | std::regex::optimize);
}

inline double num(const std::ssub_match& m) { return std::stod(m.str()); }

}  // namespace detail

inline std::optional<ParsedCommand> parse_command(const std::string& prompt, const MockConfig& cfg = {}) {
  using detail::grammar_re;
  using detail::kNum;
  using detail::num;
  static const std::regex joint_delta = grammar_re(R"(move (right_j[0-6]) by )" + kNum + R"( ?(?:degrees?|deg|°))");
  static const std::regex joint_side =
      grammar_re(R"(move (right_j[0-6]) to the (left|right) by )" + kNum + R"( ?(?:degrees?|deg|°))");
  static const std::regex base_rotate = grammar_re(R"(rotate the base (?:by )?)" + kNum + R"( ?(?:degrees?|deg|°))");
  static const std::regex all_joints = grammar_re(R"(move all (?:the )?joints to )" + kNum + R"((?: ?(?:radians?|rad))?)");
  static const std::regex pose = grammar_re(R"(move the arm to pos(?:i)?tion_x ?= ?)" + kNum +
                                            R"(,? position_y ?= ?)" + kNum + R"(,?(?: and)? position_z ?= ?)" + kNum +
                                            R"(( while keeping the current orientation)?)");
  static const std::regex drive = grammar_re(R"(move (forward|back|backward)(?: at a speed of )" + kNum +
                                             R"((?: ?m/s)?)?(?: for )" + kNum + R"( ?(?:seconds?|secs?|s))?)" +
                                             R"((?:,? turning at )" + kNum + R"( ?(?:degrees?|deg) per second)?)");
  static const std::regex along_x = grammar_re(R"(move along (?:the )?x-axis (?:with|at) a speed of )" + kNum +
                                               R"( ?m/s for )" + kNum + R"( ?(?:seconds?|secs?|s))");
  static const std::regex arm_up_down = grammar_re(R"(move the arm (up|down))");
  static const std::regex rotate_arm = grammar_re(R"(rotate the arm)");

  const std::string text = normalize_prompt(prompt);
  std::smatch m;
  ParsedCommand out;
  auto joint_of = [](const std::ssub_match& s) { return static_cast<std::size_t>(s.str().back() - '0'); };

  if (std::regex_match(text, m, joint_delta)) {
    out.rule = Rule::JointDelta;
    out.joint = joint_of(m[1]);
    out.degrees = num(m[2]);
  } else if (std::regex_match(text, m, joint_side)) {
    out.rule = Rule::JointSideAbsolute;
    out.joint = joint_of(m[1]);
    out.degrees = (m[2].str() == "left" ? -1.0 : 1.0) * num(m[3]);
  } else if (std::regex_match(text, m, base_rotate)) {
    out.rule = Rule::BaseRotate;
    out.degrees = num(m[1]);
  } else if (std::regex_match(text, m, all_joints)) {
    out.rule = Rule::AllJoints;
    out.value = num(m[1]);
  } else if (std::regex_match(text, m, pose)) {
    out.rule = Rule::PoseTarget;
    out.position = {num(m[1]), num(m[2]), num(m[3])};
    out.keep_orientation = m[4].matched;
  } else if (std::regex_match(text, m, drive)) {
    out.rule = Rule::Drive;
    out.direction = m[1].str() == "forward" ? 1.0 : -1.0;
    if (m[2].matched) out.speed = num(m[2]);
    if (m[3].matched) out.duration = num(m[3]);
    if (m[4].matched) {
      if (!cfg.allow_turn_rate) return std::nullopt;
      out.turn_rate_deg = num(m[4]);
    }
  } else if (std::regex_match(text, m, along_x)) {
    out.rule = Rule::Drive;
    out.along_x = true;
    out.speed = num(m[1]);
    out.duration = num(m[2]);
  } else if (std::regex_match(text, m, arm_up_down)) {
    out.rule = Rule::ArmUpDown;
    out.direction = m[1].str() == "up" ? 1.0 : -1.0;
  } else if (std::regex_match(text, rotate_arm)) {
    out.rule = Rule::RotateArm;
  } else {
    return std::nullopt;
  }
  return out;
}

inline const std::string kClarificationText =
    "I can't map that onto a robot action yet. Can you specify how far you want the robot to move, "
    "for example in degrees, meters, m/s or seconds?";

/// Builds the tool call for a parsed command against the current state.
/// Joint deltas are resolved to absolute targets here, because the arm tool
/// only accepts absolute joint positions.
inline ToolCall build_tool_call(const ParsedCommand& cmd, const TurnContext& ctx, const MockConfig& cfg) {
  ToolCall call;
  call.source = BackendSource::Mock;
  call.prompt_id = ctx.prompt_id;
  auto joints = [&](JointVector target) {
    call.tool = kMoveArmToJointPositions;
    call.arguments = joint_arguments(target);
  };
  switch (cmd.rule) {
    case Rule::JointDelta:
      joints(ctx.joints.with(cmd.joint, ctx.joints[cmd.joint] + deg_to_rad(cmd.degrees)));
      break;
    case Rule::JointSideAbsolute:
      joints(ctx.joints.with(cmd.joint, deg_to_rad(cmd.degrees)));
      break;
    case Rule::BaseRotate:
      joints(ctx.joints.with(0, ctx.joints[0] + deg_to_rad(cmd.degrees)));
      break;
    case Rule::AllJoints: {
      std::array<double, kJointCount> a{};
      a.fill(cmd.value);
      joints(JointVector(a));
      break;
    }
    case Rule::ArmUpDown:
      // Raising the arm means pitching the shoulder (right_j1) back.
      joints(ctx.joints.with(1, ctx.joints[1] - cmd.direction * cfg.qualitative_joint_step));
      break;
    case Rule::RotateArm:
      joints(ctx.joints.with(6, ctx.joints[6] + cfg.rotate_arm_step));
      break;
    case Rule::PoseTarget:
      call.tool = kApproachPose;
      call.arguments = pose_arguments(cmd.position, cmd.keep_orientation ? ctx.orientation : Quaternion::identity());
      break;
    case Rule::Drive: {
      double v = 0.0;
      if (cmd.along_x) {
        v = *cmd.speed;
      } else if (cmd.speed) {
        v = cmd.direction * std::abs(*cmd.speed);
      } else {
        v = cmd.direction * (cmd.duration ? cfg.timed_speed : cfg.qualitative_speed);
      }
      const double omega = cmd.turn_rate_deg ? deg_to_rad(*cmd.turn_rate_deg) : 0.0;
      call.tool = kDrive;
      call.arguments = drive_arguments(v, omega, cmd.duration.value_or(cfg.default_duration));
      break;
    }
  }
  return call;
}

inline BackendReply mock_complete(const std::string& prompt, const TurnContext& ctx, const MockConfig& cfg = {}) {
  auto parsed = parse_command(prompt, cfg);
  if (!parsed) return Clarification{kClarificationText};
  ToolReply reply{build_tool_call(*parsed, ctx, cfg), {}};
  reply.assistant_text = "Calling " + reply.call.tool + " (grammar rule " + rule_letter(parsed->rule) + ").";
  return reply;
}

/// Final assistant message once the function response (achieved state) is in.
inline std::string mock_summarize(const ToolCall& call, const Json& achieved, const GranularityLabel& label) {
  std::ostringstream os;
  os << "The " << call.tool << " call " << call.call_id << " finished. The robot now reports " << achieved.dump()
     << ".";
  if (label.qualitative()) {
    os << " That was a small, conservative move; if you want to go further, tell me how far "
          "(for example in degrees, meters, m/s or seconds).";
  }
  return os.str();
}

/// Deterministic call ids: "mock_<n>" counting per backend instance.
class MockBackend {
 public:
  explicit MockBackend(MockConfig cfg = {}) : cfg_(cfg) {}

  BackendReply complete(const std::string& prompt, const TurnContext& ctx) {
    auto reply = mock_complete(prompt, ctx, cfg_);
    if (auto* t = std::get_if<ToolReply>(&reply)) t->call.call_id = "mock_" + std::to_string(++calls_);
    return reply;
  }

  const MockConfig& config() const { return cfg_; }

 private:
  MockConfig cfg_;
  std::uint64_t calls_ = 0;
};

}  // namespace linguomotor::bridge
