#pragma once

#include <chrono>
#include <functional>
#include <thread>

#include "linguomotor/bridge/mock_backend.hpp"
#include "linguomotor/bridge/tool_call.hpp"
#include "linguomotor/sim/robot_sim.hpp"

namespace linguomotor::bridge {

/// What the conversation loop needs from the robots.
class RobotInterface {
 public:
  virtual ~RobotInterface() = default;

  virtual TurnContext context() const = 0;
  virtual bool estopped() const = 0;

  /// Throws (EStopEngaged, OutOfWorkspace, InvalidAction, ...) without side
  /// effects if `call` would be refused.
  virtual void check(const ToolCall& call) const = 0;

  /// Sends the call, waits for the motion to finish and returns the
  /// achieved state of the robot it moved. `on_sent` runs once the robot has
  /// accepted the command, with the sim tick at acceptance.
  virtual Json dispatch(const ToolCall& call, const std::function<void(std::uint64_t)>& on_sent = {}) = 0;
};

enum class TimeMode { Virtual, Wall };

/// Achieved-state payloads returned as the function response.
inline Json arm_joint_state(const sim::ArmState& arm) { return to_json(arm.joints); }

inline Json arm_pose_state(const sim::ArmState& arm) {
  const auto& p = arm.pose.position();
  return Json{{"position", {{"x", p.x}, {"y", p.y}, {"z", p.z}}}, {"orientation", to_json(arm.pose.orientation())}};
}

inline Json base_state(const sim::BaseState& base) { return to_odom_json(base.pose); }

/// Publishes tool calls on the command topics of a RobotSim.
///
/// Virtual time: the dispatcher ticks the sim itself, as fast as possible.
/// Wall time: someone else ticks the sim at tick_hz and dispatch() waits.
class BusRobot final : public RobotInterface {
 public:
  BusRobot(sim::RobotSim& sim, bus::TopicBus& bus, TimeMode mode = TimeMode::Virtual)
      : sim_(sim), bus_(bus), mode_(mode) {}

  TurnContext context() const override {
    const auto s = sim_.snapshot();
    TurnContext ctx;
    ctx.joints = s.arm.joints;
    ctx.orientation = s.arm.pose.orientation();
    ctx.position = s.arm.pose.position();
    ctx.base = s.base.pose;
    return ctx;
  }

  bool estopped() const override { return sim_.estop_engaged(); }

  void check(const ToolCall& call) const override {
    ToolRegistry::standard().validate(call.tool, call.arguments);
    if (!arm_ && call.tool != kDrive) throw Error(ErrorCode::InvalidAction, "the arm is not enabled");
    if (!base_ && call.tool == kDrive) throw Error(ErrorCode::InvalidAction, "the base is not enabled");
    std::visit(
        [&](const auto& cmd) {
          using T = std::decay_t<decltype(cmd)>;
          if constexpr (std::is_same_v<T, JointVector>) {
            sim_.check_joint_command(cmd.array());
          } else if constexpr (std::is_same_v<T, PoseTarget>) {
            sim_.check_pose_command(cmd.position, cmd.orientation);
          } else {
            sim_.check_velocity_command(cmd.v_x(), cmd.omega(), cmd.duration());
          }
        },
        to_command(call));
  }

  Json dispatch(const ToolCall& call, const std::function<void(std::uint64_t)>& on_sent = {}) override {
    check(call);
    const auto tick = send(call);
    if (on_sent) on_sent(tick);
    wait_idle();
    return achieved(call);
  }

  /// Publishes the command and hands it to the sim without running any
  /// ticks. Returns the tick at which the sim accepted it.
  std::uint64_t send(const ToolCall& call) {
    const RobotCommand cmd = to_command(call);
    if (const auto* joints = std::get_if<JointVector>(&cmd)) {
      if (!arm_) throw Error(ErrorCode::InvalidAction, "the arm is not enabled");
      bus_.publish(bus::topics::kJointCommand, to_json(*joints));
    } else if (const auto* pose = std::get_if<PoseTarget>(&cmd)) {
      if (!arm_) throw Error(ErrorCode::InvalidAction, "the arm is not enabled");
      bus_.publish(bus::topics::kPoseCommand, to_json(ArmPose(pose->position, pose->orientation)));
    } else {
      if (!base_) throw Error(ErrorCode::InvalidAction, "the base is not enabled");
      bus_.publish(bus::topics::kCmdVel, to_json(std::get<VelocityCommand>(cmd)));
    }
    const auto rejected = sim_.process_commands();
    if (!rejected.empty()) throw Error(rejected.front().code, rejected.front().detail);
    return sim_.last_accept_tick();
  }

  /// State of the robot `call` addressed.
  Json achieved(const ToolCall& call) const {
    const auto s = sim_.snapshot();
    if (call.tool == kMoveArmToJointPositions) return arm_joint_state(s.arm);
    if (call.tool == kApproachPose) return arm_pose_state(s.arm);
    return base_state(s.base);
  }

  void enable(bool arm, bool base) {
    arm_ = arm;
    base_ = base;
  }

  TimeMode mode() const { return mode_; }

 private:
  void wait_idle() {
    if (mode_ == TimeMode::Virtual) {
      sim_.run_until_idle();
      return;
    }
    while (!sim_.idle()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }

  sim::RobotSim& sim_;
  bus::TopicBus& bus_;
  TimeMode mode_;
  bool arm_ = true;
  bool base_ = true;
};

}  // namespace linguomotor::bridge
