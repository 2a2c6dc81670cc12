#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "linguomotor/bus/topic_bus.hpp"
#include "linguomotor/sim/kinematics.hpp"

namespace linguomotor::sim {

struct SimConfig {
  double tick_hz = 100.0;
  double joint_speed_max = 0.5;   // rad/s per joint
  double pose_speed_max = 0.2;    // m/s, end-effector
  double workspace_radius = 1.26; // m, sphere around the arm base
  JointLimits joint_limits{};
  int state_publish_every = 10;   // ticks between progress publications while moving

  void validate() const {
    if (!(tick_hz > 0 && joint_speed_max > 0 && pose_speed_max > 0 && workspace_radius > 0 &&
          state_publish_every > 0)) {
      throw Error(ErrorCode::ConfigError, "simulator settings must all be positive");
    }
  }
};

struct ArmState {
  JointVector joints{};
  ArmPose pose{};
  bool moving = false;

  friend bool operator==(const ArmState&, const ArmState&) = default;
};

/// Pose the arm starts in: the pick-and-place start pose from the pose-control
/// transcript, which is inside the default workspace.
inline ArmPose default_arm_pose() {
  return ArmPose({0.4578401920064491, 0.14787791310299833, 0.01984605114117996},
                 {-0.01205243584035103, 0.9998321327330238, -0.005691827679074961, 0.012571723927897335});
}

struct BaseState {
  BasePose2D pose{};
  std::optional<VelocityCommand> active_command;
  double command_elapsed = 0.0;

  friend bool operator==(const BaseState&, const BaseState&) = default;
};

struct SimSnapshot {
  ArmState arm;
  BaseState base;
  bool estop = false;
  std::uint64_t ticks = 0;

  double sim_time(double tick_hz) const { return static_cast<double>(ticks) / tick_hz; }
  friend bool operator==(const SimSnapshot&, const SimSnapshot&) = default;
};

/// A command the simulator refused while draining its command topics.
struct Rejection {
  bus::TopicName topic;
  ErrorCode code;
  std::string detail;
};

/// Deterministic desk-scale simulator: a 7-joint arm (joint or pose mode) and
/// a differential-drive base sharing one e-stop.
///
/// State changes only inside tick() (and the explicit reset/e-stop calls).
/// Commands queue FIFO per robot and run to completion; e-stop is the only
/// preemption and may be engaged from any thread.
class RobotSim {
 public:
  explicit RobotSim(SimConfig config = {}, bus::TopicBus* bus = nullptr) : config_(std::move(config)), bus_(bus) {
    config_.validate();
    arm_.pose = default_arm_pose();
    if (bus_) {
      bus::advertise_standard_topics(*bus_);
      joint_cmds_.emplace(bus_->subscribe(bus::topics::kJointCommand));
      pose_cmds_.emplace(bus_->subscribe(bus::topics::kPoseCommand));
      vel_cmds_.emplace(bus_->subscribe(bus::topics::kCmdVel));
      estop_msgs_.emplace(bus_->subscribe(bus::topics::kEStop));
      // Drop whatever was latched before we attached.
      joint_cmds_->drain();
      pose_cmds_->drain();
      vel_cmds_->drain();
      for (const auto& m : estop_msgs_->drain()) apply_estop_message(m);
      publish_arm();
      publish_base();
    }
  }

  const SimConfig& config() const { return config_; }

  // --- validation (no state change) ---------------------------------------

  void check_joint_command(const std::array<double, kJointCount>& target) const {
    std::lock_guard lock(mutex_);
    check_not_stopped();
    for (double v : target) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidCommand, "joint target is not finite");
    }
  }

  void check_pose_command(const Position3& position, const Quaternion& orientation) const {
    std::lock_guard lock(mutex_);
    check_not_stopped();
    check_pose_locked(position, orientation);
  }

  void check_velocity_command(double v_x, double omega, double duration) const {
    std::lock_guard lock(mutex_);
    check_not_stopped();
    (void)VelocityCommand{v_x, omega, duration};
  }

  // --- direct command API ---------------------------------------------------

  void command_joints(const std::array<double, kJointCount>& target) {
    check_joint_command(target);
    std::lock_guard lock(mutex_);
    arm_queue_.emplace_back(clamp_joints(JointVector(target), config_.joint_limits));
  }

  void command_joints(const JointVector& target) { command_joints(target.array()); }

  void command_pose(const ArmPose& target) {
    std::lock_guard lock(mutex_);
    check_not_stopped();
    check_pose_locked(target.position(), target.orientation());
    arm_queue_.emplace_back(target);
  }

  void command_velocity(const VelocityCommand& cmd) {
    std::lock_guard lock(mutex_);
    check_not_stopped();
    base_queue_.push_back(cmd);
  }

  // --- bus path ---------------------------------------------------------------

  /// Applies every command waiting on the command topics. Invalid or refused
  /// commands are returned rather than thrown.
  std::vector<Rejection> process_commands() {
    std::lock_guard lock(mutex_);
    return process_commands_locked();
  }

  /// Tick count when the most recent command was accepted into a queue.
  std::uint64_t last_accept_tick() const {
    std::lock_guard lock(mutex_);
    return accept_tick_;
  }

  // --- e-stop -------------------------------------------------------------------

  /// Returns the tick count at which motion froze.
  std::uint64_t engage_estop() {
    std::lock_guard lock(mutex_);
    engage_locked();
    publish_estop(true);
    return ticks_;
  }

  void reset_estop() {
    std::lock_guard lock(mutex_);
    estop_ = false;
    publish_estop(false);
  }

  bool estop_engaged() const {
    std::lock_guard lock(mutex_);
    return estop_;
  }

  // --- clock --------------------------------------------------------------------

  void tick(std::uint64_t n = 1) {
    std::lock_guard lock(mutex_);
    for (std::uint64_t i = 0; i < n; ++i) tick_locked();
  }

  /// Ticks until both robots are idle or `max_ticks` elapse. Returns ticks run.
  std::uint64_t run_until_idle(std::uint64_t max_ticks = 10'000'000) {
    std::lock_guard lock(mutex_);
    std::uint64_t n = 0;
    process_commands_locked();
    while (!idle_locked() && n < max_ticks) {
      tick_locked();
      ++n;
    }
    return n;
  }

  bool idle() const {
    std::lock_guard lock(mutex_);
    return idle_locked();
  }

  SimSnapshot snapshot() const {
    std::lock_guard lock(mutex_);
    return SimSnapshot{arm_, base_, estop_, ticks_};
  }

  ArmState arm_state() const { return snapshot().arm; }
  BaseState base_state() const { return snapshot().base; }

  // --- explicit state resets (scripts and replay) -------------------------------

  void reset_arm(const JointVector& joints, std::optional<ArmPose> pose = std::nullopt) {
    std::lock_guard lock(mutex_);
    arm_queue_.clear();
    arm_active_.reset();
    arm_.joints = clamp_joints(joints, config_.joint_limits);
    if (pose) {
      check_pose_locked(pose->position(), pose->orientation());
      arm_.pose = *pose;
    }
    arm_.moving = false;
    publish_arm();
  }

  void reset_arm_pose(const ArmPose& pose) { reset_arm(arm_state().joints, pose); }

  void reset_base(const BasePose2D& pose) {
    std::lock_guard lock(mutex_);
    base_queue_.clear();
    base_ = BaseState{pose, std::nullopt, 0.0};
    base_ticks_ = 0;
    publish_base();
  }

 private:
  using ArmCommand = std::variant<JointVector, ArmPose>;

  void check_not_stopped() const {
    if (estop_) throw Error(ErrorCode::EStopEngaged, "commands are refused until the e-stop is reset");
  }

  void check_pose_locked(const Position3& position, const Quaternion& orientation) const {
    normalize_quaternion(orientation);
    if (!(std::isfinite(position.x) && std::isfinite(position.y) && std::isfinite(position.z))) {
      throw Error(ErrorCode::InvalidCommand, "pose target is not finite");
    }
    if (position.norm() > config_.workspace_radius) {
      throw Error(ErrorCode::OutOfWorkspace, "target is " + std::to_string(position.norm()) +
                                                 " m from the base, radius is " +
                                                 std::to_string(config_.workspace_radius) + " m");
    }
  }

  bool idle_locked() const {
    return arm_queue_.empty() && !arm_active_ && base_queue_.empty() && !base_.active_command;
  }

  void engage_locked() {
    estop_ = true;
    arm_queue_.clear();
    arm_active_.reset();
    arm_.moving = false;
    base_queue_.clear();
    base_.active_command.reset();
    base_.command_elapsed = 0.0;
    base_ticks_ = 0;
    publish_arm();
    publish_base();
  }

  void apply_estop_message(const bus::BusMessage& m) {
    if (own_estop_seqs_.erase(m.seq) > 0) return;
    const bool engaged = m.payload.at("engaged").get<bool>();
    if (engaged && !estop_) {
      engage_locked();
    } else if (!engaged) {
      estop_ = false;
    }
  }

  std::vector<Rejection> process_commands_locked() {
    std::vector<Rejection> rejected;
    if (!bus_) return rejected;
    for (const auto& m : estop_msgs_->drain()) apply_estop_message(m);
    auto guarded = [&](const bus::BusMessage& m, auto&& apply) {
      try {
        check_not_stopped();
        apply(m.payload);
      } catch (const Error& e) {
        rejected.push_back({m.topic, e.code(), e.detail()});
      } catch (const Json::exception& e) {
        rejected.push_back({m.topic, ErrorCode::InvalidCommand, e.what()});
      }
    };
    for (const auto& m : joint_cmds_->drain()) {
      guarded(m, [&](const Json& p) {
        arm_queue_.emplace_back(clamp_joints(joint_vector_from_json(p), config_.joint_limits));
        accept_tick_ = ticks_;
      });
    }
    for (const auto& m : pose_cmds_->drain()) {
      guarded(m, [&](const Json& p) {
        Position3 pos{p.at("position_x").get<double>(), p.at("position_y").get<double>(),
                      p.at("position_z").get<double>()};
        Quaternion q = quaternion_from_json(p.at("orientation"));
        check_pose_locked(pos, q);
        arm_queue_.emplace_back(ArmPose(pos, q));
        accept_tick_ = ticks_;
      });
    }
    for (const auto& m : vel_cmds_->drain()) {
      guarded(m, [&](const Json& p) {
        base_queue_.push_back(velocity_command_from_json(p));
        accept_tick_ = ticks_;
      });
    }
    return rejected;
  }

  void tick_locked() {
    process_commands_locked();
    ++ticks_;
    if (estop_) return;
    const bool arm_done = step_arm();
    const bool base_done = step_base();
    const bool periodic = ticks_ % static_cast<std::uint64_t>(config_.state_publish_every) == 0;
    if (arm_done || (arm_.moving && periodic)) publish_arm();
    if (base_done || (base_.active_command && periodic)) publish_base();
  }

  // Returns true when a command completed during this tick.
  bool step_arm() {
    if (!arm_active_) {
      if (arm_queue_.empty()) return false;
      arm_active_ = std::move(arm_queue_.front());
      arm_queue_.pop_front();
      arm_.moving = true;
    }
    bool done = false;
    if (const auto* target = std::get_if<JointVector>(&*arm_active_)) {
      const double max_step = config_.joint_speed_max / config_.tick_hz;
      std::array<double, kJointCount> next = arm_.joints.array();
      done = true;
      for (std::size_t i = 0; i < kJointCount; ++i) {
        const double diff = (*target)[i] - next[i];
        if (std::abs(diff) <= max_step) {
          next[i] = (*target)[i];
        } else {
          next[i] += diff > 0 ? max_step : -max_step;
          done = false;
        }
      }
      arm_.joints = JointVector(next);
    } else {
      const auto& pose_target = std::get<ArmPose>(*arm_active_);
      const double max_step = config_.pose_speed_max / config_.tick_hz;
      const Position3 cur = arm_.pose.position();
      const Position3 goal = pose_target.position();
      const double remaining = distance(cur, goal);
      if (remaining <= max_step) {
        arm_.pose = pose_target;
        done = true;
      } else {
        const double f = max_step / remaining;
        Position3 next{cur.x + (goal.x - cur.x) * f, cur.y + (goal.y - cur.y) * f, cur.z + (goal.z - cur.z) * f};
        arm_.pose = ArmPose(next, arm_.pose.orientation());
      }
    }
    if (done) {
      arm_active_.reset();
      arm_.moving = !arm_queue_.empty();
    }
    return done;
  }

  bool step_base() {
    if (!base_.active_command) {
      if (base_queue_.empty()) return false;
      base_.active_command = base_queue_.front();
      base_queue_.pop_front();
      base_.command_elapsed = 0.0;
      base_ticks_ = 0;
    }
    const VelocityCommand& cmd = *base_.active_command;
    const double dt = 1.0 / config_.tick_hz;
    const double elapsed = static_cast<double>(base_ticks_) * dt;
    const double step = std::min(dt, cmd.duration() - elapsed);
    if (step > 0.0) {
      base_.pose = integrate_unicycle(base_.pose, cmd.v_x(), cmd.omega(), step);
      ++base_ticks_;
    }
    const double now = static_cast<double>(base_ticks_) * dt;
    if (step <= 0.0 || cmd.duration() - now <= 1e-12) {
      base_.active_command.reset();
      base_.command_elapsed = 0.0;
      base_ticks_ = 0;
      return true;
    }
    base_.command_elapsed = now;
    return false;
  }

  void publish_arm() {
    if (!bus_) return;
    bus_->publish(bus::topics::kJointStates, to_json(arm_.joints));
    bus_->publish(bus::topics::kArmPose, to_json(arm_.pose));
  }

  void publish_estop(bool engaged) {
    if (!bus_) return;
    own_estop_seqs_.insert(bus_->publish(bus::topics::kEStop, Json{{"engaged", engaged}}));
  }

  void publish_base() {
    if (!bus_) return;
    bus_->publish(bus::topics::kOdom, to_odom_json(base_.pose));
  }

  SimConfig config_;
  bus::TopicBus* bus_;
  mutable std::mutex mutex_;

  ArmState arm_{};
  std::deque<ArmCommand> arm_queue_;
  std::optional<ArmCommand> arm_active_;

  BaseState base_{};
  std::deque<VelocityCommand> base_queue_;
  std::uint64_t base_ticks_ = 0;

  bool estop_ = false;
  std::uint64_t ticks_ = 0;
  std::uint64_t accept_tick_ = 0;

  std::optional<bus::Subscription> joint_cmds_;
  std::optional<bus::Subscription> pose_cmds_;
  std::optional<bus::Subscription> vel_cmds_;
  std::optional<bus::Subscription> estop_msgs_;
  std::set<std::uint64_t> own_estop_seqs_;
};

}  // namespace linguomotor::sim
