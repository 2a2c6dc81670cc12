#pragma once

#include <map>
#include <optional>

#include "linguomotor/bridge/dispatcher.hpp"
#include "linguomotor/gateway/trace.hpp"

namespace linguomotor::gateway {

/// State-event payloads. Replay applies the ones marked reset.
inline Json arm_reset_payload(const sim::ArmState& arm) {
  return Json{{"robot", "arm"}, {"reset", true}, {"joints", to_json(arm.joints)}, {"pose", to_json(arm.pose)}};
}

inline Json base_reset_payload(const BasePose2D& pose) {
  return Json{{"robot", "base"}, {"reset", true}, {"pose", to_json(pose)}};
}

/// Applies a state event to the sim. Returns false for non-reset events.
inline bool apply_state_event(sim::RobotSim& sim, const Json& p) {
  if (!p.value("reset", false)) return false;
  const std::string robot = p.at("robot").get<std::string>();
  if (robot == "arm") {
    std::optional<ArmPose> pose;
    if (p.contains("pose")) pose = arm_pose_from_json(p.at("pose"));
    sim.reset_arm(joint_vector_from_json(p.at("joints")), pose);
  } else if (robot == "base") {
    sim.reset_base(base_pose_from_json(p.at("pose")));
  } else {
    throw Error(ErrorCode::InvalidValue, "unknown robot '" + robot + "'");
  }
  return true;
}

struct ReplayResult {
  sim::SimSnapshot final;
  std::map<std::string, sim::SimSnapshot> after;  // by prompt id, once its motion ended
  std::size_t dispatched = 0;
  std::vector<std::string> warnings;
};

/// Re-dispatches recorded tool calls against a fresh simulator, bypassing
/// any backend. An e-stop recorded mid-motion is applied after the same
/// number of ticks it interrupted in the live run.
inline ReplayResult replay_events(const std::vector<SessionEvent>& events, sim::SimConfig cfg = {}) {
  for (const auto& e : events) {
    if (e.kind == EventKind::State && e.payload.contains("tick_hz")) {
      cfg.tick_hz = e.payload.at("tick_hz").get<double>();
      break;
    }
  }
  bus::TopicBus bus;
  sim::RobotSim robot(cfg, &bus);
  bridge::BusRobot iface(robot, bus, bridge::TimeMode::Virtual);
  ReplayResult out;

  struct Pending {
    std::uint64_t live_tick;
    std::uint64_t replay_tick;
    std::string prompt_id;
  };
  std::optional<Pending> pending;
  auto settle = [&] {
    if (pending && !pending->prompt_id.empty()) out.after[pending->prompt_id] = robot.snapshot();
    pending.reset();
  };
  auto finish = [&] {
    if (pending) robot.run_until_idle();
    settle();
  };

  std::size_t index = 0;
  for (const auto& e : events) {
    ++index;
    try {
      switch (e.kind) {
        case EventKind::State:
          if (e.payload.value("reset", false)) {
            finish();
            apply_state_event(robot, e.payload);
          }
          break;
        case EventKind::ToolCall: {
          finish();
          const auto call = bridge::tool_call_from_json(e.payload.at("call"));
          bridge::ToolRegistry::standard().validate(call.tool, call.arguments);
          std::uint64_t accepted = robot.snapshot().ticks;
          try {
            accepted = iface.send(call);
          } catch (const Error& err) {
            if (err.code() == ErrorCode::InvalidAction) throw;
            out.warnings.push_back("event " + std::to_string(index) + ": " + err.what());
          }
          ++out.dispatched;
          pending = Pending{e.payload.value("tick", std::uint64_t{0}), accepted, call.prompt_id};
          break;
        }
        case EventKind::EStop:
          if (e.payload.at("engaged").get<bool>()) {
            if (pending && e.payload.contains("tick")) {
              const auto at = e.payload.at("tick").get<std::uint64_t>();
              const auto ran = robot.snapshot().ticks - pending->replay_tick;
              const auto want = at >= pending->live_tick ? at - pending->live_tick : 0;
              if (want > ran) robot.tick(want - ran);
              robot.engage_estop();
              settle();
            } else {
              finish();
              robot.engage_estop();
            }
          } else {
            finish();
            robot.reset_estop();
          }
          break;
        default:
          break;
      }
    } catch (const Error& err) {
      throw Error(ErrorCode::TraceMalformed, "event " + std::to_string(index) + ": " + err.what());
    } catch (const Json::exception& err) {
      throw Error(ErrorCode::TraceMalformed, "event " + std::to_string(index) + ": " + err.what());
    }
  }
  finish();
  out.final = robot.snapshot();
  return out;
}

inline ReplayResult replay_trace(const std::filesystem::path& path, sim::SimConfig cfg = {}) {
  auto file = read_trace(path);
  auto out = replay_events(file.events, std::move(cfg));
  out.warnings.insert(out.warnings.begin(), file.warnings.begin(), file.warnings.end());
  return out;
}

}  // namespace linguomotor::gateway
