#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <thread>

#include "linguomotor/bridge/conversation.hpp"
#include "linguomotor/bus/tcp_bridge.hpp"
#include "linguomotor/gateway/config.hpp"
#include "linguomotor/gateway/event_hub.hpp"
#include "linguomotor/gateway/replay.hpp"
#include "linguomotor/gateway/trace.hpp"

namespace linguomotor::gateway {

using BackendFactory = std::function<std::unique_ptr<bridge::LanguageBackend>()>;

inline BackendFactory backend_factory(const GatewayConfig& cfg) {
  if (cfg.backend == "remote") {
    const auto remote = cfg.remote_config();
    return [remote] { return std::make_unique<bridge::RemoteBackend>(remote); };
  }
  const auto mock = cfg.mock;
  return [mock] { return std::make_unique<bridge::MockLanguageBackend>(mock); };
}

/// Events emitted outside any conversation (resets, e-stop, bus rejections).
inline constexpr const char* kSystemSession = "system";

/// Composition root: owns the bus, the simulator, one conversation per
/// session, the event log, the trace file and (in wall time) the tick loop.
///
/// Turns are serialized; estop_all() bypasses that queue and may be called
/// from any thread while a turn is in flight.
class Gateway {
 public:
  explicit Gateway(GatewayConfig cfg, bridge::TimeMode mode = bridge::TimeMode::Virtual,
                   BackendFactory factory = nullptr)
      : cfg_((cfg.validate(), std::move(cfg))),
        mode_(mode),
        factory_(factory ? std::move(factory) : backend_factory(cfg_)),
        sim_(cfg_.sim, &bus_),
        robot_(sim_, bus_, mode),
        start_(std::chrono::steady_clock::now()) {
    robot_.enable(cfg_.has_arm(), cfg_.has_base());
    if (!cfg_.trace_path.empty()) trace_.open(cfg_.trace_path);
    const auto s = sim_.snapshot();
    Json arm = arm_reset_payload(s.arm);
    arm["tick_hz"] = cfg_.tick_hz;
    record(system_event(EventKind::State, std::move(arm)));
    record(system_event(EventKind::State, base_reset_payload(s.base.pose)));
    if (cfg_.bus_port > 0) {
      tcp_ = std::make_unique<bus::TcpBridgeServer>(bus_);
      tcp_->start(static_cast<std::uint16_t>(cfg_.bus_port));
    }
    if (mode_ == bridge::TimeMode::Wall) ticker_ = std::thread([this] { tick_loop(); });
  }

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  ~Gateway() { shutdown(); }

  /// Stops the tick loop and the bus bridge and closes the trace.
  void shutdown() {
    running_ = false;
    if (ticker_.joinable()) ticker_.join();
    if (tcp_) tcp_->stop();
    hub_.close_all();
    trace_.close();
  }

  /// Runs one prompt to completion. An empty prompt id is numbered p1, p2, ...
  std::vector<SessionEvent> prompt(const std::string& text, const std::string& session = "default",
                                   std::string prompt_id = {}) {
    std::lock_guard turn(turn_mutex_);
    if (prompt_id.empty()) prompt_id = "p" + std::to_string(++prompt_count_);
    auto& conv = conversation(session);
    return conv.run_turn(text, prompt_id, [this](const SessionEvent& e) { record(e); });
  }

  void reset_arm(const JointVector& joints, std::optional<ArmPose> pose = std::nullopt) {
    std::lock_guard turn(turn_mutex_);
    sim_.reset_arm(joints, pose);
    record(system_event(EventKind::State, arm_reset_payload(sim_.arm_state())));
  }

  void reset_base(const BasePose2D& pose) {
    std::lock_guard turn(turn_mutex_);
    sim_.reset_base(pose);
    record(system_event(EventKind::State, base_reset_payload(sim_.base_state().pose)));
  }

  /// Priority path: freezes both robots and aborts in-flight backend calls.
  void estop_all() {
    const auto tick = sim_.engage_estop();
    {
      std::lock_guard lock(sessions_mutex_);
      for (auto& [name, s] : sessions_) s.conversation->cancel();
    }
    record(system_event(EventKind::EStop, {{"engaged", true}, {"tick", tick}}));
  }

  void reset_estop() {
    std::lock_guard turn(turn_mutex_);
    sim_.reset_estop();
    {
      std::lock_guard lock(sessions_mutex_);
      for (auto& [name, s] : sessions_) s.conversation->clear_cancel();
    }
    record(system_event(EventKind::EStop, {{"engaged", false}, {"tick", sim_.snapshot().ticks}}));
  }

  /// {"arm":{"joints","pose"},"base":{"x","y","theta_deg"},"estop"}
  Json state_json() const {
    const auto s = sim_.snapshot();
    return Json{{"arm", {{"joints", to_json(s.arm.joints)}, {"pose", to_json(s.arm.pose)}}},
                {"base", {{"x", s.base.pose.x()}, {"y", s.base.pose.y()}, {"theta_deg", s.base.pose.theta_deg()}}},
                {"estop", s.estop}};
  }

  std::vector<SessionEvent> events() const {
    std::lock_guard lock(log_mutex_);
    return log_;
  }

  /// Events with errors, per session, since construction.
  std::size_t error_count() const {
    std::lock_guard lock(log_mutex_);
    return static_cast<std::size_t>(
        std::count_if(log_.begin(), log_.end(), [](const SessionEvent& e) { return e.kind == EventKind::Error; }));
  }

  EventHub& hub() { return hub_; }
  sim::RobotSim& sim() { return sim_; }
  bus::TopicBus& bus() { return bus_; }
  const GatewayConfig& config() const { return cfg_; }
  bridge::TimeMode mode() const { return mode_; }
  std::uint16_t bus_port() const { return tcp_ ? tcp_->port() : 0; }

  /// Monotonic ms: simulated time in virtual mode, wall time otherwise.
  std::int64_t now_ms() const {
    if (mode_ == bridge::TimeMode::Virtual) {
      return static_cast<std::int64_t>(static_cast<double>(sim_.snapshot().ticks) * 1000.0 / cfg_.tick_hz);
    }
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  struct Session {
    std::unique_ptr<bridge::LanguageBackend> backend;
    std::unique_ptr<bridge::Conversation> conversation;
  };

  bridge::Conversation& conversation(const std::string& name) {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(name);
    if (it == sessions_.end()) {
      Session s;
      s.backend = factory_();
      s.conversation = std::make_unique<bridge::Conversation>(
          *s.backend, robot_, [this] { return now_ms(); }, name, cfg_.safety);
      if (sim_.estop_engaged()) s.conversation->cancel();
      it = sessions_.emplace(name, std::move(s)).first;
    }
    return *it->second.conversation;
  }

  SessionEvent system_event(EventKind kind, Json payload) const {
    return SessionEvent{now_ms(), kSystemSession, kind, std::move(payload)};
  }

  void record(const SessionEvent& e) {
    {
      std::lock_guard lock(log_mutex_);
      log_.push_back(e);
      trace_.append(e);
    }
    hub_.publish(e);
  }

  void tick_loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / cfg_.tick_hz));
    auto next = clock::now();
    while (running_) {
      next += period;
      std::this_thread::sleep_until(next);
      for (const auto& r : sim_.process_commands()) {
        Json p = error_payload(Error(r.code, r.detail));
        p["topic"] = r.topic.str();
        record(system_event(EventKind::Error, std::move(p)));
      }
      sim_.tick();
    }
  }

  GatewayConfig cfg_;
  bridge::TimeMode mode_;
  BackendFactory factory_;
  bus::TopicBus bus_;
  sim::RobotSim sim_;
  bridge::BusRobot robot_;
  std::chrono::steady_clock::time_point start_;

  std::mutex turn_mutex_;
  std::mutex sessions_mutex_;
  std::map<std::string, Session> sessions_;
  std::uint64_t prompt_count_ = 0;

  mutable std::mutex log_mutex_;
  std::vector<SessionEvent> log_;
  TraceWriter trace_;
  EventHub hub_;

  std::unique_ptr<bus::TcpBridgeServer> tcp_;
  std::atomic<bool> running_{true};
  std::thread ticker_;
};

}  // namespace linguomotor::gateway
