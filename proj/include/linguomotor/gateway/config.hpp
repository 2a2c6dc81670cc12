#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <toml.hpp>

#include "linguomotor/bridge/mock_backend.hpp"
#include "linguomotor/bridge/remote_backend.hpp"
#include "linguomotor/bridge/safety_clamp.hpp"
#include "linguomotor/sim/robot_sim.hpp"

namespace linguomotor::gateway {

struct RemoteSection {
  std::string base_url;
  std::string model;
  int timeout_s = 60;
};

/// Everything `serve`, `repl`, `run` and `replay` need. The TOML file uses
/// these field names; sub-structs are tables ([remote], [safety], [sim], [mock]).
struct GatewayConfig {
  std::string backend = "mock";
  RemoteSection remote;
  std::set<std::string> robots{"arm", "base"};
  double tick_hz = 100.0;
  int http_port = 8080;
  int bus_port = 0;  // TCP bus bridge; 0 = off
  std::string trace_path;
  std::string fixture_path;
  bridge::ClampBounds safety;
  sim::SimConfig sim;
  bridge::MockConfig mock;

  bool has_arm() const { return robots.contains("arm"); }
  bool has_base() const { return robots.contains("base"); }

  /// Copies tick_hz into the sim config and checks cross-field rules.
  void validate() {
    if (backend != "mock" && backend != "remote") throw Error(ErrorCode::ConfigError, "backend must be mock or remote");
    if (backend == "remote") {
      if (remote.base_url.empty()) throw Error(ErrorCode::ConfigError, "remote backend needs remote.base_url");
      if (remote.model.empty()) throw Error(ErrorCode::ConfigError, "remote backend needs remote.model");
    }
    for (const auto& r : robots) {
      if (r != "arm" && r != "base") throw Error(ErrorCode::ConfigError, "unknown robot '" + r + "'");
    }
    if (http_port < 0 || http_port > 65535) throw Error(ErrorCode::ConfigError, "http_port out of range");
    if (bus_port < 0 || bus_port > 65535) throw Error(ErrorCode::ConfigError, "bus_port out of range");
    if (!(safety.max_joint_delta > 0 && safety.max_translation > 0 && safety.max_speed > 0 &&
          safety.max_duration > 0)) {
      throw Error(ErrorCode::ConfigError, "safety bounds must be positive");
    }
    sim.tick_hz = tick_hz;
    sim.validate();
  }

  bridge::RemoteConfig remote_config() const {
    return {remote.base_url, remote.model, bridge::RemoteConfig::api_key_from_env(), remote.timeout_s};
  }
};

namespace detail {

template <typename T>
void read(const toml::table& t, std::string_view key, T& out) {
  const auto* node = t.get(key);
  if (!node) return;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->value<bool>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = node->value<std::int64_t>()) {
      out = static_cast<T>(*v);
      return;
    }
  } else {
    if (auto v = node->value<std::string>()) {
      out = *v;
      return;
    }
  }
  throw Error(ErrorCode::ConfigError, "'" + std::string(key) + "' has the wrong type");
}

inline const toml::table* table(const toml::table& t, std::string_view key) {
  const auto* node = t.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw Error(ErrorCode::ConfigError, "'" + std::string(key) + "' must be a table");
  return node->as_table();
}

}  // namespace detail

inline GatewayConfig parse_config(std::string_view text, const std::string& source = "config") {
  toml::table t;
  try {
    t = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string(e.description()));
  }
  GatewayConfig c;
  using detail::read;
  read(t, "backend", c.backend);
  read(t, "tick_hz", c.tick_hz);
  read(t, "http_port", c.http_port);
  read(t, "bus_port", c.bus_port);
  read(t, "trace_path", c.trace_path);
  read(t, "fixture_path", c.fixture_path);
  if (const auto* robots = t.get("robots")) {
    const auto* arr = robots->as_array();
    if (!arr) throw Error(ErrorCode::ConfigError, "robots must be an array");
    c.robots.clear();
    for (const auto& r : *arr) {
      auto v = r.value<std::string>();
      if (!v) throw Error(ErrorCode::ConfigError, "robots entries must be strings");
      c.robots.insert(*v);
    }
  }
  if (const auto* r = detail::table(t, "remote")) {
    read(*r, "base_url", c.remote.base_url);
    read(*r, "model", c.remote.model);
    read(*r, "timeout_s", c.remote.timeout_s);
  }
  if (const auto* s = detail::table(t, "safety")) {
    read(*s, "max_joint_delta", c.safety.max_joint_delta);
    read(*s, "max_translation", c.safety.max_translation);
    read(*s, "max_speed", c.safety.max_speed);
    read(*s, "max_duration", c.safety.max_duration);
  }
  if (const auto* s = detail::table(t, "sim")) {
    read(*s, "joint_speed_max", c.sim.joint_speed_max);
    read(*s, "pose_speed_max", c.sim.pose_speed_max);
    read(*s, "workspace_radius", c.sim.workspace_radius);
    read(*s, "state_publish_every", c.sim.state_publish_every);
    if (s->contains("joint_limit")) {
      double limit = 0;
      read(*s, "joint_limit", limit);
      c.sim.joint_limits = JointLimits::symmetric(limit);
    }
  }
  if (const auto* m = detail::table(t, "mock")) {
    read(*m, "qualitative_joint_step", c.mock.qualitative_joint_step);
    read(*m, "rotate_arm_step", c.mock.rotate_arm_step);
    read(*m, "qualitative_speed", c.mock.qualitative_speed);
    read(*m, "default_duration", c.mock.default_duration);
    read(*m, "timed_speed", c.mock.timed_speed);
    read(*m, "allow_turn_rate", c.mock.allow_turn_rate);
  }
  c.validate();
  return c;
}

inline GatewayConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace linguomotor::gateway
