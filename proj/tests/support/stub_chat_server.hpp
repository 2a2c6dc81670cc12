#pragma once

// Local chat-completions stand-in: replies with queued bodies in order and
// records every request it receives.

#include <deque>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "linguomotor/core/json.hpp"

namespace linguomotor::testing {

class StubChatServer {
 public:
  StubChatServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      requests_.push_back(Json::parse(req.body));
      if (req.has_header("Authorization")) auth_ = req.get_header_value("Authorization");
      if (replies_.empty()) {
        res.status = 500;
        res.set_content("{\"error\":\"no reply queued\"}", "application/json");
        return;
      }
      auto [status, body] = replies_.front();
      replies_.pop_front();
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubChatServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  void push(std::string body, int status = 200) {
    std::lock_guard lock(mutex_);
    replies_.emplace_back(status, std::move(body));
  }

  /// A reply carrying one tool call with `arguments` as a JSON string.
  void push_tool_call(const std::string& id, const std::string& name, const std::string& arguments) {
    Json call{{"id", id}, {"type", "function"}, {"function", {{"name", name}, {"arguments", arguments}}}};
    push(Json{{"choices", Json::array({{{"index", 0},
                                        {"message", {{"role", "assistant"}, {"content", nullptr},
                                                     {"tool_calls", Json::array({call})}}}}})}}
             .dump());
  }

  void push_text(const std::string& text) {
    push(Json{{"choices", Json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", text}}}}})}}
             .dump());
  }

  std::vector<Json> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

  std::string authorization() const {
    std::lock_guard lock(mutex_);
    return auth_;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mutex_;
  std::deque<std::pair<int, std::string>> replies_;
  std::vector<Json> requests_;
  std::string auth_;
};

// Tool-call argument strings as the remote model emitted them in the recorded
// sessions.
inline const std::string kRecordedZeroJointsArgs =
    R"({"joint_positions":{"right_j0":0,"right_j1":0,"right_j2":0,"right_j3":0,"right_j4":0,"right_j5":0,"right_j6":0}})";
inline const std::string kRecordedPoseArgs =
    R"({"position_x":0.46,"position_y":0.15,"position_z":0.5,"orientation_w":1,"orientation_x":0,"orientation_y":0,"orientation_z":0})";

}  // namespace linguomotor::testing
