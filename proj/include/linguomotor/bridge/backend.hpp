#pragma once

#include <vector>

#include "linguomotor/bridge/mock_backend.hpp"

namespace linguomotor::bridge {

/// Conversation messages use the chat-completions shape: {"role", "content",
/// optional "tool_calls" / "tool_call_id"}.
using Messages = std::vector<Json>;

inline Json user_message(const std::string& text) { return Json{{"role", "user"}, {"content", text}}; }

inline Json assistant_message(const std::string& text) { return Json{{"role", "assistant"}, {"content", text}}; }

inline Json assistant_tool_call_message(const ToolCall& call) {
  return Json{{"role", "assistant"},
              {"content", nullptr},
              {"tool_calls",
               Json::array({{{"id", call.call_id},
                             {"type", "function"},
                             {"function", {{"name", call.tool}, {"arguments", call.arguments.dump()}}}}})}};
}

inline Json tool_result_message(const std::string& call_id, const Json& result) {
  return Json{{"role", "tool"}, {"tool_call_id", call_id}, {"content", result.dump()}};
}

inline const std::string kSystemPrompt =
    "You control robots through tools. The arm is a 7-joint manipulator with joints right_j0..right_j6 "
    "(radians); move_arm_to_joint_positions takes absolute angles for all seven joints. approach_pose moves "
    "the end-effector to a position in meters with a unit quaternion orientation. drive moves the mobile base "
    "with forward speed v_x (m/s), yaw rate omega (rad/s) for duration seconds. Call exactly one tool per "
    "request, or ask the user to quantify the request if it is too vague.";

class LanguageBackend {
 public:
  virtual ~LanguageBackend() = default;

  virtual BackendSource source() const = 0;

  /// Replies to the conversation whose last message is the user's prompt.
  virtual BackendReply complete(const Messages& messages, const TurnContext& ctx) = 0;

  /// Closing assistant message once the function response has been appended.
  virtual std::string respond_to_result(const Messages& messages, const ToolCall& call, const Json& achieved,
                                        const GranularityLabel& label) = 0;

  /// Aborts an in-flight call (e-stop path). Safe from any thread.
  virtual void cancel() {}
  virtual void clear_cancel() {}
};

class MockLanguageBackend final : public LanguageBackend {
 public:
  explicit MockLanguageBackend(MockConfig cfg = {}) : mock_(cfg) {}

  BackendSource source() const override { return BackendSource::Mock; }

  BackendReply complete(const Messages& messages, const TurnContext& ctx) override {
    std::string prompt;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
      if (it->value("role", "") == "user") {
        prompt = it->at("content").get<std::string>();
        break;
      }
    }
    return mock_.complete(prompt, ctx);
  }

  std::string respond_to_result(const Messages&, const ToolCall& call, const Json& achieved,
                                const GranularityLabel& label) override {
    return mock_summarize(call, achieved, label);
  }

 private:
  MockBackend mock_;
};

}  // namespace linguomotor::bridge
