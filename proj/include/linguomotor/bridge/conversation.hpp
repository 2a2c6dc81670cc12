#pragma once

#include <functional>
#include <vector>

#include "linguomotor/bridge/backend.hpp"
#include "linguomotor/bridge/dispatcher.hpp"
#include "linguomotor/bridge/safety_clamp.hpp"
#include "linguomotor/core/session_event.hpp"

namespace linguomotor::bridge {

/// Monotonic milliseconds for event timestamps.
using EventClock = std::function<std::int64_t()>;

/// One session's prompt loop: prompt -> backend -> clamp -> robot -> backend.
/// Turns are strictly sequential; cancel() may be called from any thread.
class Conversation {
 public:
  Conversation(LanguageBackend& backend, RobotInterface& robot, EventClock clock, std::string session = "default",
               ClampBounds bounds = {})
      : backend_(backend), robot_(robot), clock_(std::move(clock)), session_(std::move(session)), bounds_(bounds) {
    history_.push_back(Json{{"role", "system"}, {"content", kSystemPrompt}});
  }

  /// Runs one prompt to completion. Every event is also handed to `sink`.
  std::vector<SessionEvent> run_turn(const std::string& prompt, const std::string& prompt_id,
                                     const std::function<void(const SessionEvent&)>& sink = {}) {
    std::vector<SessionEvent> events;
    auto emit = [&](EventKind kind, Json payload) {
      payload["prompt_id"] = prompt_id;
      SessionEvent e{now(), session_, kind, std::move(payload)};
      if (sink) sink(e);
      events.push_back(std::move(e));
    };
    auto fail = [&](const Error& e) { emit(EventKind::Error, error_payload(e)); };

    emit(EventKind::Prompt, {{"text", prompt}});
    const GranularityLabel label = classify_granularity(prompt);
    emit(EventKind::Granularity, to_json(label));

    if (robot_.estopped()) {
      fail(Error(ErrorCode::EStopEngaged, "prompt refused until the e-stop is reset"));
      return events;
    }

    TurnContext ctx = robot_.context();
    ctx.prompt_id = prompt_id;
    history_.push_back(user_message(prompt));

    BackendReply reply;
    try {
      reply = backend_.complete(history_, ctx);
    } catch (const Error& e) {
      fail(e);
      return events;
    }

    if (const auto* c = std::get_if<Clarification>(&reply)) {
      history_.push_back(assistant_message(c->text));
      emit(EventKind::Clarification, {{"text", c->text}});
      return events;
    }
    if (const auto* r = std::get_if<Refusal>(&reply)) {
      fail(Error(r->reason, r->detail));
      return events;
    }

    const ToolCall requested = std::get<ToolReply>(reply).call;
    ClampResult limited;
    try {
      ToolRegistry::standard().validate(requested.tool, requested.arguments);
      limited = clamp_qualitative(requested, label, ctx, bounds_);
      robot_.check(limited.call);
    } catch (const Error& e) {
      fail(e);
      return events;
    }

    const ToolCall& call = limited.call;
    Json achieved;
    try {
      achieved = robot_.dispatch(call, [&](std::uint64_t tick) {
        Json payload{{"call", to_json(call)}, {"clamped", limited.clamped}, {"tick", tick}};
        if (limited.clamped) payload["requested"] = requested.arguments;
        history_.push_back(assistant_tool_call_message(call));
        emit(EventKind::ToolCall, std::move(payload));
      });
    } catch (const Error& e) {
      // A call the robot never accepted leaves no trace in the history.
      if (!history_.empty() && history_.back().contains("tool_calls")) {
        history_.push_back(tool_result_message(call.call_id, {{"error", error_payload(e)}}));
      }
      fail(e);
      return events;
    }
    history_.push_back(tool_result_message(call.call_id, achieved));
    emit(EventKind::ToolResult, {{"call_id", call.call_id}, {"tool", call.tool}, {"achieved", achieved}});

    try {
      const std::string text = backend_.respond_to_result(history_, call, achieved, label);
      history_.push_back(assistant_message(text));
      emit(EventKind::Assistant, {{"text", text}});
    } catch (const Error& e) {
      fail(e);
    }
    return events;
  }

  /// E-stop path: aborts an in-flight backend call.
  void cancel() { backend_.cancel(); }
  void clear_cancel() { backend_.clear_cancel(); }

  const Messages& history() const { return history_; }
  const std::string& session() const { return session_; }

 private:
  std::int64_t now() {
    last_ts_ = std::max(last_ts_, clock_());
    return last_ts_;
  }

  LanguageBackend& backend_;
  RobotInterface& robot_;
  EventClock clock_;
  std::string session_;
  ClampBounds bounds_;
  Messages history_;
  std::int64_t last_ts_ = 0;
};

}  // namespace linguomotor::bridge
