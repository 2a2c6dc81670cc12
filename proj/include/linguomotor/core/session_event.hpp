#pragma once

#include <cstdint>
#include <string>

#include "linguomotor/core/json.hpp"

namespace linguomotor {

enum class EventKind { Prompt, Granularity, ToolCall, ToolResult, Assistant, Clarification, State, EStop, Error };

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Prompt: return "prompt";
    case EventKind::Granularity: return "granularity";
    case EventKind::ToolCall: return "tool_call";
    case EventKind::ToolResult: return "tool_result";
    case EventKind::Assistant: return "assistant";
    case EventKind::Clarification: return "clarification";
    case EventKind::State: return "state";
    case EventKind::EStop: return "estop";
    case EventKind::Error: return "error";
  }
  return "unknown";
}

inline EventKind event_kind_from_string(const std::string& s) {
  for (auto k : {EventKind::Prompt, EventKind::Granularity, EventKind::ToolCall, EventKind::ToolResult,
                 EventKind::Assistant, EventKind::Clarification, EventKind::State, EventKind::EStop,
                 EventKind::Error}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidValue, "unknown event kind '" + s + "'");
}

/// One observable step of a session. Payload keys per kind:
///   prompt         {prompt_id, text}
///   granularity    {prompt_id, label, quantities}
///   tool_call      {prompt_id, call, clamped[, requested]}
///   tool_result    {prompt_id, call_id, tool, achieved}
///   assistant      {prompt_id, text}
///   clarification  {prompt_id, text}
///   state          {robot, reset, ...robot state}
///   estop          {engaged}
///   error          {code, detail[, prompt_id]}
struct SessionEvent {
  std::int64_t ts_ms = 0;
  std::string session = "default";
  EventKind kind = EventKind::Prompt;
  Json payload = Json::object();

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

namespace detail {

inline void require_keys(const Json& p, std::initializer_list<const char*> keys, EventKind kind) {
  for (const char* k : keys) {
    if (!p.contains(k)) {
      throw Error(ErrorCode::InvalidValue, to_string(kind) + " event payload lacks '" + std::string(k) + "'");
    }
  }
}

}  // namespace detail

/// Checks that the payload has the keys its kind requires.
inline void validate_event(const SessionEvent& e) {
  if (!e.payload.is_object()) throw Error(ErrorCode::InvalidValue, "event payload must be an object");
  switch (e.kind) {
    case EventKind::Prompt: detail::require_keys(e.payload, {"prompt_id", "text"}, e.kind); break;
    case EventKind::Granularity: detail::require_keys(e.payload, {"prompt_id", "label", "quantities"}, e.kind); break;
    case EventKind::ToolCall: detail::require_keys(e.payload, {"prompt_id", "call", "clamped"}, e.kind); break;
    case EventKind::ToolResult: detail::require_keys(e.payload, {"prompt_id", "call_id", "tool", "achieved"}, e.kind); break;
    case EventKind::Assistant:
    case EventKind::Clarification: detail::require_keys(e.payload, {"prompt_id", "text"}, e.kind); break;
    case EventKind::State: detail::require_keys(e.payload, {"robot", "reset"}, e.kind); break;
    case EventKind::EStop: detail::require_keys(e.payload, {"engaged"}, e.kind); break;
    case EventKind::Error: detail::require_keys(e.payload, {"code", "detail"}, e.kind); break;
  }
}

inline Json to_json(const SessionEvent& e) {
  return Json{{"ts_ms", e.ts_ms}, {"session", e.session}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

inline SessionEvent session_event_from_json(const Json& j) {
  SessionEvent e;
  try {
    e.ts_ms = j.at("ts_ms").get<std::int64_t>();
    e.session = j.at("session").get<std::string>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.payload = j.at("payload");
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::InvalidValue, ex.what());
  }
  validate_event(e);
  return e;
}

inline Json error_payload(const Error& e) { return Json{{"code", std::string(to_string(e.code()))}, {"detail", e.detail()}}; }

}  // namespace linguomotor
