#pragma once

#include <iostream>

#include "linguomotor/gateway/gateway.hpp"

namespace linguomotor::gateway {

inline constexpr const char* kReplPrompt = "> Enter prompt: ";

/// One transcript line per event, in the style of a ROS console log.
inline std::string format_event(const SessionEvent& e) {
  const Json& p = e.payload;
  switch (e.kind) {
    case EventKind::Prompt: return "[prompt " + p.value("prompt_id", "") + "] " + p.value("text", "");
    case EventKind::Granularity: {
      std::string s = "[granularity] " + p.value("label", "");
      for (const auto& q : p.at("quantities")) {
        s += " " + q.at("kind").get<std::string>() + "=" + q.at("value").dump() + q.at("unit").get<std::string>();
      }
      return s;
    }
    case EventKind::ToolCall: {
      const Json& call = p.at("call");
      std::string s = "Calling function " + call.value("tool", "") + " with arguments " + call.at("arguments").dump();
      if (p.value("clamped", false)) s += " (clamped from " + p.at("requested").dump() + ")";
      return s;
    }
    case EventKind::ToolResult: return "Function response: " + p.at("achieved").dump();
    case EventKind::Assistant:
    case EventKind::Clarification: return "Response message: " + p.value("text", "");
    case EventKind::State: return "[state] " + p.dump();
    case EventKind::EStop: return std::string("[estop] ") + (p.value("engaged", false) ? "engaged" : "released");
    case EventKind::Error: return "[error] " + p.value("code", "") + ": " + p.value("detail", "");
  }
  return p.dump();
}

/// Reads prompts until end of input or "quit". Blank lines just re-prompt.
inline void run_repl(Gateway& gw, std::istream& in, std::ostream& out, const std::string& session = "default") {
  std::string line;
  while (true) {
    out << kReplPrompt << std::flush;
    if (!std::getline(in, line)) break;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    if (line == "quit" || line == "exit") break;
    for (const auto& e : gw.prompt(line, session)) {
      if (e.kind == EventKind::Prompt) continue;
      out << format_event(e) << '\n';
    }
  }
  out << '\n';
}

}  // namespace linguomotor::gateway
