#pragma once

// Chat-completions client: POST <base_url>/chat/completions with
// {model, messages, tools, tool_choice: "auto"} and read back
// choices[0].message.{content, tool_calls[0].function.{name, arguments}}.

#include <cstdlib>
#include <memory>
#include <mutex>

#include <httplib.h>

#include "linguomotor/bridge/backend.hpp"

namespace linguomotor::bridge {

inline constexpr const char* kApiKeyEnv = "LINGUOMOTOR_API_KEY";

struct RemoteConfig {
  std::string base_url;
  std::string model;
  std::string api_key;  // never logged
  int timeout_s = 60;

  static std::string api_key_from_env() {
    const char* v = std::getenv(kApiKeyEnv);
    return v ? std::string(v) : std::string();
  }
};

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix, no trailing slash
};

inline Endpoint split_base_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::ConfigError, "base_url needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

/// Parses a chat-completions response body. Tool arguments that are not JSON
/// or fail the tool schema yield a Refusal(InvalidAction); a body that is not
/// a chat-completions reply throws BackendProtocolError.
inline BackendReply parse_chat_reply(const std::string& body, const std::string& prompt_id,
                                     const std::string& fallback_call_id) {
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::BackendProtocolError, "reply is not JSON");
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty() ||
      !j["choices"][0].contains("message") || !j["choices"][0]["message"].is_object()) {
    throw Error(ErrorCode::BackendProtocolError, "reply has no choices[0].message");
  }
  const Json& msg = j["choices"][0]["message"];
  std::string content;
  if (msg.contains("content") && msg["content"].is_string()) content = msg["content"].get<std::string>();

  if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty()) {
    const Json& tc = msg["tool_calls"][0];
    if (!tc.contains("function") || !tc["function"].contains("name") || !tc["function"]["name"].is_string()) {
      throw Error(ErrorCode::BackendProtocolError, "tool call without a function name");
    }
    ToolCall call;
    call.tool = tc["function"]["name"].get<std::string>();
    call.call_id = tc.contains("id") && tc["id"].is_string() ? tc["id"].get<std::string>() : fallback_call_id;
    call.source = BackendSource::Remote;
    call.prompt_id = prompt_id;
    const Json& raw = tc["function"].contains("arguments") ? tc["function"]["arguments"] : Json(nullptr);
    if (raw.is_string()) {
      call.arguments = Json::parse(raw.get<std::string>(), nullptr, false);
      if (call.arguments.is_discarded()) return Refusal{ErrorCode::InvalidAction, call.tool + ": arguments are not JSON"};
    } else {
      call.arguments = raw;
    }
    try {
      ToolRegistry::standard().validate(call.tool, call.arguments);
    } catch (const Error& e) {
      return Refusal{ErrorCode::InvalidAction, e.detail()};
    }
    return ToolReply{std::move(call), content};
  }
  if (content.empty()) throw Error(ErrorCode::BackendProtocolError, "reply has neither content nor tool calls");
  // A plain-text reply to a prompt is the model asking for more detail.
  return Clarification{content};
}

class RemoteBackend final : public LanguageBackend {
 public:
  explicit RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)), endpoint_(split_base_url(cfg_.base_url)) {
    if (cfg_.model.empty()) throw Error(ErrorCode::ConfigError, "remote backend needs a model");
  }

  BackendSource source() const override { return BackendSource::Remote; }

  /// One chat-completions round trip; returns the raw response body.
  std::string post(const Messages& messages) {
    Json body{{"model", cfg_.model},
              {"messages", messages},
              {"tools", ToolRegistry::standard().function_tools()},
              {"tool_choice", "auto"}};
    auto client = std::make_shared<httplib::Client>(endpoint_.origin);
    client->set_connection_timeout(cfg_.timeout_s);
    client->set_read_timeout(cfg_.timeout_s);
    client->set_write_timeout(cfg_.timeout_s);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    {
      std::lock_guard lock(mutex_);
      if (cancelled_) throw Error(ErrorCode::Cancelled, "backend call cancelled by e-stop");
      active_ = client;
    }
    auto res = client->Post(endpoint_.path + "/chat/completions", headers, body.dump(), "application/json");
    bool cancelled = false;
    {
      std::lock_guard lock(mutex_);
      active_.reset();
      cancelled = cancelled_;
    }
    if (cancelled) throw Error(ErrorCode::Cancelled, "backend call cancelled by e-stop");
    if (!res) throw Error(ErrorCode::TransportError, httplib::to_string(res.error()));
    if (res->status != 200) {
      throw Error(ErrorCode::TransportError, "HTTP " + std::to_string(res->status));
    }
    return res->body;
  }

  BackendReply complete(const Messages& messages, const TurnContext& ctx) override {
    return parse_chat_reply(post(messages), ctx.prompt_id, "remote_" + std::to_string(++calls_));
  }

  std::string respond_to_result(const Messages& messages, const ToolCall&, const Json&,
                                const GranularityLabel&) override {
    Json j = Json::parse(post(messages), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::BackendProtocolError, "reply is not JSON");
    try {
      const Json& content = j.at("choices").at(0).at("message").at("content");
      return content.is_string() ? content.get<std::string>() : std::string();
    } catch (const Json::exception&) {
      throw Error(ErrorCode::BackendProtocolError, "reply has no choices[0].message.content");
    }
  }

  void cancel() override {
    std::lock_guard lock(mutex_);
    cancelled_ = true;
    if (active_) active_->stop();
  }

  void clear_cancel() override {
    std::lock_guard lock(mutex_);
    cancelled_ = false;
  }

 private:
  RemoteConfig cfg_;
  Endpoint endpoint_;
  std::mutex mutex_;
  std::shared_ptr<httplib::Client> active_;
  bool cancelled_ = false;
  std::uint64_t calls_ = 0;
};

}  // namespace linguomotor::bridge
