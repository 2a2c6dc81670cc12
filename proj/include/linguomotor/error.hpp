#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linguomotor {

enum class ErrorCode {
  NotNormalizable,
  InvalidJointVector,
  InvalidValue,
  SchemaConflict,
  UnknownTopic,
  InvalidTopicName,
  PayloadInvalid,
  FrameTruncated,
  FrameMalformed,
  SubscriberDropped,
  EStopEngaged,
  InvalidCommand,
  OutOfWorkspace,
  TransportError,
  BackendProtocolError,
  InvalidAction,
  Cancelled,
  BindError,
  ConfigError,
  FileNotFound,
  ScriptSyntax,
  TraceMalformed,
  FixtureMismatch,
  UnknownFormat,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotNormalizable: return "NotNormalizable";
    case ErrorCode::InvalidJointVector: return "InvalidJointVector";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::SchemaConflict: return "SchemaConflict";
    case ErrorCode::UnknownTopic: return "UnknownTopic";
    case ErrorCode::InvalidTopicName: return "InvalidTopicName";
    case ErrorCode::PayloadInvalid: return "PayloadInvalid";
    case ErrorCode::FrameTruncated: return "FrameTruncated";
    case ErrorCode::FrameMalformed: return "FrameMalformed";
    case ErrorCode::SubscriberDropped: return "SubscriberDropped";
    case ErrorCode::EStopEngaged: return "EStopEngaged";
    case ErrorCode::InvalidCommand: return "InvalidCommand";
    case ErrorCode::OutOfWorkspace: return "OutOfWorkspace";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::BackendProtocolError: return "BackendProtocolError";
    case ErrorCode::InvalidAction: return "InvalidAction";
    case ErrorCode::Cancelled: return "Cancelled";
    case ErrorCode::BindError: return "BindError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ScriptSyntax: return "ScriptSyntax";
    case ErrorCode::TraceMalformed: return "TraceMalformed";
    case ErrorCode::FixtureMismatch: return "FixtureMismatch";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code, so
/// callers can branch on the code and the gateway can log it verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace linguomotor
