#pragma once

// Wire frame for the TCP bridge: a 4-byte big-endian body length followed by
// a UTF-8 JSON object {"topic": ..., "seq": ..., "payload": ...}.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linguomotor/bus/topic_bus.hpp"

namespace linguomotor::bus {

inline constexpr std::size_t kFrameHeaderSize = 4;

inline std::vector<std::uint8_t> frame_bytes(const std::string& body) {
  if (body.size() > 0xFFFFFFFFu) throw Error(ErrorCode::FrameMalformed, "frame body too large");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + body.size());
  out.push_back(static_cast<std::uint8_t>(n >> 24));
  out.push_back(static_cast<std::uint8_t>(n >> 16));
  out.push_back(static_cast<std::uint8_t>(n >> 8));
  out.push_back(static_cast<std::uint8_t>(n));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

inline std::vector<std::uint8_t> encode_frame(const BusMessage& msg) {
  Json body{{"topic", msg.topic.str()}, {"seq", msg.seq}, {"payload", msg.payload}};
  return frame_bytes(body.dump());
}

inline std::uint32_t frame_body_length(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize) throw Error(ErrorCode::FrameTruncated, "incomplete length prefix");
  return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
         (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
}

/// Parses the JSON body of a frame (no length prefix).
inline Json parse_frame_body(std::span<const std::uint8_t> body) {
  Json parsed = Json::parse(body.begin(), body.end(), nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) throw Error(ErrorCode::FrameMalformed, "body is not JSON");
  if (!parsed.is_object()) throw Error(ErrorCode::FrameMalformed, "body is not a JSON object");
  return parsed;
}

inline BusMessage message_from_body(const Json& body) {
  auto topic = body.find("topic");
  auto seq = body.find("seq");
  auto payload = body.find("payload");
  if (topic == body.end() || !topic->is_string() || seq == body.end() || !seq->is_number_unsigned() ||
      payload == body.end()) {
    throw Error(ErrorCode::FrameMalformed, "expected {topic, seq, payload}");
  }
  try {
    return BusMessage{TopicName(topic->get<std::string>()), seq->get<std::uint64_t>(), *payload};
  } catch (const Error& e) {
    throw Error(ErrorCode::FrameMalformed, e.what());
  }
}

/// Decodes exactly one complete frame.
inline BusMessage decode_frame(std::span<const std::uint8_t> bytes) {
  const std::uint32_t n = frame_body_length(bytes);
  if (bytes.size() - kFrameHeaderSize < n) {
    throw Error(ErrorCode::FrameTruncated, "declared " + std::to_string(n) + " bytes, have " +
                                               std::to_string(bytes.size() - kFrameHeaderSize));
  }
  if (bytes.size() - kFrameHeaderSize > n) throw Error(ErrorCode::FrameMalformed, "trailing bytes after frame");
  return message_from_body(parse_frame_body(bytes.subspan(kFrameHeaderSize, n)));
}

/// Incremental splitter for a byte stream carrying back-to-back frames.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

  /// Next complete frame body as JSON, or nullopt if more bytes are needed.
  std::optional<Json> next_body() {
    if (buffer_.size() < kFrameHeaderSize) return std::nullopt;
    const std::uint32_t n = frame_body_length(buffer_);
    if (buffer_.size() - kFrameHeaderSize < n) return std::nullopt;
    std::vector<std::uint8_t> body(buffer_.begin() + kFrameHeaderSize,
                                   buffer_.begin() + kFrameHeaderSize + n);
    buffer_.erase(buffer_.begin(), buffer_.begin() + kFrameHeaderSize + n);
    return parse_frame_body(body);
  }

  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::vector<std::uint8_t> buffer_;
};

}  // namespace linguomotor::bus
