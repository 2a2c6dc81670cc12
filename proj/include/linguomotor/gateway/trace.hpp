#pragma once

// Session traces: JSON Lines, one SessionEvent per line, flushed per event.

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "linguomotor/core/session_event.hpp"

namespace linguomotor::gateway {

class TraceWriter {
 public:
  TraceWriter() = default;

  explicit TraceWriter(const std::filesystem::path& path) { open(path); }

  void open(const std::filesystem::path& path) {
    std::lock_guard lock(mutex_);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::out | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::FileNotFound, "cannot open trace " + path.string());
  }

  bool is_open() const { return out_.is_open(); }

  void append(const SessionEvent& e) {
    std::lock_guard lock(mutex_);
    if (!out_.is_open()) return;
    out_ << to_json(e).dump() << '\n';
    out_.flush();
  }

  void close() {
    std::lock_guard lock(mutex_);
    out_.close();
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

struct TraceFile {
  std::vector<SessionEvent> events;
  std::vector<std::string> warnings;
};

/// Parses JSONL text. A bad final line (a crash mid-write) is skipped with a
/// warning; a bad line anywhere else is TraceMalformed.
inline TraceFile parse_trace(const std::string& text) {
  TraceFile out;
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      out.events.push_back(session_event_from_json(j));
    } catch (const std::exception& e) {
      if (i + 1 == lines.size()) {
        out.warnings.push_back("line " + std::to_string(i + 1) + ": skipped truncated final line");
        break;
      }
      throw Error(ErrorCode::TraceMalformed, "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

inline TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

}  // namespace linguomotor::gateway
