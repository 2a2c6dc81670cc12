#pragma once

// Prompt scripts: one prompt per line.
//   # comment
//   !reset arm {"right_j0": 0, ...}                 joint map
//   !reset arm {"joints": {...}, "pose": {...}}      joints and an explicit pose
//   !reset base {"x": 0, "y": 0, "theta": 0}         theta in rad (or theta_deg)
//   @row2 rotate the base 90 degrees                 "@id" names the prompt

#include <filesystem>
#include <fstream>
#include <variant>

#include "linguomotor/gateway/gateway.hpp"

namespace linguomotor::gateway {

struct ArmReset {
  JointVector joints;
  std::optional<ArmPose> pose;
};

struct BaseReset {
  BasePose2D pose;
};

struct PromptLine {
  std::string prompt_id;  // empty: numbered by the gateway
  std::string text;
};

using ScriptStep = std::variant<ArmReset, BaseReset, PromptLine>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline ScriptStep parse_reset(const std::string& rest, std::size_t line_no) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::ScriptSyntax, "line " + std::to_string(line_no) + ": " + why);
  };
  const auto space = rest.find(' ');
  const std::string robot = rest.substr(0, space);
  if (space == std::string::npos) throw fail("!reset needs a robot and a JSON state");
  const Json state = Json::parse(rest.substr(space + 1), nullptr, false);
  if (state.is_discarded() || !state.is_object()) throw fail("!reset state is not a JSON object");
  try {
    if (robot == "arm") {
      if (state.contains("joints")) {
        ArmReset r{joint_vector_from_json(state.at("joints")), std::nullopt};
        if (state.contains("pose")) r.pose = arm_pose_from_json(state.at("pose"));
        return r;
      }
      return ArmReset{joint_vector_from_json(state), std::nullopt};
    }
    if (robot == "base") {
      if (state.contains("theta_deg")) {
        return BaseReset{BasePose2D(state.at("x").get<double>(), state.at("y").get<double>(),
                                    deg_to_rad(state.at("theta_deg").get<double>()))};
      }
      return BaseReset{base_pose_from_json(state)};
    }
  } catch (const Error& e) {
    throw fail(e.detail());
  } catch (const Json::exception& e) {
    throw fail(e.what());
  }
  throw fail("unknown robot '" + robot + "'");
}

}  // namespace detail

/// Parses the whole script up front so a syntax error runs nothing.
inline std::vector<ScriptStep> parse_script(const std::string& text) {
  std::vector<ScriptStep> steps;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '!') {
      if (line.rfind("!reset ", 0) != 0) {
        throw Error(ErrorCode::ScriptSyntax, "line " + std::to_string(line_no) + ": unknown directive");
      }
      steps.push_back(detail::parse_reset(detail::trim(line.substr(7)), line_no));
      continue;
    }
    PromptLine p;
    std::string body = line;
    if (body[0] == '@') {
      const auto space = body.find(' ');
      if (space == std::string::npos || space == 1) {
        throw Error(ErrorCode::ScriptSyntax, "line " + std::to_string(line_no) + ": '@id' needs a prompt");
      }
      p.prompt_id = body.substr(1, space - 1);
      body = detail::trim(body.substr(space + 1));
    }
    p.text = body;
    steps.push_back(std::move(p));
  }
  return steps;
}

inline std::vector<ScriptStep> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_script(ss.str());
}

struct ScriptResult {
  int exit_code = 0;  // 0 iff no error events
  std::vector<SessionEvent> events;
};

inline ScriptResult run_steps(Gateway& gw, const std::vector<ScriptStep>& steps) {
  ScriptResult out;
  const auto before = gw.events().size();
  for (const auto& step : steps) {
    if (const auto* a = std::get_if<ArmReset>(&step)) {
      gw.reset_arm(a->joints, a->pose);
    } else if (const auto* b = std::get_if<BaseReset>(&step)) {
      gw.reset_base(b->pose);
    } else {
      const auto& p = std::get<PromptLine>(step);
      gw.prompt(p.text, "default", p.prompt_id);
    }
  }
  auto all = gw.events();
  out.events.assign(all.begin() + static_cast<std::ptrdiff_t>(before), all.end());
  for (const auto& e : out.events) {
    if (e.kind == EventKind::Error) out.exit_code = 1;
  }
  return out;
}

inline ScriptResult run_script(Gateway& gw, const std::filesystem::path& path) {
  return run_steps(gw, load_script(path));
}

}  // namespace linguomotor::gateway
