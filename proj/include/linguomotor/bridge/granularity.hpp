#pragma once

#include <algorithm>
#include <cctype>
#include <regex>
#include <string>
#include <vector>

#include "linguomotor/core/json.hpp"

namespace linguomotor::bridge {

enum class QuantityKind { Angle, Speed, Duration, Coordinate, JointValue };

inline std::string to_string(QuantityKind k) {
  switch (k) {
    case QuantityKind::Angle: return "angle";
    case QuantityKind::Speed: return "speed";
    case QuantityKind::Duration: return "duration";
    case QuantityKind::Coordinate: return "coordinate";
    case QuantityKind::JointValue: return "joint_value";
  }
  return "unknown";
}

inline QuantityKind quantity_kind_from_string(const std::string& s) {
  for (auto k : {QuantityKind::Angle, QuantityKind::Speed, QuantityKind::Duration, QuantityKind::Coordinate,
                 QuantityKind::JointValue}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidValue, "unknown quantity kind '" + s + "'");
}

struct Quantity {
  QuantityKind kind;
  double value;
  std::string unit;

  friend bool operator==(const Quantity&, const Quantity&) = default;
};

enum class Granularity { Qualitative, Quantitative };

inline std::string to_string(Granularity g) {
  return g == Granularity::Qualitative ? "qualitative" : "quantitative";
}

struct GranularityLabel {
  Granularity label = Granularity::Qualitative;
  std::vector<Quantity> quantities;

  bool qualitative() const { return label == Granularity::Qualitative; }
  friend bool operator==(const GranularityLabel&, const GranularityLabel&) = default;
};

inline Json to_json(const GranularityLabel& g) {
  Json qs = Json::array();
  for (const auto& q : g.quantities) qs.push_back({{"kind", to_string(q.kind)}, {"value", q.value}, {"unit", q.unit}});
  return Json{{"label", to_string(g.label)}, {"quantities", qs}};
}

inline GranularityLabel granularity_from_json(const Json& j) {
  GranularityLabel g;
  const auto label = j.at("label").get<std::string>();
  if (label != "qualitative" && label != "quantitative") throw Error(ErrorCode::InvalidValue, "bad label " + label);
  g.label = label == "qualitative" ? Granularity::Qualitative : Granularity::Quantitative;
  for (const auto& q : j.at("quantities")) {
    g.quantities.push_back({quantity_kind_from_string(q.at("kind").get<std::string>()), q.at("value").get<double>(),
                            q.at("unit").get<std::string>()});
  }
  return g;
}

/// Lower-cases, collapses whitespace and strips trailing punctuation.
inline std::string normalize_prompt(const std::string& text) {
  std::string out;
  bool space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == '?')) out.pop_back();
  return out;
}

namespace detail {

// A signed decimal that does not start inside an identifier such as "right_j3".
inline const std::string kNumber = R"(([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:e[-+]?\d+)?))";
inline const std::string kLead = R"((?:^|[^a-z0-9_.]))";

struct QuantityPattern {
  std::regex pattern;
  QuantityKind kind;
  std::string unit;
  int group;  // capture group holding the number
};

inline const std::vector<QuantityPattern>& quantity_patterns() {
  static const std::vector<QuantityPattern> patterns = [] {
    auto re = [](const std::string& s) { return std::regex(s, std::regex::ECMAScript | std::regex::optimize); };
    const std::string n = kNumber;
    return std::vector<QuantityPattern>{
        {re(kLead + n + R"(\s*(?:degrees?|deg|°)\s*(?:per\s+second|/\s*s)\b)"), QuantityKind::Speed, "deg/s", 1},
        {re(kLead + n + R"(\s*(?:radians?|rad)\s*(?:per\s+second|/\s*s)\b)"), QuantityKind::Speed, "rad/s", 1},
        {re(R"(speed\s+of\s+)" + n + R"((?:\s*m\s*/\s*s\b|\s*(?:meters?|metres?)\s+per\s+second\b)?)"),
         QuantityKind::Speed, "m/s", 1},
        {re(kLead + n + R"(\s*(?:m\s*/\s*s\b|(?:meters?|metres?)\s+per\s+second\b))"), QuantityKind::Speed, "m/s", 1},
        {re(kLead + n + R"(\s*(?:degrees?|deg\b|°))"), QuantityKind::Angle, "deg", 1},
        {re(kLead + n + R"(\s*(?:radians?|rad)\b)"), QuantityKind::Angle, "rad", 1},
        {re(kLead + n + R"(\s*(?:seconds?|secs?|s)\b)"), QuantityKind::Duration, "s", 1},
        {re(R"(pos(?:i)?tion_[xyz]\s*=\s*)" + n), QuantityKind::Coordinate, "m", 1},
        {re(kLead + n + R"(\s*(?:meters?|metres?|m)\b)"), QuantityKind::Coordinate, "m", 1},
        {re(R"(\bto\s+)" + n + R"((?:\s|$))"), QuantityKind::JointValue, "rad", 1},
    };
  }();
  return patterns;
}

}  // namespace detail

/// Quantitative iff the prompt binds at least one number to a unit or a
/// parameter (degrees, m/s, seconds, position_*, a joint target value).
/// Quantities are listed in the order they appear in the prompt.
inline GranularityLabel classify_granularity(const std::string& prompt) {
  std::string text = normalize_prompt(prompt);
  struct Found {
    std::size_t pos;
    Quantity q;
  };
  std::vector<Found> found;
  for (const auto& p : detail::quantity_patterns()) {
    std::smatch m;
    std::string::const_iterator start = text.cbegin();
    while (std::regex_search(start, text.cend(), m, p.pattern,
                             start == text.cbegin() ? std::regex_constants::match_default
                                                    : std::regex_constants::match_prev_avail)) {
      const auto offset = static_cast<std::size_t>(m.position(0) + (start - text.cbegin()));
      const auto num_offset = static_cast<std::size_t>(m.position(p.group) + (start - text.cbegin()));
      found.push_back({num_offset, {p.kind, std::stod(m.str(p.group)), p.unit}});
      // Blank the match so later (looser) patterns cannot count it twice.
      std::fill(text.begin() + static_cast<std::ptrdiff_t>(offset),
                text.begin() + static_cast<std::ptrdiff_t>(offset + static_cast<std::size_t>(m.length(0))), '#');
      start = text.cbegin() + static_cast<std::ptrdiff_t>(offset + static_cast<std::size_t>(m.length(0)));
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.pos < b.pos; });
  GranularityLabel out;
  for (const auto& f : found) out.quantities.push_back(f.q);
  out.label = out.quantities.empty() ? Granularity::Qualitative : Granularity::Quantitative;
  return out;
}

}  // namespace linguomotor::bridge
