#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "linguomotor/bridge/granularity.hpp"
#include "linguomotor/core/json.hpp"
#include "linguomotor/core/session_event.hpp"
#include "linguomotor/eval/metrics.hpp"

namespace linguomotor::eval {

/// One fixture entry. `intended` is absent for qualitative rows.
///   arm:  {"right_j0": ..., ...}
///   base: {"x": ..., "y": ..., "theta_deg": ...}
struct Expectation {
  std::string prompt_id;
  std::string robot;  // "arm" | "base"
  std::optional<Json> intended;
  std::optional<Json> recorded;  // measured values, for reference only
  std::string note;           // where the mock intentionally differs
};

inline std::vector<Expectation> parse_fixture(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidValue, "fixture must be a JSON array");
  std::vector<Expectation> out;
  for (const auto& e : j) {
    Expectation x;
    try {
      x.prompt_id = e.at("prompt_id").get<std::string>();
      x.robot = e.at("robot").get<std::string>();
    } catch (const Json::exception& ex) {
      throw Error(ErrorCode::InvalidValue, ex.what());
    }
    if (x.robot != "arm" && x.robot != "base") throw Error(ErrorCode::InvalidValue, "robot must be arm or base");
    if (e.contains("intended") && !e["intended"].is_null()) x.intended = e["intended"];
    if (e.contains("recorded")) x.recorded = e["recorded"];
    x.note = e.value("note", "");
    out.push_back(std::move(x));
  }
  return out;
}

inline std::vector<Expectation> load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidValue, path.string() + " is not JSON");
  return parse_fixture(j);
}

inline BasePose2D base_pose_of(const Json& j) {
  if (j.contains("theta_deg") && !j.contains("theta")) {
    return BasePose2D(j.at("x").get<double>(), j.at("y").get<double>(), deg_to_rad(j.at("theta_deg").get<double>()));
  }
  return base_pose_from_json(j);
}

struct MetricValue {
  std::string metric;  // joint_rad | position_m | heading_deg
  double error;
  bool success;
};

struct TrialRecord {
  std::string prompt_id;
  std::string prompt;
  bridge::GranularityLabel label;
  std::string robot;         // from the fixture, else from the tool
  std::string tool;          // empty if nothing was dispatched
  Json command;              // dispatched arguments
  std::optional<Json> intended;
  std::optional<Json> achieved;
  std::vector<MetricValue> errors;  // non-empty iff intended
  std::optional<Json> recorded;
  std::string note;

  bool scored() const { return intended.has_value(); }
  bool success() const {
    return scored() && std::all_of(errors.begin(), errors.end(), [](const MetricValue& m) { return m.success; });
  }
};

/// A CSV line. Unscored trials have metric "none" and empty error/success.
struct ReportRow {
  std::string prompt;
  std::string label;
  std::string metric;
  std::string intended;
  std::string achieved;
  std::optional<double> error;
  std::optional<bool> success;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct Aggregate {
  std::string label;
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  double max = 0.0;
  double success_rate = 0.0;
};

struct EvalReport {
  std::vector<TrialRecord> trials;
  std::vector<Aggregate> aggregates;
  std::vector<std::string> notes;
};

namespace detail {

inline std::string compact(const std::optional<Json>& j) { return j ? j->dump() : std::string(); }

}  // namespace detail

inline std::vector<ReportRow> report_rows(const EvalReport& r) {
  std::vector<ReportRow> rows;
  for (const auto& t : r.trials) {
    const std::string label = to_string(t.label.label);
    if (!t.scored()) {
      rows.push_back({t.prompt, label, "none", "", detail::compact(t.achieved), std::nullopt, std::nullopt});
      continue;
    }
    for (const auto& m : t.errors) {
      rows.push_back({t.prompt, label, m.metric, detail::compact(t.intended), detail::compact(t.achieved), m.error,
                      m.success});
    }
  }
  return rows;
}

/// Per (label, metric) mean / max / success rate over scored rows.
inline std::vector<Aggregate> aggregate_rows(const std::vector<ReportRow>& rows) {
  std::map<std::pair<std::string, std::string>, std::vector<const ReportRow*>> groups;
  for (const auto& row : rows) {
    if (row.error) groups[{row.label, row.metric}].push_back(&row);
  }
  std::vector<Aggregate> out;
  for (const auto& [key, members] : groups) {
    Aggregate a{key.first, key.second, members.size(), 0.0, 0.0, 0.0};
    double sum = 0.0;
    std::size_t ok = 0;
    for (const auto* m : members) {
      sum += *m->error;
      a.max = std::max(a.max, *m->error);
      ok += m->success.value_or(false) ? 1 : 0;
    }
    a.mean = sum / static_cast<double>(members.size());
    a.success_rate = static_cast<double>(ok) / static_cast<double>(members.size());
    out.push_back(a);
  }
  return out;
}

namespace detail {

struct TurnView {
  std::string prompt;
  bridge::GranularityLabel label;
  std::string tool;
  Json command;
  std::optional<Json> achieved;
};

inline std::vector<std::pair<std::string, TurnView>> turns_of(const std::vector<SessionEvent>& trace) {
  std::vector<std::pair<std::string, TurnView>> out;
  std::map<std::string, std::size_t> index;
  for (const auto& e : trace) {
    const std::string id = e.payload.value("prompt_id", "");
    if (id.empty()) continue;
    if (e.kind == EventKind::Prompt) {
      if (index.contains(id)) throw Error(ErrorCode::FixtureMismatch, "prompt id '" + id + "' repeats in the trace");
      index[id] = out.size();
      out.push_back({id, TurnView{e.payload.value("text", ""), {}, "", Json(), std::nullopt}});
      continue;
    }
    auto it = index.find(id);
    if (it == index.end()) continue;
    TurnView& v = out[it->second].second;
    if (e.kind == EventKind::Granularity) {
      v.label = bridge::granularity_from_json(e.payload);
    } else if (e.kind == EventKind::ToolCall) {
      v.tool = e.payload.at("call").at("tool").get<std::string>();
      v.command = e.payload.at("call").at("arguments");
    } else if (e.kind == EventKind::ToolResult) {
      v.achieved = e.payload.at("achieved");
    }
  }
  return out;
}

inline std::vector<MetricValue> score(const std::string& robot, const Json& intended, const std::optional<Json>& achieved,
                                      const Thresholds& th) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (robot == "arm") {
    const JointVector want = joint_vector_from_json(intended);
    const double err = achieved ? joint_error(want, joint_vector_from_json(*achieved)) : kInf;
    return {{"joint_rad", err, err <= th.joint_rad}};
  }
  const BasePose2D want = base_pose_of(intended);
  PlanarError err{kInf, kPi};
  if (achieved) err = planar_error(want, base_pose_of(*achieved));
  const double heading_deg = rad_to_deg(err.heading);
  return {{"position_m", err.distance, err.distance <= th.position_m},
          {"heading_deg", heading_deg, heading_deg <= th.heading_deg}};
}

}  // namespace detail

/// Pairs each prompt in the trace with its fixture entry and scores the
/// rows that have an intended state. An empty fixture reports every row
/// unscored; otherwise both sides must name the same prompt ids.
inline EvalReport evaluate(const std::vector<SessionEvent>& trace, const std::vector<Expectation>& fixture,
                           const Thresholds& th = {}) {
  const auto turns = detail::turns_of(trace);
  std::map<std::string, const Expectation*> by_id;
  for (const auto& x : fixture) {
    if (!by_id.emplace(x.prompt_id, &x).second) {
      throw Error(ErrorCode::FixtureMismatch, "prompt id '" + x.prompt_id + "' repeats in the fixture");
    }
  }
  if (!fixture.empty()) {
    std::set<std::string> seen;
    for (const auto& [id, v] : turns) {
      if (!by_id.contains(id)) throw Error(ErrorCode::FixtureMismatch, "trace prompt '" + id + "' has no fixture entry");
      seen.insert(id);
    }
    for (const auto& x : fixture) {
      if (!seen.contains(x.prompt_id)) {
        throw Error(ErrorCode::FixtureMismatch, "fixture prompt '" + x.prompt_id + "' is not in the trace");
      }
    }
  }

  EvalReport report;
  for (const auto& [id, v] : turns) {
    TrialRecord t;
    t.prompt_id = id;
    t.prompt = v.prompt;
    t.label = v.label;
    t.tool = v.tool;
    t.command = v.command;
    t.achieved = v.achieved;
    t.robot = v.tool.empty() ? "" : (v.tool == "drive" ? "base" : "arm");
    if (auto it = by_id.find(id); it != by_id.end()) {
      const Expectation& x = *it->second;
      t.robot = x.robot;
      t.intended = x.intended;
      t.recorded = x.recorded;
      t.note = x.note;
      if (!x.note.empty()) report.notes.push_back(id + ": " + x.note);
    }
    if (t.intended) {
      try {
        t.errors = detail::score(t.robot, *t.intended, t.achieved, th);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::FixtureMismatch, id + ": " + e.what());
      } catch (const Error& e) {
        throw Error(ErrorCode::FixtureMismatch, id + ": " + e.detail());
      }
    }
    report.trials.push_back(std::move(t));
  }
  report.aggregates = aggregate_rows(report_rows(report));
  return report;
}

// --- rendering -----------------------------------------------------------------

inline const std::string kCsvHeader = "prompt,label,metric,intended,achieved,error,success";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string exact(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string fixed(double v, int digits) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string md_cell(std::string s) {
  for (std::size_t p = 0; (p = s.find('|', p)) != std::string::npos; p += 2) s.replace(p, 1, "\\|");
  return s;
}

}  // namespace detail

inline std::string render_csv(const EvalReport& r) {
  std::string out = kCsvHeader + "\n";
  for (const auto& row : report_rows(r)) {
    out += detail::csv_field(row.prompt) + "," + row.label + "," + row.metric + "," + detail::csv_field(row.intended) +
           "," + detail::csv_field(row.achieved) + "," + (row.error ? detail::exact(*row.error) : "") + "," +
           (row.success ? (*row.success ? "true" : "false") : "") + "\n";
  }
  return out;
}

/// Splits CSV text (RFC 4180 quoting) into records of fields.
inline std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::InvalidValue, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<ReportRow> parse_report_csv(const std::string& text) {
  const auto records = split_csv(text);
  if (records.empty() || records[0] != split_csv(kCsvHeader)[0]) {
    throw Error(ErrorCode::InvalidValue, "CSV header must be " + kCsvHeader);
  }
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != 7) throw Error(ErrorCode::InvalidValue, "CSV row " + std::to_string(i) + " needs 7 fields");
    ReportRow row{f[0], f[1], f[2], f[3], f[4], std::nullopt, std::nullopt};
    if (!f[5].empty()) row.error = std::stod(f[5]);
    if (!f[6].empty()) row.success = f[6] == "true";
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string render_markdown(const EvalReport& r) {
  std::ostringstream md;
  std::vector<const TrialRecord*> arm, base;
  for (const auto& t : r.trials) (t.robot == "base" ? base : arm).push_back(&t);

  if (r.trials.empty()) {
    md << "| Prompt | Label | Metric | Intended | Achieved | Error | Success |\n"
       << "|---|---|---|---|---|---|---|\n";
    return md.str();
  }
  auto outcome = [](const TrialRecord& t) -> std::string {
    if (!t.scored()) return "unscored";
    return t.success() ? "yes" : "no";
  };
  if (!arm.empty()) {
    md << "### Arm\n\n| Prompt | Label |";
    for (const auto& n : kJointNames) md << " " << n << " |";
    md << " Error (rad) | Success |\n|---|---|";
    for (std::size_t i = 0; i < kJointCount; ++i) md << "---|";
    md << "---|---|\n";
    for (const auto* t : arm) {
      md << "| " << detail::md_cell(t->prompt) << " | " << to_string(t->label.label) << " |";
      std::optional<JointVector> j;
      if (t->achieved && t->achieved->contains("right_j0")) j = joint_vector_from_json(*t->achieved);
      for (std::size_t i = 0; i < kJointCount; ++i) md << " " << (j ? detail::fixed((*j)[i], 3) : "-") << " |";
      md << " " << (t->scored() ? detail::fixed(t->errors.front().error, 4) : "-") << " | " << outcome(*t) << " |\n";
    }
    md << "\n";
  }
  if (!base.empty()) {
    md << "### Base\n\n| Prompt | Label | v_x (m/s) | omega (deg/s) | t (s) | x | y | theta (deg) | Error (m) | "
          "Error (deg) | Success |\n|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto* t : base) {
      md << "| " << detail::md_cell(t->prompt) << " | " << to_string(t->label.label) << " |";
      if (t->tool == "drive") {
        md << " " << t->command.at("v_x").dump() << " | " << detail::fixed(rad_to_deg(t->command.at("omega").get<double>()), 1)
           << " | " << t->command.at("duration").dump() << " |";
      } else {
        md << " - | - | - |";
      }
      if (t->achieved && t->achieved->contains("x")) {
        const auto p = base_pose_of(*t->achieved);
        md << " " << detail::fixed(p.x(), 3) << " | " << detail::fixed(p.y(), 3) << " | " << detail::fixed(p.theta_deg(), 3)
           << " |";
      } else {
        md << " - | - | - |";
      }
      if (t->scored()) {
        md << " " << detail::fixed(t->errors[0].error, 4) << " | " << detail::fixed(t->errors[1].error, 3) << " |";
      } else {
        md << " - | - |";
      }
      md << " " << outcome(*t) << " |\n";
    }
    md << "\n";
  }
  md << "### Aggregates\n\n| Label | Metric | n | Mean | Max | Success rate |\n|---|---|---|---|---|---|\n";
  for (const auto& a : r.aggregates) {
    md << "| " << a.label << " | " << a.metric << " | " << a.count << " | " << detail::fixed(a.mean, 6) << " | "
       << detail::fixed(a.max, 6) << " | " << detail::fixed(a.success_rate, 3) << " |\n";
  }
  if (!r.notes.empty()) {
    md << "\n### Divergence notes\n\n";
    for (const auto& n : r.notes) md << "- " << n << "\n";
  }
  return md.str();
}

inline std::string render_report(const EvalReport& r, const std::string& format) {
  if (format == "csv") return render_csv(r);
  if (format == "md") return render_markdown(r);
  throw Error(ErrorCode::UnknownFormat, "unknown report format '" + format + "'");
}

}  // namespace linguomotor::eval
