#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "linguomotor/gateway/http_service.hpp"
#include "linguomotor/gateway/repl.hpp"
#include "linguomotor/gateway/script.hpp"

namespace lm = linguomotor;
namespace gw = linguomotor::gateway;

namespace {

std::atomic<bool> g_interrupted{false};

struct Overrides {
  std::string config_path;
  std::string backend;
  std::string base_url;
  std::string model;
  int port = -1;
  double tick_hz = 0;
  std::string trace_out;
};

gw::GatewayConfig make_config(const Overrides& o) {
  gw::GatewayConfig c = o.config_path.empty() ? gw::GatewayConfig{} : gw::load_config(o.config_path);
  if (!o.backend.empty()) c.backend = o.backend;
  if (!o.base_url.empty()) c.remote.base_url = o.base_url;
  if (!o.model.empty()) c.remote.model = o.model;
  if (o.port >= 0) c.http_port = o.port;
  if (o.tick_hz > 0) c.tick_hz = o.tick_hz;
  if (!o.trace_out.empty()) c.trace_path = o.trace_out;
  c.validate();
  return c;
}

lm::Json snapshot_json(const lm::sim::SimSnapshot& s) {
  return lm::Json{{"arm", {{"joints", lm::to_json(s.arm.joints)}, {"pose", lm::to_json(s.arm.pose)}}},
                  {"base", lm::to_odom_json(s.base.pose)},
                  {"estop", s.estop},
                  {"ticks", s.ticks}};
}

int serve(const gw::GatewayConfig& cfg) {
  gw::Gateway g(cfg, lm::bridge::TimeMode::Wall);
  gw::HttpService http(g);
  http.start(cfg.http_port, "0.0.0.0");
  std::cerr << "serving on port " << http.port();
  if (g.bus_port()) std::cerr << ", bus bridge on " << g.bus_port();
  std::cerr << "\n";
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  http.stop();
  g.shutdown();
  return 0;
}

int run(const gw::GatewayConfig& cfg, const std::string& script, bool quiet) {
  gw::Gateway g(cfg);
  const auto result = gw::run_script(g, script);
  if (!quiet) {
    for (const auto& e : result.events) std::cout << gw::format_event(e) << '\n';
  }
  return result.exit_code;
}

int replay(const std::string& trace, const lm::sim::SimConfig& sim) {
  const auto r = gw::replay_trace(trace, sim);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  lm::Json after = lm::Json::object();
  for (const auto& [id, s] : r.after) after[id] = snapshot_json(s);
  std::cout << lm::Json{{"dispatched", r.dispatched}, {"final", snapshot_json(r.final)}, {"after", after}}.dump(2)
            << '\n';
  return 0;
}

int report(const std::string& trace, const std::string& fixture, const std::string& format) {
  const auto file = gw::read_trace(trace);
  for (const auto& w : file.warnings) std::cerr << "warning: " << w << '\n';
  std::vector<lm::eval::Expectation> expectations;
  if (!fixture.empty()) expectations = lm::eval::load_fixture(fixture);
  std::cout << lm::eval::render_report(lm::eval::evaluate(file.events, expectations), format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Language-driven control of a simulated arm and mobile base"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config_path, "TOML config file")->check(CLI::ExistingFile);
  app.add_option("--backend", o.backend, "mock or remote")->check(CLI::IsMember({"mock", "remote"}));
  app.add_option("--base-url", o.base_url, "chat-completions base URL (remote backend)");
  app.add_option("--model", o.model, "model name (remote backend)");
  app.add_option("--port", o.port, "HTTP port for serve")->check(CLI::Range(0, 65535));
  app.add_option("--tick-hz", o.tick_hz, "simulation rate")->check(CLI::PositiveNumber);
  app.add_option("--trace-out", o.trace_out, "write the session trace (JSON lines) here");

  auto* repl_cmd = app.add_subcommand("repl", "interactive prompt loop");
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API and event stream");

  std::string script;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "run a prompt script in virtual time");
  run_cmd->add_option("--script", script, "script file")->required();
  run_cmd->add_flag("-q,--quiet", quiet, "print nothing, just set the exit code");

  std::string trace;
  auto* replay_cmd = app.add_subcommand("replay", "re-dispatch the tool calls of a trace");
  replay_cmd->add_option("--trace", trace, "trace file")->required();

  std::string fixture, format = "md";
  auto* report_cmd = app.add_subcommand("report", "score a trace against intended states");
  report_cmd->add_option("--trace", trace, "trace file")->required();
  report_cmd->add_option("--fixture", fixture, "expectations (JSON)");
  report_cmd->add_option("--format", format, "md or csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*report_cmd) return report(trace, fixture, format);
    const auto cfg = make_config(o);
    if (*replay_cmd) return replay(trace, cfg.sim);
    if (*run_cmd) return run(cfg, script, quiet);
    if (*serve_cmd) return serve(cfg);
    if (*repl_cmd) {
      gw::Gateway g(cfg, lm::bridge::TimeMode::Wall);
      gw::run_repl(g, std::cin, std::cout);
      return 0;
    }
  } catch (const lm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
