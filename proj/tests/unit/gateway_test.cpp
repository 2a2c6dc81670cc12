#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "linguomotor/gateway/http_service.hpp"
#include "linguomotor/gateway/repl.hpp"
#include "linguomotor/gateway/script.hpp"
#include "support/stub_chat_server.hpp"

namespace lm = linguomotor;
namespace gw = linguomotor::gateway;
namespace br = linguomotor::bridge;
namespace fs = std::filesystem;

namespace {

const fs::path kData = LINGUOMOTOR_DATA_DIR;

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "linguomotor_gateway_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

lm::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const lm::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return lm::ErrorCode::InvalidValue;
}

gw::GatewayConfig config_with_trace(const fs::path& trace) {
  gw::GatewayConfig c;
  c.trace_path = trace.string();
  return c;
}

}  // namespace

// --- config -----------------------------------------------------------------------

TEST(Config, ParsesAllSections) {
  auto c = gw::parse_config(R"(
backend = "remote"
robots = ["base"]
tick_hz = 50
http_port = 9000
trace_path = "out/trace.jsonl"

[remote]
base_url = "http://localhost:1234/v1"
model = "llama3-70b"

[safety]
max_speed = 0.05

[sim]
joint_limit = 2.5

[mock]
allow_turn_rate = true
)");
  EXPECT_EQ(c.backend, "remote");
  EXPECT_TRUE(c.has_base());
  EXPECT_FALSE(c.has_arm());
  EXPECT_EQ(c.tick_hz, 50.0);
  EXPECT_EQ(c.sim.tick_hz, 50.0);
  EXPECT_EQ(c.http_port, 9000);
  EXPECT_EQ(c.remote.model, "llama3-70b");
  EXPECT_EQ(c.safety.max_speed, 0.05);
  EXPECT_EQ(c.sim.joint_limits[3].max_rad, 2.5);
  EXPECT_TRUE(c.mock.allow_turn_rate);
}

TEST(Config, Errors) {
  EXPECT_EQ(code_of([] { gw::parse_config("backend = \"remote\"\n"); }), lm::ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { gw::parse_config("tick_hz = \"fast\"\n"); }), lm::ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { gw::parse_config("robots = [\"drone\"]\n"); }), lm::ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { gw::parse_config("tick_hz = 0\n"); }), lm::ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { gw::parse_config("= broken"); }), lm::ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { gw::load_config("/nonexistent/gateway.toml"); }), lm::ErrorCode::FileNotFound);
}

TEST(Config, RemoteWithoutBaseUrlFailsAtGatewayConstruction) {
  gw::GatewayConfig c;
  c.backend = "remote";
  EXPECT_EQ(code_of([&] { gw::Gateway g(c); }), lm::ErrorCode::ConfigError);
}

// --- trace --------------------------------------------------------------------------

TEST(Trace, RoundTripAndFlushPerEvent) {
  const auto path = temp_path("roundtrip.jsonl");
  gw::TraceWriter w(path);
  lm::SessionEvent a{1, "s", lm::EventKind::Prompt, {{"prompt_id", "p1"}, {"text", "move forward"}}};
  lm::SessionEvent b{2, "s", lm::EventKind::EStop, {{"engaged", true}}};
  w.append(a);
  // Visible before the writer is closed.
  EXPECT_EQ(gw::read_trace(path).events.size(), 1u);
  w.append(b);
  w.close();
  auto t = gw::read_trace(path);
  ASSERT_EQ(t.events.size(), 2u);
  EXPECT_EQ(t.events[0], a);
  EXPECT_EQ(t.events[1], b);
  EXPECT_TRUE(t.warnings.empty());
}

TEST(Trace, TruncatedFinalLineIsSkippedWithWarning) {
  auto t = gw::parse_trace(
      "{\"ts_ms\":0,\"session\":\"s\",\"kind\":\"estop\",\"payload\":{\"engaged\":true}}\n{\"ts_ms\":1,\"sess");
  EXPECT_EQ(t.events.size(), 1u);
  EXPECT_EQ(t.warnings.size(), 1u);
}

TEST(Trace, MalformedMiddleLineIsAnError) {
  EXPECT_EQ(code_of([] { gw::parse_trace("not json\n{\"ts_ms\":0,\"session\":\"s\",\"kind\":\"estop\",\"payload\":{\"engaged\":true}}\n"); }),
            lm::ErrorCode::TraceMalformed);
  EXPECT_EQ(code_of([] { gw::parse_trace("{\"ts_ms\":0,\"session\":\"s\",\"kind\":\"nap\",\"payload\":{}}\n\n{}\n"); }),
            lm::ErrorCode::TraceMalformed);
}

// --- script runner --------------------------------------------------------------------

TEST(Script, ParsesDirectivesAndIds) {
  auto steps = gw::parse_script(
      "# comment\n\n!reset base {\"x\": 1, \"y\": 2, \"theta_deg\": 90}\n@r1 move forward\nmove back\n");
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_NEAR(std::get<gw::BaseReset>(steps[0]).pose.theta(), lm::kPi / 2, 1e-15);
  EXPECT_EQ(std::get<gw::PromptLine>(steps[1]).prompt_id, "r1");
  EXPECT_EQ(std::get<gw::PromptLine>(steps[2]).prompt_id, "");
}

TEST(Script, Errors) {
  EXPECT_EQ(code_of([] { gw::parse_script("!reset arm {\"right_j0\": 0}\n"); }), lm::ErrorCode::ScriptSyntax);
  EXPECT_EQ(code_of([] { gw::parse_script("!reset arm not-json\n"); }), lm::ErrorCode::ScriptSyntax);
  EXPECT_EQ(code_of([] { gw::parse_script("!reset drone {}\n"); }), lm::ErrorCode::ScriptSyntax);
  EXPECT_EQ(code_of([] { gw::parse_script("!jump\n"); }), lm::ErrorCode::ScriptSyntax);
  EXPECT_EQ(code_of([] { gw::load_script("/nonexistent/script.txt"); }), lm::ErrorCode::FileNotFound);
}

TEST(Script, ArmSetFollowsClampSemantics) {
  gw::Gateway g(gw::GatewayConfig{});
  auto r = gw::run_script(g, kData / "scripts" / "sawyer_table1.txt");
  EXPECT_EQ(r.exit_code, 0);
  std::map<std::string, lm::Json> achieved;
  for (const auto& e : r.events) {
    if (e.kind == lm::EventKind::ToolResult) achieved[e.payload["prompt_id"]] = e.payload["achieved"];
  }
  ASSERT_EQ(achieved.size(), 6u);
  EXPECT_NEAR(achieved["t1_2"]["right_j0"].get<double>(), 1.57, 5e-3);
  for (const auto& [k, v] : achieved["t1_3"].items()) EXPECT_EQ(v.get<double>(), 0.0) << k;
  EXPECT_NEAR(achieved["t1_4"]["right_j3"].get<double>(), 1.565, 1e-12);
  EXPECT_NEAR(achieved["t1_6"]["right_j0"].get<double>(), -3.050, 5e-4);
}

TEST(Script, BaseSetCommandsMatchColumns) {
  gw::Gateway g(gw::GatewayConfig{});
  auto r = gw::run_script(g, kData / "scripts" / "turtlebot_table2.txt");
  EXPECT_EQ(r.exit_code, 0);
  std::vector<lm::Json> cmds;
  for (const auto& e : r.events) {
    if (e.kind == lm::EventKind::ToolCall) cmds.push_back(e.payload["call"]["arguments"]);
  }
  ASSERT_EQ(cmds.size(), 7u);
  EXPECT_EQ(cmds[2], br::drive_arguments(0.05, 0, 5.0));
  EXPECT_EQ(cmds[3], br::drive_arguments(-1.0, 0, 2.0));
  EXPECT_EQ(cmds[4], br::drive_arguments(0.8, 0, 2.0));
  EXPECT_EQ(cmds[5], br::drive_arguments(0.08, 0, 6.0));
  EXPECT_EQ(cmds[6], br::drive_arguments(0.05, 0, 5.0));
}

TEST(Script, ErrorEventsGiveNonZeroExit) {
  gw::Gateway g(gw::GatewayConfig{});
  auto r = gw::run_steps(g, gw::parse_script("move the arm to position_x = 5, position_y = 0, position_z = 0\n"));
  EXPECT_EQ(r.exit_code, 1);
}

// --- replay ---------------------------------------------------------------------------

TEST(Replay, ReproducesLiveRunBitForBitTwice) {
  for (const char* script : {"sawyer_table1.txt", "turtlebot_table2.txt"}) {
    const auto trace = temp_path(std::string(script) + ".jsonl");
    lm::sim::SimSnapshot live;
    {
      gw::Gateway g(config_with_trace(trace));
      ASSERT_EQ(gw::run_script(g, kData / "scripts" / script).exit_code, 0);
      live = g.sim().snapshot();
    }
    auto a = gw::replay_trace(trace);
    auto b = gw::replay_trace(trace);
    EXPECT_EQ(a.final, live) << script;
    EXPECT_EQ(b.final, a.final) << script;
    EXPECT_TRUE(a.warnings.empty());
  }
}

TEST(Replay, BundledRecordedTrace) {
  auto r = gw::replay_trace(kData / "traces" / "sawyer_table1.jsonl");
  EXPECT_EQ(r.dispatched, 6u);
  ASSERT_TRUE(r.after.contains("t1_2"));
  EXPECT_NEAR(r.after.at("t1_2").arm.joints[0], 1.5708, 1e-9);
  EXPECT_DOUBLE_EQ(r.final.arm.joints[0], -3.0503);
}

TEST(Replay, ToleratesTruncatedTail) {
  const auto src = read_file(kData / "traces" / "sawyer_table1.jsonl");
  const auto path = temp_path("truncated.jsonl");
  write_file(path, src + "{\"ts_ms\":999,\"session\":\"default\",\"kind\":\"tool_c");
  auto r = gw::replay_trace(path);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.final, gw::replay_trace(kData / "traces" / "sawyer_table1.jsonl").final);
}

TEST(Replay, BadToolCallIsMalformed) {
  std::vector<lm::SessionEvent> evs{{0, "s", lm::EventKind::ToolCall,
                                      {{"prompt_id", "x"},
                                       {"clamped", false},
                                       {"call", {{"tool", "teleport"}, {"arguments", lm::Json::object()}, {"call_id", "c"}, {"source", "mock"}}}}}};
  EXPECT_EQ(code_of([&] { gw::replay_events(evs); }), lm::ErrorCode::TraceMalformed);
}

// --- gateway behavior -------------------------------------------------------------------

TEST(Gateway, EventsAreCausalAndTimestampsMonotonic) {
  gw::Gateway g(gw::GatewayConfig{});
  g.prompt("move forward at a speed of 0.08 for 6 seconds");
  g.prompt("do a backflip");
  const auto evs = g.events();
  std::map<std::string, std::int64_t> last;
  for (const auto& e : evs) {
    EXPECT_NO_THROW(lm::validate_event(e));
    EXPECT_GE(e.ts_ms, last[e.session]);
    last[e.session] = e.ts_ms;
  }
  // Virtual time: the 6 s drive shows up in the timestamps.
  EXPECT_GE(evs.back().ts_ms, 6000);
}

TEST(Gateway, EStopIdleLogsAndRefusesUntilReset) {
  gw::Gateway g(gw::GatewayConfig{});
  const auto before = g.sim().snapshot();
  g.estop_all();
  EXPECT_EQ(g.sim().snapshot().arm, before.arm);
  EXPECT_EQ(g.sim().snapshot().base, before.base);
  EXPECT_EQ(g.events().back().kind, lm::EventKind::EStop);

  auto refused = g.prompt("move forward");
  EXPECT_EQ(refused.back().kind, lm::EventKind::Error);
  EXPECT_EQ(refused.back().payload["code"], "EStopEngaged");
  EXPECT_EQ(g.sim().snapshot().base, before.base);

  g.reset_estop();
  auto ok = g.prompt("move forward");
  EXPECT_EQ(ok.back().kind, lm::EventKind::Assistant);
}

TEST(Gateway, DisabledRobotRefuses) {
  gw::GatewayConfig c;
  c.robots = {"arm"};
  gw::Gateway g(c);
  auto evs = g.prompt("move forward");
  EXPECT_EQ(evs.back().payload["code"], "InvalidAction");
}

TEST(Gateway, WallClockEStopHaltsDriveWithinOneTickAndReplays) {
  const auto trace = temp_path("wall.jsonl");
  lm::sim::SimSnapshot live;
  {
    gw::Gateway g(config_with_trace(trace), br::TimeMode::Wall);
    std::thread turn([&] { g.prompt("move forward at a speed of 0.08 for 6 seconds"); });
    while (!g.sim().snapshot().base.active_command) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    g.estop_all();
    const auto at_stop = g.sim().snapshot();
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    const auto later = g.sim().snapshot();
    turn.join();
    EXPECT_EQ(later.base.pose, at_stop.base.pose);
    EXPECT_GT(at_stop.base.pose.x(), 0.0);
    EXPECT_LT(at_stop.base.pose.x(), 0.48);
    live = g.sim().snapshot();
  }
  auto r = gw::replay_trace(trace);
  EXPECT_EQ(r.final.base.pose, live.base.pose);
  EXPECT_EQ(r.final.estop, true);
}

// --- REPL -----------------------------------------------------------------------------

TEST(Repl, TranscriptAndQuit) {
  gw::Gateway g(gw::GatewayConfig{});
  std::istringstream in("\nmove the arm up\n\nquit\nmove forward\n");
  std::ostringstream out;
  gw::run_repl(g, in, out);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind(gw::kReplPrompt, 0), 0u);
  EXPECT_NE(s.find("[granularity] qualitative"), std::string::npos);
  EXPECT_NE(s.find("Calling function move_arm_to_joint_positions"), std::string::npos);
  EXPECT_NE(s.find("Function response: {"), std::string::npos);
  EXPECT_NE(s.find("Response message: "), std::string::npos);
  // Blank lines re-prompt without events; "quit" stops before the last line.
  std::size_t prompts = 0;
  for (const auto& e : g.events()) prompts += e.kind == lm::EventKind::Prompt;
  EXPECT_EQ(prompts, 1u);
}

// --- HTTP -----------------------------------------------------------------------------

TEST(Http, PromptStateEStopResetReport) {
  gw::Gateway g(gw::GatewayConfig{});
  gw::HttpService http(g);
  http.start(0);
  httplib::Client client("127.0.0.1", http.port());

  auto res = client.Post("/api/v1/prompt", R"({"session":"default","text":"rotate the base 90 degrees"})",
                         "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  auto events = lm::Json::parse(res->body);
  ASSERT_EQ(events.size(), 5u);
  EXPECT_EQ(events[2]["kind"], "tool_call");

  res = client.Get("/api/v1/state");
  ASSERT_TRUE(res);
  auto state = lm::Json::parse(res->body);
  EXPECT_NEAR(state["arm"]["joints"]["right_j0"].get<double>(), lm::kPi / 2, 1e-12);
  EXPECT_TRUE(state["base"].contains("theta_deg"));
  EXPECT_EQ(state["estop"], false);

  ASSERT_EQ(client.Post("/api/v1/estop", "", "application/json")->status, 200);
  EXPECT_EQ(lm::Json::parse(client.Get("/api/v1/state")->body)["estop"], true);
  events = lm::Json::parse(client.Post("/api/v1/prompt", R"({"text":"move forward"})", "application/json")->body);
  EXPECT_EQ(events.back()["payload"]["code"], "EStopEngaged");
  ASSERT_EQ(client.Post("/api/v1/reset", R"({"base":{"x":1,"y":0,"theta_deg":0}})", "application/json")->status, 200);
  state = lm::Json::parse(client.Get("/api/v1/state")->body);
  EXPECT_EQ(state["estop"], false);
  EXPECT_EQ(state["base"]["x"], 1.0);

  res = client.Get("/api/v1/report?format=csv");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->body.rfind("prompt,label,metric,intended,achieved,error,success\n", 0), 0u);
  res = client.Get("/api/v1/report?format=md");
  ASSERT_EQ(res->status, 200);
  EXPECT_NE(res->body.find("| Prompt |"), std::string::npos);
  EXPECT_EQ(client.Get("/api/v1/report?format=xml")->status, 400);

  EXPECT_EQ(client.Post("/api/v1/prompt", "{}", "application/json")->status, 400);
}

TEST(Http, SecondServeOnSamePortIsBindError) {
  gw::Gateway g(gw::GatewayConfig{});
  gw::HttpService a(g);
  a.start(0);
  gw::HttpService b(g);
  EXPECT_EQ(code_of([&] { b.start(a.port()); }), lm::ErrorCode::BindError);
}

TEST(Http, EventStreamPushesSessionEvents) {
  gw::Gateway g(gw::GatewayConfig{});
  gw::HttpService http(g);
  http.start(0);

  std::mutex m;
  std::string received;
  std::atomic<bool> done{false};
  std::thread reader([&] {
    httplib::Client client("127.0.0.1", http.port());
    client.Get("/api/v1/events", [&](const char* data, std::size_t n) {
      std::lock_guard lock(m);
      received.append(data, n);
      return received.find("\"kind\":\"assistant\"") == std::string::npos;
    });
    done = true;
  });
  while (g.hub().listener_count() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  g.prompt("move right_j0 by 90 degrees");
  reader.join();
  EXPECT_TRUE(done);

  std::vector<lm::SessionEvent> frames;
  std::istringstream lines(received);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("data: ", 0) == 0) frames.push_back(lm::session_event_from_json(lm::Json::parse(line.substr(6))));
  }
  ASSERT_EQ(frames.size(), 5u);
  EXPECT_EQ(frames.front().kind, lm::EventKind::Prompt);
  EXPECT_EQ(frames.back().kind, lm::EventKind::Assistant);
}

TEST(Http, RemoteBackendThroughService) {
  lm::testing::StubChatServer stub;
  stub.push_tool_call("call_4s7y", br::kMoveArmToJointPositions, lm::testing::kRecordedZeroJointsArgs);
  stub.push_text("Done.");
  gw::GatewayConfig c;
  c.backend = "remote";
  c.remote.base_url = stub.base_url();
  c.remote.model = "m";
  gw::Gateway g(c);
  gw::HttpService http(g);
  http.start(0);
  httplib::Client client("127.0.0.1", http.port());
  auto events = lm::Json::parse(client.Post("/api/v1/prompt", R"({"text":"move all joints to 0"})", "application/json")->body);
  ASSERT_EQ(events.size(), 5u);
  EXPECT_EQ(events[2]["payload"]["call"]["source"], "remote");
  EXPECT_EQ(events[3]["payload"]["achieved"], lm::Json::parse(lm::testing::kRecordedZeroJointsArgs)["joint_positions"]);
}
