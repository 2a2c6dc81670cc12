#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "linguomotor/bus/frame.hpp"
#include "linguomotor/bus/tcp_bridge.hpp"

namespace lm = linguomotor;
namespace bus = linguomotor::bus;
using lm::Json;

namespace {

Json cmd_vel(double v, double w, double t) { return Json{{"v_x", v}, {"omega", w}, {"duration", t}}; }

lm::ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const lm::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return lm::ErrorCode::InvalidValue;
}

}  // namespace

TEST(TopicName, Pattern) {
  EXPECT_NO_THROW(bus::TopicName("/base/cmd_vel"));
  EXPECT_THROW(bus::TopicName("base/cmd_vel"), lm::Error);
  EXPECT_THROW(bus::TopicName("/Base"), lm::Error);
  EXPECT_THROW(bus::TopicName("/a//b"), lm::Error);
}

TEST(TopicBus, AdvertiseIsIdempotentAndDetectsConflicts) {
  bus::TopicBus b;
  b.advertise(bus::topics::kCmdVel, bus::schemas::velocity_command());
  EXPECT_NO_THROW(b.advertise(bus::topics::kCmdVel, bus::schemas::velocity_command()));
  EXPECT_EQ(code_of([&] { b.advertise(bus::topics::kCmdVel, bus::schemas::joint_vector()); }),
            lm::ErrorCode::SchemaConflict);
}

TEST(TopicBus, PublishAssignsSequence) {
  bus::TopicBus b;
  b.advertise(bus::topics::kCmdVel, bus::schemas::velocity_command());
  EXPECT_EQ(b.publish(bus::topics::kCmdVel, cmd_vel(0.05, 0, 5)), 1u);
  EXPECT_EQ(b.publish(bus::topics::kCmdVel, cmd_vel(0.05, 0, 5)), 2u);
  EXPECT_EQ(code_of([&] { b.publish(bus::TopicName("/nowhere"), Json::object()); }), lm::ErrorCode::UnknownTopic);
}

TEST(TopicBus, SchemaEnforcement) {
  bus::TopicBus b;
  b.advertise(bus::topics::kCmdVel, bus::schemas::velocity_command());
  Json missing = cmd_vel(0.1, 0, 1);
  missing.erase("duration");
  EXPECT_EQ(code_of([&] { b.publish(bus::topics::kCmdVel, missing); }), lm::ErrorCode::PayloadInvalid);
  Json wrong = cmd_vel(0.1, 0, 1);
  wrong["v_x"] = "fast";
  EXPECT_EQ(code_of([&] { b.publish(bus::topics::kCmdVel, wrong); }), lm::ErrorCode::PayloadInvalid);
  EXPECT_FALSE(b.latest(bus::topics::kCmdVel).has_value());
}

TEST(TopicBus, RandomMissingFieldAlwaysRejected) {
  bus::TopicBus b;
  bus::advertise_standard_topics(b);
  std::mt19937 rng(5);
  Json pose{{"position_x", 0.1}, {"position_y", 0.2}, {"position_z", 0.3},
            {"orientation", {{"x", 0}, {"y", 0}, {"z", 0}, {"w", 1}}}};
  std::vector<std::vector<std::string>> paths = {{"position_x"}, {"position_y"},        {"position_z"},
                                                 {"orientation"}, {"orientation", "x"}, {"orientation", "w"}};
  for (int i = 0; i < 200; ++i) {
    const auto& path = paths[rng() % paths.size()];
    Json p = pose;
    if (path.size() == 1) {
      p.erase(path[0]);
    } else {
      p[path[0]].erase(path[1]);
    }
    EXPECT_EQ(code_of([&] { b.publish(bus::topics::kPoseCommand, p); }), lm::ErrorCode::PayloadInvalid);
  }
}

TEST(TopicBus, SubscribeThenPublishPreservesOrder) {
  bus::TopicBus b;
  b.advertise(bus::topics::kCmdVel, bus::schemas::velocity_command());
  auto sub = b.subscribe(bus::topics::kCmdVel);
  b.publish(bus::topics::kCmdVel, cmd_vel(1, 0, 1));
  b.publish(bus::topics::kCmdVel, cmd_vel(2, 0, 1));
  auto a = sub.try_next();
  auto c = sub.try_next();
  ASSERT_TRUE(a && c);
  EXPECT_EQ(a->payload.at("v_x"), 1);
  EXPECT_EQ(c->payload.at("v_x"), 2);
  EXPECT_FALSE(sub.try_next());
}

TEST(TopicBus, LatchedDeliveryAndLatest) {
  bus::TopicBus b;
  b.advertise(bus::topics::kCmdVel, bus::schemas::velocity_command());
  EXPECT_FALSE(b.latest(bus::topics::kCmdVel));
  b.publish(bus::topics::kCmdVel, cmd_vel(1, 0, 1));
  EXPECT_EQ(*b.latest(bus::topics::kCmdVel), cmd_vel(1, 0, 1));
  b.publish(bus::topics::kCmdVel, cmd_vel(2, 0, 1));
  EXPECT_EQ(*b.latest(bus::topics::kCmdVel), cmd_vel(2, 0, 1));
  auto late = b.subscribe(bus::topics::kCmdVel);
  auto first = late.try_next();
  ASSERT_TRUE(first);
  EXPECT_EQ(first->payload, *b.latest(bus::topics::kCmdVel));
  EXPECT_EQ(first->seq, 2u);
  EXPECT_EQ(code_of([&] { b.subscribe(bus::TopicName("/nowhere")); }), lm::ErrorCode::UnknownTopic);
  EXPECT_EQ(code_of([&] { b.latest(bus::TopicName("/nowhere")); }), lm::ErrorCode::UnknownTopic);
}

TEST(TopicBus, OverflowDropsSlowSubscriber) {
  bus::TopicBus b(4);
  b.advertise(bus::topics::kCmdVel, bus::schemas::velocity_command());
  std::vector<std::string> dropped;
  b.set_drop_handler([&](const bus::TopicName& t) { dropped.push_back(t.str()); });
  auto slow = b.subscribe(bus::topics::kCmdVel);
  for (int i = 0; i < 10; ++i) b.publish(bus::topics::kCmdVel, cmd_vel(i, 0, 1));
  EXPECT_TRUE(slow.dropped());
  EXPECT_EQ(dropped, std::vector<std::string>{"/base/cmd_vel"});
  EXPECT_EQ(slow.drain().size(), 4u);
  EXPECT_THROW(slow.try_next(), lm::Error);
}

TEST(TopicBus, ConcurrentPublishersKeepPerTopicFifo) {
  bus::TopicBus b(1u << 16);
  b.advertise(bus::topics::kCmdVel, bus::schemas::velocity_command());
  auto sub = b.subscribe(bus::topics::kCmdVel);
  std::vector<std::thread> pubs;
  for (int p = 0; p < 4; ++p) {
    pubs.emplace_back([&b, p] {
      for (int i = 0; i < 1000; ++i) b.publish(bus::topics::kCmdVel, cmd_vel(p, i, 1));
    });
  }
  for (auto& t : pubs) t.join();
  auto all = sub.drain();
  ASSERT_EQ(all.size(), 4000u);
  std::array<int, 4> last{-1, -1, -1, -1};
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].seq, i + 1);
    // Each publisher's own messages keep their order too.
    const int p = all[i].payload.at("v_x").get<int>();
    const int k = all[i].payload.at("omega").get<int>();
    EXPECT_EQ(k, last[p] + 1);
    last[p] = k;
  }
}

TEST(Frame, Layout) {
  bus::BusMessage m{bus::topics::kCmdVel, 1, cmd_vel(0.05, 0, 5)};
  auto bytes = bus::encode_frame(m);
  const std::string body(bytes.begin() + 4, bytes.end());
  const auto n = body.size();
  EXPECT_EQ(bytes[0], (n >> 24) & 0xFF);
  EXPECT_EQ(bytes[3], n & 0xFF);
  auto parsed = Json::parse(body);
  EXPECT_EQ(parsed.at("topic"), "/base/cmd_vel");
  EXPECT_EQ(parsed.at("seq"), 1);
  EXPECT_EQ(bus::decode_frame(bytes), m);
}

TEST(Frame, Truncated) {
  std::vector<std::uint8_t> bytes{0, 0, 0, 10, '{', '"', 'a', '"', ':'};
  EXPECT_EQ(code_of([&] { bus::decode_frame(bytes); }), lm::ErrorCode::FrameTruncated);
  std::vector<std::uint8_t> short_header{0, 0};
  EXPECT_EQ(code_of([&] { bus::decode_frame(short_header); }), lm::ErrorCode::FrameTruncated);
}

TEST(Frame, Malformed) {
  auto bytes = bus::frame_bytes("hello");
  EXPECT_EQ(code_of([&] { bus::decode_frame(bytes); }), lm::ErrorCode::FrameMalformed);
  auto wrong_shape = bus::frame_bytes(R"({"topic":"/a","payload":{}})");
  EXPECT_EQ(code_of([&] { bus::decode_frame(wrong_shape); }), lm::ErrorCode::FrameMalformed);
}

TEST(Frame, RandomRoundTrip) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  const std::vector<bus::TopicName> names{bus::topics::kCmdVel, bus::topics::kOdom, bus::TopicName("/x/y_1/z9")};
  for (int i = 0; i < 1000; ++i) {
    Json payload{{"v_x", u(rng)}, {"nested", {{"a", u(rng)}, {"s", std::to_string(rng())}}}, {"flag", rng() % 2 == 0}};
    bus::BusMessage m{names[rng() % names.size()], rng() % 100000 + 1, payload};
    ASSERT_EQ(bus::decode_frame(bus::encode_frame(m)), m);
  }
}

TEST(Frame, ReaderSplitsStream) {
  bus::FrameReader reader;
  auto a = bus::encode_frame({bus::topics::kCmdVel, 1, cmd_vel(1, 0, 1)});
  auto c = bus::encode_frame({bus::topics::kCmdVel, 2, cmd_vel(2, 0, 1)});
  std::vector<std::uint8_t> stream(a);
  stream.insert(stream.end(), c.begin(), c.end());
  reader.feed(std::span(stream.data(), 3));
  EXPECT_FALSE(reader.next_body());
  reader.feed(std::span(stream.data() + 3, stream.size() - 3));
  EXPECT_EQ(reader.next_body()->at("seq"), 1);
  EXPECT_EQ(reader.next_body()->at("seq"), 2);
  EXPECT_FALSE(reader.next_body());
}

TEST(TcpBridge, HandshakeForwardAndInject) {
  bus::TopicBus b;
  bus::advertise_standard_topics(b);
  bus::TcpBridgeServer server(b);
  server.start(0);
  bus::TcpBridgeClient client;
  client.connect("127.0.0.1", server.port());
  ASSERT_TRUE(client.schemas().contains("/base/cmd_vel"));
  EXPECT_EQ(client.schemas().at("/base/cmd_vel").at("name"), "VelocityCommand");

  b.publish(bus::topics::kOdom, Json{{"x", 1.0}, {"y", 2.0}, {"theta", 0.0}});
  auto got = client.receive(2000);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->topic, bus::topics::kOdom);
  EXPECT_EQ(got->payload.at("x"), 1.0);

  auto sub = b.subscribe(bus::topics::kCmdVel);
  client.send(bus::topics::kCmdVel, cmd_vel(0.05, 0, 5));
  auto injected = sub.next(std::chrono::milliseconds(2000));
  ASSERT_TRUE(injected);
  EXPECT_EQ(injected->payload, cmd_vel(0.05, 0, 5));
  server.stop();
}

TEST(TcpBridge, SecondBindOnSamePortFails) {
  bus::TopicBus b;
  bus::TcpBridgeServer first(b);
  first.start(0);
  bus::TcpBridgeServer second(b);
  try {
    second.start(first.port());
    FAIL() << "expected BindError";
  } catch (const lm::Error& e) {
    EXPECT_EQ(e.code(), lm::ErrorCode::BindError);
  }
}
