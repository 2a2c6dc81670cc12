#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "linguomotor/bus/schema.hpp"

namespace linguomotor::bus {

struct BusMessage {
  TopicName topic;
  std::uint64_t seq = 0;
  Json payload;

  friend bool operator==(const BusMessage&, const BusMessage&) = default;
};

inline constexpr std::size_t kDefaultQueueCapacity = 1024;

namespace detail {

struct SubscriberQueue {
  explicit SubscriberQueue(std::size_t cap) : capacity(cap) {}

  std::mutex mutex;
  std::condition_variable ready;
  std::deque<BusMessage> messages;
  std::size_t capacity;
  bool dropped = false;
  bool closed = false;

  // Returns false when the queue overflowed; the subscriber is then dropped.
  bool push(const BusMessage& msg) {
    {
      std::lock_guard lock(mutex);
      if (closed || dropped) return false;
      if (messages.size() >= capacity) {
        dropped = true;
      } else {
        messages.push_back(msg);
      }
    }
    ready.notify_all();
    return !dropped;
  }
};

}  // namespace detail

/// Receiving end of a subscription. Messages arrive in per-topic publish order;
/// a latched value (if any) is the first message delivered.
class Subscription {
 public:
  Subscription(TopicName topic, std::shared_ptr<detail::SubscriberQueue> queue)
      : topic_(std::move(topic)), queue_(std::move(queue)) {}
  Subscription(Subscription&&) noexcept = default;
  Subscription& operator=(Subscription&&) noexcept = default;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription() { close(); }

  const TopicName& topic() const { return topic_; }

  std::optional<BusMessage> try_next() {
    std::lock_guard lock(queue_->mutex);
    return pop_locked();
  }

  /// Waits up to `timeout`; throws SubscriberDropped once the backlog of a
  /// dropped subscriber is exhausted.
  std::optional<BusMessage> next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(queue_->mutex);
    queue_->ready.wait_for(lock, timeout, [&] {
      return !queue_->messages.empty() || queue_->dropped || queue_->closed;
    });
    return pop_locked();
  }

  std::vector<BusMessage> drain() {
    std::vector<BusMessage> out;
    std::lock_guard lock(queue_->mutex);
    while (!queue_->messages.empty()) {
      out.push_back(std::move(queue_->messages.front()));
      queue_->messages.pop_front();
    }
    return out;
  }

  bool dropped() const {
    std::lock_guard lock(queue_->mutex);
    return queue_->dropped;
  }

  void close() {
    if (!queue_) return;
    {
      std::lock_guard lock(queue_->mutex);
      queue_->closed = true;
    }
    queue_->ready.notify_all();
  }

 private:
  std::optional<BusMessage> pop_locked() {
    if (!queue_->messages.empty()) {
      BusMessage msg = std::move(queue_->messages.front());
      queue_->messages.pop_front();
      return msg;
    }
    if (queue_->dropped) throw Error(ErrorCode::SubscriberDropped, topic_.str());
    return std::nullopt;
  }

  TopicName topic_;
  std::shared_ptr<detail::SubscriberQueue> queue_;
};

/// Latched publish/subscribe bus over named, schema-checked topics.
///
/// Safe for concurrent publishers and subscribers. Ordering is per topic: seq
/// assignment, latching and fan-out happen under that topic's lock, so every
/// subscriber sees strictly increasing seq without gaps. Subscriber code never
/// runs under a bus lock; overflowing subscribers are dropped instead of
/// blocking the publisher.
class TopicBus {
 public:
  using DropHandler = std::function<void(const TopicName&)>;

  explicit TopicBus(std::size_t queue_capacity = kDefaultQueueCapacity) : capacity_(queue_capacity) {}

  void advertise(const TopicName& topic, const PayloadSchema& schema) {
    std::unique_lock lock(registry_mutex_);
    auto it = topics_.find(topic);
    if (it != topics_.end()) {
      if (it->second->schema != schema) {
        throw Error(ErrorCode::SchemaConflict, topic.str() + " already carries " + it->second->schema.name);
      }
      return;
    }
    topics_.emplace(topic, std::make_unique<Topic>(schema));
  }

  std::uint64_t publish(const TopicName& topic, const Json& payload) {
    Topic& t = find(topic);
    validate(t.schema, payload);
    std::vector<TopicName> dropped;
    std::uint64_t seq = 0;
    {
      std::lock_guard lock(t.mutex);
      seq = ++t.last_seq;
      BusMessage msg{topic, seq, payload};
      auto& subs = t.subscribers;
      for (auto it = subs.begin(); it != subs.end();) {
        if (!(*it)->push(msg)) {
          bool was_dropped = false;
          {
            std::lock_guard qlock((*it)->mutex);
            was_dropped = (*it)->dropped;
          }
          if (was_dropped) dropped.push_back(topic);
          it = subs.erase(it);
        } else {
          ++it;
        }
      }
      t.latched = std::move(msg);
    }
    if (!dropped.empty()) {
      DropHandler handler;
      {
        std::lock_guard lock(handler_mutex_);
        handler = on_drop_;
      }
      if (handler) {
        for (const auto& name : dropped) handler(name);
      }
    }
    return seq;
  }

  Subscription subscribe(const TopicName& topic) {
    Topic& t = find(topic);
    auto queue = std::make_shared<detail::SubscriberQueue>(capacity_);
    std::lock_guard lock(t.mutex);
    if (t.latched) queue->push(*t.latched);
    t.subscribers.push_back(queue);
    return Subscription(topic, queue);
  }

  std::optional<Json> latest(const TopicName& topic) const {
    const Topic& t = find(topic);
    std::lock_guard lock(t.mutex);
    if (!t.latched) return std::nullopt;
    return std::optional<Json>(std::in_place, t.latched->payload);
  }

  std::optional<BusMessage> latest_message(const TopicName& topic) const {
    const Topic& t = find(topic);
    std::lock_guard lock(t.mutex);
    return t.latched;
  }

  bool advertised(const TopicName& topic) const {
    std::shared_lock lock(registry_mutex_);
    return topics_.contains(topic);
  }

  std::map<TopicName, PayloadSchema> schemas() const {
    std::shared_lock lock(registry_mutex_);
    std::map<TopicName, PayloadSchema> out;
    for (const auto& [name, t] : topics_) out.emplace(name, t->schema);
    return out;
  }

  void set_drop_handler(DropHandler handler) {
    std::lock_guard lock(handler_mutex_);
    on_drop_ = std::move(handler);
  }

 private:
  struct Topic {
    explicit Topic(PayloadSchema s) : schema(std::move(s)) {}
    const PayloadSchema schema;
    mutable std::mutex mutex;
    std::uint64_t last_seq = 0;
    std::optional<BusMessage> latched;
    std::vector<std::shared_ptr<detail::SubscriberQueue>> subscribers;
  };

  Topic& find(const TopicName& topic) const {
    std::shared_lock lock(registry_mutex_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) throw Error(ErrorCode::UnknownTopic, topic.str());
    return *it->second;
  }

  std::size_t capacity_;
  mutable std::shared_mutex registry_mutex_;
  std::map<TopicName, std::unique_ptr<Topic>> topics_;
  std::mutex handler_mutex_;
  DropHandler on_drop_;
};

/// Advertises the gateway's standard topic set.
inline void advertise_standard_topics(TopicBus& bus) {
  bus.advertise(topics::kJointCommand, schemas::joint_vector());
  bus.advertise(topics::kJointStates, schemas::joint_vector());
  bus.advertise(topics::kPoseCommand, schemas::arm_pose());
  bus.advertise(topics::kArmPose, schemas::arm_pose());
  bus.advertise(topics::kCmdVel, schemas::velocity_command());
  bus.advertise(topics::kOdom, schemas::base_pose());
  bus.advertise(topics::kEStop, schemas::estop());
}

}  // namespace linguomotor::bus
