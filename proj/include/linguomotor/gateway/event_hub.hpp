#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "linguomotor/core/session_event.hpp"

namespace linguomotor::gateway {

/// Fans events out to any number of listeners. A listener that falls more
/// than `capacity` events behind loses the oldest ones.
class EventHub {
 public:
  class Listener {
   public:
    explicit Listener(std::size_t capacity) : capacity_(capacity) {}

    std::optional<SessionEvent> next(std::chrono::milliseconds timeout) {
      std::unique_lock lock(mutex_);
      cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
      if (queue_.empty()) return std::nullopt;
      SessionEvent e = std::move(queue_.front());
      queue_.pop_front();
      return e;
    }

    bool closed() const {
      std::lock_guard lock(mutex_);
      return closed_;
    }

    void close() {
      {
        std::lock_guard lock(mutex_);
        closed_ = true;
      }
      cv_.notify_all();
    }

   private:
    friend class EventHub;

    void push(const SessionEvent& e) {
      {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        if (queue_.size() >= capacity_) queue_.pop_front();
        queue_.push_back(e);
      }
      cv_.notify_one();
    }

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<SessionEvent> queue_;
    bool closed_ = false;
  };

  std::shared_ptr<Listener> listen(std::size_t capacity = 4096) {
    auto l = std::make_shared<Listener>(capacity);
    std::lock_guard lock(mutex_);
    listeners_.push_back(l);
    return l;
  }

  void publish(const SessionEvent& e) {
    std::lock_guard lock(mutex_);
    std::erase_if(listeners_, [](const auto& w) { return w.expired() || w.lock()->closed(); });
    for (const auto& w : listeners_) {
      if (auto l = w.lock()) l->push(e);
    }
  }

  void close_all() {
    std::lock_guard lock(mutex_);
    for (const auto& w : listeners_) {
      if (auto l = w.lock()) l->close();
    }
    listeners_.clear();
  }

  std::size_t listener_count() {
    std::lock_guard lock(mutex_);
    std::erase_if(listeners_, [](const auto& w) { return w.expired() || w.lock()->closed(); });
    return listeners_.size();
  }

 private:
  std::mutex mutex_;
  std::vector<std::weak_ptr<Listener>> listeners_;
};

}  // namespace linguomotor::gateway
