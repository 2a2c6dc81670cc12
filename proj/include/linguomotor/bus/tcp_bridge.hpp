#pragma once

// Optional TCP bridge exposing a TopicBus to other processes.
//
// On connect the server sends one handshake frame whose body is
// {"schemas": {topic: schema}}; afterwards every bus message is forwarded as a
// frame (see frame.hpp) and every frame received from the peer is published
// on the bus (the bus assigns the seq).

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <list>
#include <thread>

#include "linguomotor/bus/frame.hpp"

namespace linguomotor::bus {

namespace detail {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { reset(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  void shutdown_both() const {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void send_all(std::span<const std::uint8_t> bytes) const {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorCode::TransportError, std::string("send: ") + std::strerror(errno));
      sent += static_cast<std::size_t>(n);
    }
  }

  // Returns 0 on orderly close, -1 on timeout.
  ssize_t receive(std::span<std::uint8_t> into, int timeout_ms) const {
    pollfd p{fd_, POLLIN, 0};
    int r = ::poll(&p, 1, timeout_ms);
    if (r == 0) return -1;
    if (r < 0) {
      if (errno == EINTR) return -1;
      throw Error(ErrorCode::TransportError, std::string("poll: ") + std::strerror(errno));
    }
    ssize_t n = ::recv(fd_, into.data(), into.size(), 0);
    if (n < 0) throw Error(ErrorCode::TransportError, std::string("recv: ") + std::strerror(errno));
    return n;
  }

 private:
  int fd_ = -1;
};

inline void send_frame_body(const Socket& s, const Json& body) { s.send_all(frame_bytes(body.dump())); }

}  // namespace detail

class TcpBridgeServer {
 public:
  explicit TcpBridgeServer(TopicBus& bus) : bus_(bus) {}
  TcpBridgeServer(const TcpBridgeServer&) = delete;
  TcpBridgeServer& operator=(const TcpBridgeServer&) = delete;
  ~TcpBridgeServer() { stop(); }

  /// Binds 127.0.0.1 (or any address when `loopback_only` is false). Port 0
  /// picks an ephemeral port; see port().
  void start(std::uint16_t port, bool loopback_only = true) {
    detail::Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) throw Error(ErrorCode::BindError, "socket() failed");
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(loopback_only ? INADDR_LOOPBACK : INADDR_ANY);
    if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(s.fd(), 8) != 0) {
      throw Error(ErrorCode::BindError, "port " + std::to_string(port) + ": " + std::strerror(errno));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    listener_ = std::move(s);
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  std::uint16_t port() const { return port_; }

  void stop() {
    if (!running_.exchange(false)) return;
    listener_.shutdown_both();
    if (accept_thread_.joinable()) accept_thread_.join();
    listener_.reset();
    std::lock_guard lock(clients_mutex_);
    for (auto& c : clients_) c->socket.shutdown_both();
    for (auto& c : clients_) {
      if (c->reader.joinable()) c->reader.join();
      if (c->writer.joinable()) c->writer.join();
    }
    clients_.clear();
  }

 private:
  struct Client {
    detail::Socket socket;
    std::atomic<bool> open{true};
    std::thread reader;
    std::thread writer;
  };

  void accept_loop() {
    while (running_) {
      pollfd p{listener_.fd(), POLLIN, 0};
      if (::poll(&p, 1, 50) <= 0) continue;
      int fd = ::accept(listener_.fd(), nullptr, nullptr);
      if (fd < 0) continue;
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      auto client = std::make_unique<Client>();
      client->socket = detail::Socket(fd);
      Client* c = client.get();
      // Subscribe before the handshake so nothing published afterwards is missed.
      auto subs = std::make_shared<std::vector<Subscription>>();
      Json handshake{{"schemas", Json::object()}};
      for (const auto& [topic, schema] : bus_.schemas()) {
        handshake["schemas"][topic.str()] = to_json(schema);
        subs->push_back(bus_.subscribe(topic));
      }
      try {
        detail::send_frame_body(c->socket, handshake);
      } catch (const Error&) {
        continue;
      }
      c->writer = std::thread([this, c, subs] { writer_loop(*c, *subs); });
      c->reader = std::thread([this, c] { reader_loop(*c); });
      std::lock_guard lock(clients_mutex_);
      clients_.push_back(std::move(client));
    }
  }

  void writer_loop(Client& c, std::vector<Subscription>& subs) {
    try {
      while (running_ && c.open) {
        bool any = false;
        for (auto& sub : subs) {
          while (auto msg = sub.try_next()) {
            c.socket.send_all(encode_frame(*msg));
            any = true;
          }
        }
        if (!any) std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
    } catch (const Error&) {
      c.open = false;
    }
  }

  void reader_loop(Client& c) {
    FrameReader frames;
    std::array<std::uint8_t, 4096> buf{};
    try {
      while (running_ && c.open) {
        ssize_t n = c.socket.receive(buf, 50);
        if (n == 0) break;
        if (n < 0) continue;
        frames.feed(std::span(buf.data(), static_cast<std::size_t>(n)));
        while (auto body = frames.next_body()) {
          BusMessage msg = message_from_body(*body);
          bus_.publish(msg.topic, msg.payload);
        }
      }
    } catch (const Error&) {
      // Malformed frame or rejected payload: drop the peer.
    }
    c.open = false;
  }

  TopicBus& bus_;
  detail::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex clients_mutex_;
  std::list<std::unique_ptr<Client>> clients_;
};

/// Blocking client for the bridge; used by tools and tests.
class TcpBridgeClient {
 public:
  void connect(const std::string& host, std::uint16_t port, int timeout_ms = 2000) {
    detail::Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      throw Error(ErrorCode::TransportError, "bad address " + host);
    }
    if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw Error(ErrorCode::TransportError, std::string("connect: ") + std::strerror(errno));
    }
    socket_ = std::move(s);
    auto body = next_body(timeout_ms);
    if (!body || !body->contains("schemas")) throw Error(ErrorCode::FrameMalformed, "missing handshake");
    schemas_ = body->at("schemas");
  }

  const Json& schemas() const { return schemas_; }

  void send(const TopicName& topic, const Json& payload) {
    socket_.send_all(encode_frame(BusMessage{topic, 0, payload}));
  }

  std::optional<BusMessage> receive(int timeout_ms) {
    auto body = next_body(timeout_ms);
    if (!body) return std::nullopt;
    return message_from_body(*body);
  }

 private:
  std::optional<Json> next_body(int timeout_ms) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    std::array<std::uint8_t, 4096> buf{};
    while (true) {
      if (auto body = frames_.next_body()) return body;
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      ssize_t n = socket_.receive(buf, static_cast<int>(left.count()));
      if (n == 0) throw Error(ErrorCode::TransportError, "bridge closed the connection");
      if (n > 0) frames_.feed(std::span(buf.data(), static_cast<std::size_t>(n)));
    }
  }

  detail::Socket socket_;
  FrameReader frames_;
  Json schemas_;
};

}  // namespace linguomotor::bus
