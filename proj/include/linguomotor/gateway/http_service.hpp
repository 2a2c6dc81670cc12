#pragma once

// JSON API over the gateway:
//   POST /api/v1/prompt   {"session","text"[,"prompt_id"]} -> SessionEvent array
//   GET  /api/v1/state
//   GET  /api/v1/events   text/event-stream, one SessionEvent per "data:" frame
//   POST /api/v1/estop
//   POST /api/v1/reset    [{"arm": state, "base": state}] also releases the e-stop
//   GET  /api/v1/report?format=csv|md

#include <atomic>
#include <thread>

#include <httplib.h>

#include "linguomotor/eval/report.hpp"
#include "linguomotor/gateway/gateway.hpp"

namespace linguomotor::gateway {

class HttpService {
 public:
  explicit HttpService(Gateway& gw) : gw_(gw) {
    // httplib defaults to SO_REUSEPORT, which would let a second server
    // share the port silently.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    routes();
  }

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  ~HttpService() { stop(); }

  /// Binds and starts serving on a background thread. Port 0 picks one.
  void start(int port, const std::string& host = "127.0.0.1") {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
    } else {
      port_ = server_.bind_to_port(host, port) ? port : -1;
    }
    if (port_ < 0) throw Error(ErrorCode::BindError, "cannot bind " + host + ":" + std::to_string(port));
    stopping_ = false;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  /// Serves on the calling thread until stop() is called elsewhere.
  void run(int port, const std::string& host = "0.0.0.0") {
    start(port, host);
    thread_.join();
  }

  void stop() {
    stopping_ = true;
    gw_.hub().close_all();
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

 private:
  static void send_json(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const Error& e) {
    int status = 400;
    if (e.code() == ErrorCode::EStopEngaged) status = 409;
    if (e.code() == ErrorCode::FileNotFound) status = 404;
    send_json(res, error_payload(e), status);
  }

  void routes() {
    server_.Post("/api/v1/prompt", [this](const httplib::Request& req, httplib::Response& res) {
      const Json body = Json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string()) {
        send_error(res, Error(ErrorCode::InvalidValue, "body must be {\"session\", \"text\"}"));
        return;
      }
      const std::string text = body["text"].get<std::string>();
      if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        send_error(res, Error(ErrorCode::InvalidValue, "text is empty"));
        return;
      }
      Json out = Json::array();
      for (const auto& e : gw_.prompt(text, body.value("session", "default"), body.value("prompt_id", ""))) {
        out.push_back(to_json(e));
      }
      send_json(res, out);
    });

    server_.Get("/api/v1/state", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, gw_.state_json());
    });

    server_.Post("/api/v1/estop", [this](const httplib::Request&, httplib::Response& res) {
      gw_.estop_all();
      send_json(res, gw_.state_json());
    });

    server_.Post("/api/v1/reset", [this](const httplib::Request& req, httplib::Response& res) {
      const Json body = req.body.empty() ? Json::object() : Json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        send_error(res, Error(ErrorCode::InvalidValue, "body must be a JSON object"));
        return;
      }
      try {
        gw_.reset_estop();
        if (body.contains("arm")) {
          const Json& a = body["arm"];
          if (a.contains("joints")) {
            std::optional<ArmPose> pose;
            if (a.contains("pose")) pose = arm_pose_from_json(a["pose"]);
            gw_.reset_arm(joint_vector_from_json(a["joints"]), pose);
          } else {
            gw_.reset_arm(joint_vector_from_json(a));
          }
        }
        if (body.contains("base")) gw_.reset_base(eval::base_pose_of(body["base"]));
      } catch (const Error& e) {
        send_error(res, e);
        return;
      } catch (const Json::exception& e) {
        send_error(res, Error(ErrorCode::InvalidValue, e.what()));
        return;
      }
      send_json(res, gw_.state_json());
    });

    server_.Get("/api/v1/report", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string format = req.has_param("format") ? req.get_param_value("format") : "md";
      try {
        std::vector<eval::Expectation> fixture;
        if (!gw_.config().fixture_path.empty()) fixture = eval::load_fixture(gw_.config().fixture_path);
        const auto body = eval::render_report(eval::evaluate(gw_.events(), fixture), format);
        res.set_content(body, format == "csv" ? "text/csv" : "text/markdown");
      } catch (const Error& e) {
        send_error(res, e);
      }
    });

    server_.Get("/api/v1/events", [this](const httplib::Request&, httplib::Response& res) {
      auto listener = gw_.hub().listen();
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, listener](std::size_t, httplib::DataSink& sink) {
            if (stopping_ || listener->closed()) {
              sink.done();
              return true;
            }
            if (auto e = listener->next(std::chrono::milliseconds(200))) {
              const std::string frame = "data: " + to_json(*e).dump() + "\n\n";
              if (!sink.write(frame.data(), frame.size())) return false;
              return true;
            }
            return sink.is_writable();
          },
          [listener](bool) { listener->close(); });
    });

    server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("linguomotor gateway: see /api/v1/state\n", "text/plain");
    });
  }

  Gateway& gw_;
  httplib::Server server_;
  int port_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

}  // namespace linguomotor::gateway
