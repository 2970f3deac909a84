#pragma once

// Runs an AnnotationServer on an ephemeral port for the lifetime of the
// object and offers a small JSON client.

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <stdexcept>
#include <thread>

#include "simulmt/server.hpp"

namespace simulmt::testing {

struct HttpReply {
  int status = 0;
  nlohmann::json body;
};

class ServerHarness {
 public:
  explicit ServerHarness(SessionStore& store, ServerOptions options = {})
      : server_(store, std::move(options)) {
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("could not bind test server");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  ~ServerHarness() {
    server_.stop();
    thread_.join();
  }
  ServerHarness(const ServerHarness&) = delete;
  ServerHarness& operator=(const ServerHarness&) = delete;

  HttpReply post(const std::string& path, const nlohmann::json& body = nlohmann::json::object()) {
    return reply(client_->Post(path, body.dump(), "application/json"));
  }
  HttpReply post_raw(const std::string& path, const std::string& body) {
    return reply(client_->Post(path, body, "application/json"));
  }
  HttpReply get(const std::string& path) { return reply(client_->Get(path)); }
  httplib::Result get_raw(const std::string& path) { return client_->Get(path); }

  int port() const { return port_; }

 private:
  static HttpReply reply(const httplib::Result& res) {
    if (!res) throw std::runtime_error("HTTP request failed");
    HttpReply out{res->status, nullptr};
    if (!res->body.empty()) out.body = nlohmann::json::parse(res->body, nullptr, false);
    return out;
  }

  AnnotationServer server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace simulmt::testing
