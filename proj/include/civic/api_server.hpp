// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "civic/service.hpp"

namespace httplib {
class Server;
}

namespace civic {

inline constexpr std::string_view kApiPrefix = "/api/v1";

struct ApiOptions {
  std::chrono::milliseconds stream_poll{200};
  std::chrono::milliseconds stream_keepalive{5000};
  std::string cors_origin = "*";  // empty disables CORS headers
};

/// HTTP+JSON front end over a Service. Endpoints live under /api/v1; the share path
/// /r/{id} is also served at the root.
class ApiServer {
 public:
  explicit ApiServer(Service& service, ApiOptions options = {});
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread. Returns the port.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

  httplib::Server& http() { return *http_; }

 private:
  void install_routes();

  Service& service_;
  ApiOptions options_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
};

}  // namespace civic
