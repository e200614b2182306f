// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "civic/service.hpp"

namespace civic {

struct ServerConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  ServiceConfig service;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

std::optional<std::string> process_env(const char* name);

/// Reads the JSON config file (if given), then applies environment overrides:
///   CIVIC_LISTEN (host:port), CIVIC_DATA_DIR, CIVIC_THRESHOLD, CIVIC_CELL_SIZE,
///   CIVIC_ANON_RATE_LIMIT, CIVIC_SESSION_TTL, CIVIC_PBKDF2_ITERATIONS, CIVIC_FSYNC.
/// Throws Error(BadRequest) on unreadable files or malformed values.
ServerConfig load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env = process_env);

}  // namespace civic
