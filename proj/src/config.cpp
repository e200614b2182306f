// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/config.hpp"

#include <cstdlib>
#include <fstream>

namespace civic {
namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::BadRequest, "config: " + what); }

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) bad_config(key + " is not a number");
    return d;
  } catch (const std::logic_error&) {
    bad_config(key + " is not a number");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int i = std::stoi(v, &used);
    if (used != v.size()) bad_config(key + " is not an integer");
    return i;
  } catch (const std::logic_error&) {
    bad_config(key + " is not an integer");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  bad_config(key + " must be a boolean");
}

void set_listen(ServerConfig& cfg, const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) bad_config("listen must be host:port");
  cfg.listen_host = listen.substr(0, colon);
  cfg.listen_port = to_int("listen port", listen.substr(colon + 1));
}

void check(const ServerConfig& cfg) {
  const auto& s = cfg.service;
  if (!(s.threshold > 0.0)) bad_config("threshold must be positive");
  if (!(s.cell_size > 0.0)) bad_config("cell_size must be positive");
  if (s.anonymous_rate_limit < 0) bad_config("anonymous_rate_limit must be >= 0");
  if (s.pbkdf2_iterations < 1) bad_config("pbkdf2_iterations must be >= 1");
  if (s.session_ttl.count() < 1) bad_config("session_ttl_seconds must be >= 1");
  if (cfg.listen_port < 0 || cfg.listen_port > 65535) bad_config("listen port out of range");
}

}  // namespace

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v) return std::nullopt;
  return std::string(v);
}

ServerConfig load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
  ServerConfig cfg;
  auto& svc = cfg.service;

  if (path) {
    std::ifstream in(*path);
    if (!in) bad_config("cannot read " + path->string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad_config(path->string() + " is not a JSON object");
    try {
      if (j.contains("listen")) set_listen(cfg, j["listen"].get<std::string>());
      if (j.contains("data_dir")) svc.data_dir = j["data_dir"].get<std::string>();
      if (j.contains("threshold")) svc.threshold = j["threshold"].get<double>();
      if (j.contains("cell_size")) svc.cell_size = j["cell_size"].get<double>();
      if (j.contains("anonymous_rate_limit")) svc.anonymous_rate_limit = j["anonymous_rate_limit"].get<int>();
      if (j.contains("session_ttl_seconds")) svc.session_ttl = std::chrono::seconds(j["session_ttl_seconds"].get<int>());
      if (j.contains("pbkdf2_iterations")) svc.pbkdf2_iterations = j["pbkdf2_iterations"].get<int>();
      if (j.contains("fsync")) svc.durability = j["fsync"].get<bool>() ? Durability::fsync : Durability::none;
    } catch (const Json::exception& e) {
      bad_config(e.what());
    }
  }

  if (auto v = env("CIVIC_LISTEN")) set_listen(cfg, *v);
  if (auto v = env("CIVIC_DATA_DIR")) svc.data_dir = *v;
  if (auto v = env("CIVIC_THRESHOLD")) svc.threshold = to_double("CIVIC_THRESHOLD", *v);
  if (auto v = env("CIVIC_CELL_SIZE")) svc.cell_size = to_double("CIVIC_CELL_SIZE", *v);
  if (auto v = env("CIVIC_ANON_RATE_LIMIT")) svc.anonymous_rate_limit = to_int("CIVIC_ANON_RATE_LIMIT", *v);
  if (auto v = env("CIVIC_SESSION_TTL")) svc.session_ttl = std::chrono::seconds(to_int("CIVIC_SESSION_TTL", *v));
  if (auto v = env("CIVIC_PBKDF2_ITERATIONS")) svc.pbkdf2_iterations = to_int("CIVIC_PBKDF2_ITERATIONS", *v);
  if (auto v = env("CIVIC_FSYNC")) svc.durability = to_bool("CIVIC_FSYNC", *v) ? Durability::fsync : Durability::none;

  check(cfg);
  return cfg;
}

}  // namespace civic
