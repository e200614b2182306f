// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

// civicd: the reporting server.
//   civicd serve [--config FILE] [--listen HOST:PORT]
//   civicd add-admin --name NAME [--credential C] [--config FILE]

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "civic/api_server.hpp"
#include "civic/config.hpp"

namespace {

civic::ApiServer* g_server = nullptr;
volatile std::sig_atomic_t g_signalled = 0;

void on_signal(int) {
  g_signalled = 1;
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"civicd - pollution reporting server"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  std::string listen;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--listen", listen, "HOST:PORT (overrides config)");

  std::string name, credential;
  auto* add_admin = app.add_subcommand("add-admin", "Create an admin account");
  add_admin->add_option("--name", name)->required();
  add_admin->add_option("--credential", credential, "Default: $CIVIC_CREDENTIAL");

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<std::filesystem::path> path;
    if (!config_path.empty()) path = config_path;
    civic::ServerConfig cfg = civic::load_config(path);
    if (!listen.empty()) {
      cfg = civic::load_config(path, [&](const char* key) -> std::optional<std::string> {
        if (std::string_view(key) == "CIVIC_LISTEN") return listen;
        return civic::process_env(key);
      });
    }

    if (*add_admin) {
      if (credential.empty()) {
        if (const char* c = std::getenv("CIVIC_CREDENTIAL")) credential = c;
      }
      civic::Service service(cfg.service);
      const auto profile = service.register_user(name, credential, civic::Role::admin);
      std::cout << "admin " << profile.display_name << " (" << profile.user_id.value << ")\n";
      return 0;
    }

    civic::Service service(cfg.service);
    civic::ApiServer server(service);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "civicd listening on " << cfg.listen_host << ":" << cfg.listen_port << " (data "
              << cfg.service.data_dir.string() << ", last seq " << service.last_seq() << ")" << std::endl;
    const bool ok = server.listen(cfg.listen_host, cfg.listen_port);
    g_server = nullptr;
    service.shutdown();
    if (!ok && g_signalled == 0) {
      std::cerr << "error: could not listen on " << cfg.listen_host << ":" << cfg.listen_port << "\n";
      return 1;
    }
    return 0;
  } catch (const civic::Error& e) {
    std::cerr << "error: " << civic::error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
