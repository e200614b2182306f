// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "civic/wire.hpp"

namespace civic {

// Exit codes of the reporter CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // bad arguments or an error reported by the server
inline constexpr int kExitNetwork = 2;

/// Cached client settings, stored as JSON with owner-only permissions.
struct ClientConfig {
  std::string server = "http://127.0.0.1:8080";
  std::optional<std::string> token;
  std::optional<std::string> name;
  std::optional<std::filesystem::path> spool_dir;  // default: <config dir>/spool
};

ClientConfig load_client_config(const std::filesystem::path& path);
void save_client_config(const std::filesystem::path& path, const ClientConfig& cfg);

/// $CIVIC_CLIENT_CONFIG, else $HOME/.config/civic/client.json.
std::filesystem::path default_client_config_path();

/// Text grid of cell totals (north up); falls back to a list for very large extents.
std::string render_map_grid(const Json& cells);

/// Entry point of the `civic` reporter CLI.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace civic
