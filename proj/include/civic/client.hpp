// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "civic/wire.hpp"

namespace httplib {
class Client;
}

namespace civic {

/// The server could not be reached (connection refused, timeout, ...).
class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thin JSON-over-HTTP client for the /api/v1 endpoints. Server error bodies are rethrown as
/// Error with the server's code and message unchanged.
class ApiClient {
 public:
  explicit ApiClient(const std::string& base_url, std::optional<std::string> token = std::nullopt);
  ~ApiClient();

  ApiClient(ApiClient&&) noexcept;
  ApiClient& operator=(ApiClient&&) noexcept;

  void set_token(std::optional<std::string> token) { token_ = std::move(token); }
  const std::optional<std::string>& token() const { return token_; }

  Json post(const std::string& path, const Json& body);
  Json get(const std::string& path);
  std::string get_text(const std::string& path);

 private:
  std::unique_ptr<httplib::Client> http_;
  std::optional<std::string> token_;
};

/// Builds a draft body including base64 attachment bytes when a file is given.
Json draft_request(const ReportDraft& draft, const std::optional<std::filesystem::path>& attachment);

/// Hashes a local file into AttachmentMeta (kind from extension unless given).
AttachmentMeta describe_attachment(const std::filesystem::path& file, std::optional<AttachmentKind> kind);

// ---------------------------------------------------------------------------
// Offline spool
// ---------------------------------------------------------------------------

struct QueueEntry {
  enum class State { queued, synced, failed };

  std::string client_key;  // fixed at enqueue time, reused on every retry
  ReportDraft draft;
  std::optional<std::filesystem::path> attachment_path;
  Timestamp queued_at{};
  State state = State::queued;
  std::optional<std::uint64_t> report_id;  // synced
  std::optional<std::string> error_code;   // failed
  std::optional<std::string> error_message;
};

std::string_view to_string(QueueEntry::State s);

void to_json(Json& j, const QueueEntry& e);
void from_json(const Json& j, QueueEntry& e);

/// One file per entry under `dir`, written via write-to-temp + rename so a crash leaves
/// either the old or the new version of an entry, never a torn one.
class Spool {
 public:
  explicit Spool(std::filesystem::path dir);

  /// Assigns a fresh 128-bit client_key; returns the number of queued entries afterwards.
  std::size_t enqueue(ReportDraft draft, std::optional<std::filesystem::path> attachment_path);

  /// All entries in enqueue order.
  std::vector<QueueEntry> entries() const;
  std::vector<QueueEntry> queued() const;
  void update(const QueueEntry& entry);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path file_for(const QueueEntry& e) const;

  std::filesystem::path dir_;
};

inline constexpr std::size_t kSyncChunk = 100;

struct SyncResult {
  std::string client_key;
  std::string outcome;  // created | duplicate | error | kept (transient failure, stays queued)
  std::optional<std::uint64_t> report_id;
  std::optional<std::string> error_code;
  std::optional<std::string> error_message;
};

/// Sends every queued entry in chunks of 100 and records outcomes in the spool.
/// Throws NetworkError with the queue untouched if the server is unreachable.
std::vector<SyncResult> sync_queue(ApiClient& client, Spool& spool);

/// Writes `content` to `path` atomically (temp file + rename), with owner-only permissions
/// when `private_file` is set.
void write_file_atomic(const std::filesystem::path& path, const std::string& content, bool private_file = false);

}  // namespace civic
