// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Append-only event log and content-addressed blob directory.
//
// Log file layout, one record per event:
//
//   +----------------------+-------------------------+---------------------+
//   | u32 BE payload bytes | payload (canonical JSON)| u32 BE CRC32(payload)|
//   +----------------------+-------------------------+---------------------+
//
// The payload is the wire encoding of the Event:
//   {"kind": "...", "payload": {...}, "seq": N, "server_time": "RFC 3339"}

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "civic/crypto.hpp"
#include "civic/wire.hpp"

namespace civic {

enum class EventKind { ReportSubmitted, RatingApplied, CommunityValidated, AdminVerdict, UserRegistered };

std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view label);

struct Event {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::ReportSubmitted;
  Json payload;
  Timestamp server_time{};

  friend bool operator==(const Event&, const Event&) = default;
};

void to_json(Json& j, const Event& e);
void from_json(const Json& j, Event& e);

/// Frames one payload as a log record.
Bytes encode_record(std::string_view payload);

struct DecodedLog {
  std::vector<Event> events;
  std::size_t valid_bytes = 0;  // prefix holding complete, verified records
  bool torn_tail = false;       // trailing partial record (interrupted append)
};

/// Decodes a whole log image. A trailing partial record is reported as torn_tail and not
/// as corruption. Throws CorruptLog naming the seq of the first bad complete record
/// (CRC mismatch, undecodable payload, or a gap in seq).
DecodedLog decode_log(std::span<const std::uint8_t> image);

enum class Durability { fsync, none };

class EventLog {
 public:
  /// Opens or creates the log. A torn tail from an interrupted append is truncated away.
  explicit EventLog(std::filesystem::path path, Durability durability = Durability::fsync);
  ~EventLog();

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Durable before return (under Durability::fsync). Throws StorageFailure.
  Event append(EventKind kind, Json payload, Timestamp server_time);

  const std::vector<Event>& events() const { return events_; }
  std::uint64_t last_seq() const { return events_.empty() ? 0 : events_.back().seq; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  Durability durability_;
  int fd_ = -1;
  std::size_t committed_bytes_ = 0;
  std::vector<Event> events_;
};

/// Reads and verifies a log file without modifying it.
std::vector<Event> read_log(const std::filesystem::path& path);

/// blobs/<first-2-hex>/<hash>
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path root);

  /// Stores `data` under its SHA-256 and returns the media_ref ("blobs/ab/abcd...").
  std::string put(std::span<const std::uint8_t> data);
  bool contains(std::string_view content_hash) const;
  std::filesystem::path path_for(std::string_view content_hash) const;
  static std::string media_ref_for(std::string_view content_hash);

 private:
  std::filesystem::path root_;
};

}  // namespace civic
