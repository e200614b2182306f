// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "civic/geo.hpp"
#include "civic/state.hpp"
#include "civic/store.hpp"

namespace civic {

using Clock = std::function<Timestamp()>;

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  double threshold = 1.5;
  double cell_size = kDefaultCellSize;
  int anonymous_rate_limit = 10;  // submissions per minute per source address; 0 disables
  std::chrono::seconds session_ttl{24 * 3600};
  int pbkdf2_iterations = 100000;
  Durability durability = Durability::fsync;
  TrustParams trust;  // trust.threshold is ignored in favour of `threshold`
  Clock clock = now_utc;
};

inline constexpr std::size_t kMinCredentialLength = 8;
inline constexpr std::size_t kMaxBatchEntries = 100;
inline constexpr std::size_t kMaxPageSize = 100;

struct Session {
  std::string token;  // 128-bit random, hex
  UserId user_id;
  Timestamp expiry{};
};

struct SubmitResult {
  PublicReport report;
  bool created = false;
};

struct TrustSummary {
  ReportId report_id;
  double score = 0.0;
  ValidationStatus status = ValidationStatus::pending();
};

struct Stats {
  std::uint64_t validated_count = 0;
  std::vector<CategoryShare> categories;
};

struct SyncEntry {
  std::string client_key;  // echoed back even when the entry fails to decode
  std::optional<ReportDraft> draft;
  std::optional<Bytes> attachment_data;
  std::optional<Error> decode_error;
};

struct SyncOutcome {
  enum class Kind { created, duplicate, error };

  std::string client_key;
  Kind kind = Kind::error;
  std::optional<ReportId> report_id;
  std::optional<Error> error;
};

std::string_view to_string(SyncOutcome::Kind k);

struct StreamFrame {
  std::uint64_t seq = 0;
  std::string event;  // report-validated | report-rejected | map-cell-updated | stats-updated
  Json data;
};

/// "id: <seq>\nevent: <event>\ndata: <json>\n\n"
std::string to_sse(const StreamFrame& frame);

struct QueueItem {
  PublicReport report;
  double score = 0.0;
  std::optional<AttachmentMeta> attachment;
};

/// The middle tier: every state change goes through one writer that appends to the event
/// log and then applies the event to the derived state. One mutex serializes all writes,
/// which also linearizes trust operations per report.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ReporterProfile register_user(const std::string& name, const std::string& credential, Role role = Role::citizen);
  Session login(const std::string& name, const std::string& credential);

  /// `token` is ignored when draft.anonymous is set. `source` keys the anonymous rate limit.
  SubmitResult submit(const std::optional<std::string>& token, const ReportDraft& draft,
                      const std::optional<Bytes>& attachment_data = std::nullopt,
                      const std::string& source = "local");

  TrustSummary rate(const std::string& token, ReportId id, Vote vote);

  std::vector<PublicReport> feed(std::size_t page, std::size_t page_size) const;
  std::vector<MapCell> map(const BBox& bbox, std::optional<double> cell_size,
                           std::optional<Category> category) const;
  Stats stats() const;

  std::vector<SyncOutcome> sync(const std::optional<std::string>& token, const std::vector<SyncEntry>& entries,
                                const std::string& source = "local");

  TrustSummary admin_verdict(const std::string& token, ReportId id, Verdict verdict);
  SummaryDocument summary(const std::string& token, const Period& period, Detail detail) const;
  std::vector<QueueItem> admin_queue(const std::string& token) const;

  std::string share_link(ReportId id) const;
  PublicReport shared_report(ReportId id) const;

  /// Stream frames with seq > since_seq, in seq order.
  std::vector<StreamFrame> frames_after(std::uint64_t since_seq) const;
  /// Blocks until a frame with seq > since_seq exists, the timeout passes, or shutdown().
  bool wait_for_frames(std::uint64_t since_seq, std::chrono::milliseconds timeout) const;
  void shutdown();
  bool stopping() const;

  PlatformState snapshot() const;
  std::vector<Event> log_events() const;
  std::uint64_t last_seq() const;
  const ServiceConfig& config() const { return config_; }
  const std::filesystem::path& log_path() const { return log_->path(); }

 private:
  const UserRecord& require_session(const std::string& token) const;
  const UserRecord& require_admin(const std::string& token) const;
  Event commit(EventKind kind, Json payload);
  void publish(const Event& event, const std::optional<ValidationStatus>& before);
  std::vector<Report> validated_reports() const;
  Json stats_json() const;
  SubmitResult submit_locked(const std::optional<std::string>& token, const ReportDraft& draft,
                             const std::optional<Bytes>& attachment_data, const std::string& source);
  void check_anonymous_rate(const std::string& source);
  Timestamp now() const { return config_.clock(); }

  ServiceConfig config_;
  std::unique_ptr<EventLog> log_;
  BlobStore blobs_;
  PlatformState state_;

  mutable std::mutex mu_;
  mutable std::condition_variable frames_cv_;
  std::vector<StreamFrame> frames_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::deque<Timestamp>> anonymous_hits_;
  bool stopping_ = false;
};

}  // namespace civic
