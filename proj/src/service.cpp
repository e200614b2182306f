// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/service.hpp"

#include <algorithm>
#include <cctype>

namespace civic {
namespace {

constexpr std::size_t kMaxNameLength = 64;

bool reserved_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower == kAnonymousMarker;
}

std::optional<ReportId> subject_report(const Event& e) {
  if (e.kind == EventKind::CommunityValidated || e.kind == EventKind::AdminVerdict) {
    return ReportId{e.payload.at("report_id").get<std::uint64_t>()};
  }
  return std::nullopt;
}

TrustSummary summarize(const TrustState& t) { return {t.report_id, t.score, t.status}; }

}  // namespace

std::string_view to_string(SyncOutcome::Kind k) {
  switch (k) {
    case SyncOutcome::Kind::created: return "created";
    case SyncOutcome::Kind::duplicate: return "duplicate";
    case SyncOutcome::Kind::error: return "error";
  }
  return "error";
}

std::string to_sse(const StreamFrame& frame) {
  return "id: " + std::to_string(frame.seq) + "\nevent: " + frame.event + "\ndata: " + frame.data.dump() + "\n\n";
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      log_(std::make_unique<EventLog>(config_.data_dir / "events.log", config_.durability)),
      blobs_(config_.data_dir / "blobs"),
      state_(config_.trust) {
  for (const Event& e : log_->events()) {
    std::optional<ValidationStatus> before;
    if (auto id = subject_report(e)) {
      if (const Report* r = state_.find_report(*id)) before = r->status;
    }
    state_.apply(e);
    publish(e, before);
  }
}

Service::~Service() { shutdown(); }

// ---------------------------------------------------------------------------
// write path
// ---------------------------------------------------------------------------

Event Service::commit(EventKind kind, Json payload) {
  Event event = log_->append(kind, std::move(payload), now());
  std::optional<ValidationStatus> before;
  if (auto id = subject_report(event)) {
    if (const Report* r = state_.find_report(*id)) before = r->status;
  }
  state_.apply(event);
  publish(event, before);
  return event;
}

std::vector<Report> Service::validated_reports() const {
  std::vector<Report> out;
  for (const auto& [id, r] : state_.reports()) {
    if (r.status.is_validated()) out.push_back(r);
  }
  return out;
}

Json Service::stats_json() const {
  const auto reports = validated_reports();
  return Json{{"validated_count", reports.size()}, {"categories", category_distribution(reports)}};
}

void Service::publish(const Event& event, const std::optional<ValidationStatus>& before) {
  const std::size_t old_size = frames_.size();

  if (event.kind == EventKind::ReportSubmitted) {
    const ReportId id{event.payload.at("report").at("report_id").get<std::uint64_t>()};
    frames_.push_back({event.seq, "report-submitted",
                       Json{{"seq", event.seq}, {"report", state_.public_view(*state_.find_report(id))}}});
  } else if (auto id = subject_report(event)) {
    const Report& report = *state_.find_report(*id);
    const Json pub = state_.public_view(report);
    if (report.status.is_validated()) {
      frames_.push_back({event.seq, "report-validated", Json{{"seq", event.seq}, {"report", pub}}});
    } else if (report.status.is_rejected()) {
      frames_.push_back({event.seq, "report-rejected", Json{{"seq", event.seq}, {"report", pub}}});
    }

    const bool was_on_map = before && before->is_validated();
    if (was_on_map != report.status.is_validated()) {
      const CellIndex idx = cell_of(report.draft.location, config_.cell_size);
      std::vector<Report> in_cell;
      for (const Report& r : validated_reports()) {
        if (cell_of(r.draft.location, config_.cell_size) == idx) in_cell.push_back(r);
      }
      auto cells = aggregate_map(in_cell, BBox{}, config_.cell_size);
      MapCell cell = cells.empty() ? MapCell{idx, {}, 0, {}} : cells.front();
      frames_.push_back({event.seq, "map-cell-updated", Json{{"seq", event.seq}, {"cell", cell}}});
      frames_.push_back({event.seq, "stats-updated", Json{{"seq", event.seq}, {"stats", stats_json()}}});
    }
  }

  if (frames_.size() != old_size) frames_cv_.notify_all();
}

// ---------------------------------------------------------------------------
// auth
// ---------------------------------------------------------------------------

ReporterProfile Service::register_user(const std::string& name, const std::string& credential, Role role) {
  if (name.empty() || name.size() > kMaxNameLength ||
      std::any_of(name.begin(), name.end(), [](unsigned char c) { return std::iscntrl(c); })) {
    throw Error(ErrorCode::BadRequest, "name must be 1-64 printable characters");
  }
  if (credential.size() < kMinCredentialLength) {
    throw Error(ErrorCode::WeakCredential, "credential must be at least 8 characters");
  }
  if (reserved_name(name)) throw Error(ErrorCode::NameTaken, "name '" + name + "' is reserved");

  UserRecord rec;
  rec.profile.user_id = UserId{"u-" + random_hex(8)};
  rec.profile.display_name = name;
  rec.profile.reputation = config_.trust.initial_reputation;
  rec.profile.role = role;
  rec.salt = random_hex(16);
  rec.iterations = config_.pbkdf2_iterations;
  rec.credential_hash = hash_credential(credential, rec.salt, rec.iterations);

  std::lock_guard lock(mu_);
  if (state_.find_user_by_name(name)) throw Error(ErrorCode::NameTaken, "name '" + name + "' is taken");
  while (state_.find_user(rec.profile.user_id)) rec.profile.user_id = UserId{"u-" + random_hex(8)};
  commit(EventKind::UserRegistered, to_payload(UserRegisteredPayload{rec}));
  return rec.profile;
}

Session Service::login(const std::string& name, const std::string& credential) {
  UserRecord rec;
  {
    std::lock_guard lock(mu_);
    const UserRecord* found = state_.find_user_by_name(name);
    if (!found) throw Error(ErrorCode::Unauthorized, "unknown name or wrong credential");
    rec = *found;
  }
  if (!constant_time_equal(hash_credential(credential, rec.salt, rec.iterations), rec.credential_hash)) {
    throw Error(ErrorCode::Unauthorized, "unknown name or wrong credential");
  }
  Session s{random_hex(16), rec.profile.user_id, now() + config_.session_ttl};
  std::lock_guard lock(mu_);
  sessions_[s.token] = s;
  return s;
}

const UserRecord& Service::require_session(const std::string& token) const {
  auto it = sessions_.find(token);
  if (token.empty() || it == sessions_.end()) throw Error(ErrorCode::Unauthorized, "missing or invalid token");
  if (it->second.expiry <= now()) throw Error(ErrorCode::Unauthorized, "session expired");
  const UserRecord* user = state_.find_user(it->second.user_id);
  if (!user) throw Error(ErrorCode::Unauthorized, "missing or invalid token");
  return *user;
}

const UserRecord& Service::require_admin(const std::string& token) const {
  const UserRecord& user = require_session(token);
  if (user.profile.role != Role::admin) throw Error(ErrorCode::NotAdmin, "admin role required");
  return user;
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

void Service::check_anonymous_rate(const std::string& source) {
  if (config_.anonymous_rate_limit <= 0) return;
  auto& hits = anonymous_hits_[source];
  const Timestamp t = now();
  while (!hits.empty() && hits.front() <= t - std::chrono::minutes(1)) hits.pop_front();
  if (hits.size() >= static_cast<std::size_t>(config_.anonymous_rate_limit)) {
    throw Error(ErrorCode::RateLimited, "anonymous submission limit reached; retry later");
  }
  hits.push_back(t);
}

SubmitResult Service::submit_locked(const std::optional<std::string>& token, const ReportDraft& draft,
                                    const std::optional<Bytes>& attachment_data, const std::string& source) {
  validate_draft(draft);

  ReporterRef author = ReporterRef::anonymous();
  double author_weight = config_.trust.anonymous_author_weight;
  if (!draft.anonymous) {
    if (!token) throw Error(ErrorCode::Unauthorized, "login required for non-anonymous reports");
    const UserRecord& user = require_session(*token);
    author = ReporterRef::registered(user.profile.user_id);
    author_weight = user.profile.reputation;
  }

  if (auto existing = state_.lookup_client_key(client_key_scope(author), draft.client_key)) {
    return {state_.public_view(*state_.find_report(*existing)), false};
  }
  if (author.is_anonymous()) check_anonymous_rate(source);

  ReportDraft accepted = draft;
  if (accepted.attachment) {
    auto& meta = *accepted.attachment;
    if (attachment_data) {
      if (attachment_data->size() != meta.size_bytes || sha256_hex(*attachment_data) != meta.content_hash) {
        throw Error(ErrorCode::BadAttachment, "attachment bytes do not match content_hash/size_bytes");
      }
      blobs_.put(*attachment_data);
    } else if (!blobs_.contains(meta.content_hash)) {
      throw Error(ErrorCode::BadAttachment, "attachment_data missing for unknown content_hash");
    }
    meta.media_ref = BlobStore::media_ref_for(meta.content_hash);
  }

  Report report;
  report.report_id = state_.next_report_id();
  report.draft = std::move(accepted);
  report.author = author;
  report.server_time = now();
  commit(EventKind::ReportSubmitted, to_payload(ReportSubmittedPayload{report, author_weight}));

  const TrustState& trust = *state_.find_trust(report.report_id);
  if (evaluate(trust, config_.threshold, config_.trust).state.status.is_validated()) {
    commit(EventKind::CommunityValidated, to_payload(CommunityValidatedPayload{report.report_id, config_.threshold}));
  }
  return {state_.public_view(*state_.find_report(report.report_id)), true};
}

SubmitResult Service::submit(const std::optional<std::string>& token, const ReportDraft& draft,
                             const std::optional<Bytes>& attachment_data, const std::string& source) {
  std::lock_guard lock(mu_);
  return submit_locked(token, draft, attachment_data, source);
}

TrustSummary Service::rate(const std::string& token, ReportId id, Vote vote) {
  std::lock_guard lock(mu_);
  const UserRecord& rater = require_session(token);
  const TrustState* trust = state_.find_trust(id);
  if (!trust) throw Error(ErrorCode::UnknownReport, "no report " + std::to_string(id.value));

  Rating rating{id, rater.profile.user_id, vote, rater.profile.reputation, now()};
  apply_rating(*trust, rating);  // precondition check before anything is logged
  commit(EventKind::RatingApplied, to_payload(rating));

  trust = state_.find_trust(id);
  if (trust->status.is_pending() &&
      evaluate(*trust, config_.threshold, config_.trust).state.status.is_validated()) {
    commit(EventKind::CommunityValidated, to_payload(CommunityValidatedPayload{id, config_.threshold}));
  }
  return summarize(*state_.find_trust(id));
}

std::vector<PublicReport> Service::feed(std::size_t page, std::size_t page_size) const {
  if (page < 1 || page_size < 1 || page_size > kMaxPageSize) {
    throw Error(ErrorCode::BadPage, "page must be >= 1 and page_size in [1, 100]");
  }
  std::lock_guard lock(mu_);
  std::vector<const Report*> visible;
  for (const auto& [id, r] : state_.reports()) {
    if (!r.status.is_rejected()) visible.push_back(&r);
  }
  std::sort(visible.begin(), visible.end(), [](const Report* a, const Report* b) {
    return std::tie(b->server_time, b->report_id) < std::tie(a->server_time, a->report_id);
  });

  std::vector<PublicReport> out;
  const std::size_t first = (page - 1) * page_size;
  for (std::size_t i = first; i < visible.size() && i < first + page_size; ++i) {
    out.push_back(state_.public_view(*visible[i]));
  }
  return out;
}

std::vector<MapCell> Service::map(const BBox& bbox, std::optional<double> cell_size,
                                  std::optional<Category> category) const {
  std::optional<CategorySet> filter;
  if (category) filter = CategorySet{*category};
  std::lock_guard lock(mu_);
  return aggregate_map(validated_reports(), bbox, cell_size.value_or(config_.cell_size), filter);
}

Stats Service::stats() const {
  std::lock_guard lock(mu_);
  const auto reports = validated_reports();
  return {reports.size(), category_distribution(reports)};
}

std::vector<SyncOutcome> Service::sync(const std::optional<std::string>& token, const std::vector<SyncEntry>& entries,
                                       const std::string& source) {
  if (entries.size() > kMaxBatchEntries) {
    throw Error(ErrorCode::BatchTooLarge, "at most 100 entries per batch");
  }
  std::lock_guard lock(mu_);
  if (token) require_session(*token);

  std::vector<SyncOutcome> outcomes;
  outcomes.reserve(entries.size());
  for (const SyncEntry& entry : entries) {
    SyncOutcome out;
    out.client_key = entry.client_key;
    try {
      if (entry.decode_error) throw *entry.decode_error;
      if (!entry.draft) throw Error(ErrorCode::BadRequest, "entry has no draft");
      SubmitResult r = submit_locked(token, *entry.draft, entry.attachment_data, source);
      out.kind = r.created ? SyncOutcome::Kind::created : SyncOutcome::Kind::duplicate;
      out.report_id = r.report.report_id;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::StorageFailure) throw;
      out.kind = SyncOutcome::Kind::error;
      out.error = e;
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

// ---------------------------------------------------------------------------
// admin
// ---------------------------------------------------------------------------

TrustSummary Service::admin_verdict(const std::string& token, ReportId id, Verdict verdict) {
  std::lock_guard lock(mu_);
  const UserRecord& admin = require_admin(token);
  const TrustState* trust = state_.find_trust(id);
  if (!trust) throw Error(ErrorCode::UnknownReport, "no report " + std::to_string(id.value));
  civic::admin_verdict(*trust, verdict, admin.profile, config_.trust);  // precondition check
  commit(EventKind::AdminVerdict, to_payload(AdminVerdictPayload{id, verdict, admin.profile.user_id}));
  return summarize(*state_.find_trust(id));
}

SummaryDocument Service::summary(const std::string& token, const Period& period, Detail detail) const {
  std::lock_guard lock(mu_);
  require_admin(token);
  std::vector<Report> all;
  for (const auto& [id, r] : state_.reports()) all.push_back(r);
  return build_summary(all, period, detail, config_.cell_size,
                       [this](const Report& r) { return state_.public_view(r); });
}

std::vector<QueueItem> Service::admin_queue(const std::string& token) const {
  std::lock_guard lock(mu_);
  require_admin(token);
  std::vector<QueueItem> out;
  for (const auto& [id, r] : state_.reports()) {
    if (!r.status.is_pending()) continue;
    out.push_back({state_.public_view(r), state_.find_trust(id)->score, r.draft.attachment});
  }
  std::stable_sort(out.begin(), out.end(), [](const QueueItem& a, const QueueItem& b) {
    return a.report.server_time < b.report.server_time;
  });
  return out;
}

std::string Service::share_link(ReportId id) const {
  shared_report(id);
  return "/r/" + std::to_string(id.value);
}

PublicReport Service::shared_report(ReportId id) const {
  std::lock_guard lock(mu_);
  const Report* r = state_.find_report(id);
  if (!r) throw Error(ErrorCode::UnknownReport, "no report " + std::to_string(id.value));
  if (r->status.is_rejected()) throw Error(ErrorCode::ReportRejected, "report was rejected");
  return state_.public_view(*r);
}

// ---------------------------------------------------------------------------
// stream
// ---------------------------------------------------------------------------

std::vector<StreamFrame> Service::frames_after(std::uint64_t since_seq) const {
  std::lock_guard lock(mu_);
  auto it = std::upper_bound(frames_.begin(), frames_.end(), since_seq,
                             [](std::uint64_t s, const StreamFrame& f) { return s < f.seq; });
  return {it, frames_.end()};
}

bool Service::wait_for_frames(std::uint64_t since_seq, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return frames_cv_.wait_for(lock, timeout, [&] {
    return stopping_ || (!frames_.empty() && frames_.back().seq > since_seq);
  }) && !stopping_;
}

void Service::shutdown() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  frames_cv_.notify_all();
}

bool Service::stopping() const {
  std::lock_guard lock(mu_);
  return stopping_;
}

PlatformState Service::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::vector<Event> Service::log_events() const {
  std::lock_guard lock(mu_);
  return log_->events();
}

std::uint64_t Service::last_seq() const {
  std::lock_guard lock(mu_);
  return log_->last_seq();
}

}  // namespace civic
