// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/state.hpp"

namespace civic {
namespace {

[[noreturn]] void inconsistent(const Event& e, const std::string& why) {
  throw Error(ErrorCode::CorruptLog, "corrupt log record at seq " + std::to_string(e.seq) + " (" +
                                         std::string(to_string(e.kind)) + "): " + why);
}

}  // namespace

std::string client_key_scope(const ReporterRef& author) {
  return author.user ? "user:" + author.user->value : std::string("anonymous");
}

Json to_payload(const UserRegisteredPayload& p) {
  return Json{{"profile", p.user.profile},
              {"salt", p.user.salt},
              {"credential_hash", p.user.credential_hash},
              {"iterations", p.user.iterations}};
}

Json to_payload(const ReportSubmittedPayload& p) {
  return Json{{"report", p.report}, {"author_reputation_at_submit", p.author_reputation_at_submit}};
}

Json to_payload(const Rating& p) { return Json(p); }

Json to_payload(const CommunityValidatedPayload& p) {
  return Json{{"report_id", p.report_id.value}, {"threshold", p.threshold}};
}

Json to_payload(const AdminVerdictPayload& p) {
  return Json{{"report_id", p.report_id.value}, {"verdict", to_string(p.verdict)}, {"admin_id", p.admin_id.value}};
}

const UserRecord* PlatformState::find_user(const UserId& id) const {
  auto it = users_.find(id);
  return it == users_.end() ? nullptr : &it->second;
}

const UserRecord* PlatformState::find_user_by_name(std::string_view name) const {
  auto it = names_.find(std::string(name));
  return it == names_.end() ? nullptr : find_user(it->second);
}

const Report* PlatformState::find_report(ReportId id) const {
  auto it = reports_.find(id);
  return it == reports_.end() ? nullptr : &it->second;
}

const TrustState* PlatformState::find_trust(ReportId id) const {
  auto it = trust_.find(id);
  return it == trust_.end() ? nullptr : &it->second;
}

std::optional<ReportId> PlatformState::lookup_client_key(const std::string& scope,
                                                         const std::string& client_key) const {
  auto it = client_keys_.find({scope, client_key});
  if (it == client_keys_.end()) return std::nullopt;
  return it->second;
}

std::string PlatformState::display_name_of(const ReporterRef& author) const {
  if (!author.user) return {};
  const UserRecord* u = find_user(*author.user);
  return u ? u->profile.display_name : std::string{};
}

PublicReport PlatformState::public_view(const Report& report) const {
  return redact(report, display_name_of(report.author));
}

void PlatformState::apply_reputation(const std::vector<ReputationDelta>& deltas) {
  for (const auto& d : deltas) {
    auto it = users_.find(d.user);
    if (it == users_.end()) continue;
    it->second.profile.reputation = clamp_reputation(it->second.profile.reputation + d.delta);
  }
}

void PlatformState::set_status(ReportId id, const TrustState& state) {
  trust_[id] = state;
  reports_[id].status = state.status;
}

void PlatformState::apply(const Event& event) {
  if (event.seq != last_seq_ + 1) inconsistent(event, "expected seq " + std::to_string(last_seq_ + 1));
  try {
    switch (event.kind) {
      case EventKind::UserRegistered: {
        UserRecord rec;
        from_json(require_field(event.payload, "profile"), rec.profile);
        rec.salt = require_field(event.payload, "salt").get<std::string>();
        rec.credential_hash = require_field(event.payload, "credential_hash").get<std::string>();
        rec.iterations = require_field(event.payload, "iterations").get<int>();
        if (users_.contains(rec.profile.user_id)) inconsistent(event, "duplicate user id");
        if (names_.contains(rec.profile.display_name)) inconsistent(event, "duplicate user name");
        names_[rec.profile.display_name] = rec.profile.user_id;
        users_[rec.profile.user_id] = std::move(rec);
        break;
      }
      case EventKind::ReportSubmitted: {
        Report report;
        from_json(require_field(event.payload, "report"), report);
        const double author_rep = require_field(event.payload, "author_reputation_at_submit").get<double>();
        if (report.report_id.value != next_report_id_) inconsistent(event, "unexpected report id");
        if (report.author.user && !users_.contains(*report.author.user)) inconsistent(event, "unknown author");
        if (report.draft.anonymous != report.author.is_anonymous()) inconsistent(event, "anonymity mismatch");
        auto key = std::make_pair(client_key_scope(report.author), report.draft.client_key);
        if (client_keys_.contains(key)) inconsistent(event, "duplicate client key");
        client_keys_[key] = report.report_id;
        trust_[report.report_id] = make_trust_state(report.report_id, report.author, author_rep);
        next_report_id_ = report.report_id.value + 1;
        reports_[report.report_id] = std::move(report);
        break;
      }
      case EventKind::RatingApplied: {
        Rating rating;
        from_json(event.payload, rating);
        const TrustState* state = find_trust(rating.report_id);
        if (!state) inconsistent(event, "unknown report");
        if (!users_.contains(rating.rater_id)) inconsistent(event, "unknown rater");
        trust_[rating.report_id] = apply_rating(*state, rating);
        break;
      }
      case EventKind::CommunityValidated: {
        const ReportId id{require_field(event.payload, "report_id").get<std::uint64_t>()};
        const double threshold = require_field(event.payload, "threshold").get<double>();
        const TrustState* state = find_trust(id);
        if (!state) inconsistent(event, "unknown report");
        TrustOutcome out = evaluate(*state, threshold, params_);
        if (!out.state.status.is_validated()) inconsistent(event, "score below recorded threshold");
        set_status(id, out.state);
        apply_reputation(out.deltas);
        break;
      }
      case EventKind::AdminVerdict: {
        const ReportId id{require_field(event.payload, "report_id").get<std::uint64_t>()};
        const Verdict verdict = parse_verdict(require_field(event.payload, "verdict").get<std::string>());
        const UserRecord* admin = find_user(UserId{require_field(event.payload, "admin_id").get<std::string>()});
        const TrustState* state = find_trust(id);
        if (!state) inconsistent(event, "unknown report");
        if (!admin) inconsistent(event, "unknown admin");
        TrustOutcome out = admin_verdict(*state, verdict, admin->profile, params_);
        set_status(id, out.state);
        apply_reputation(out.deltas);
        break;
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptLog) throw;
    inconsistent(event, e.what());
  } catch (const Json::exception& e) {
    inconsistent(event, e.what());
  }
  last_seq_ = event.seq;
}

PlatformState replay(std::span<const Event> events, const TrustParams& params) {
  PlatformState state(params);
  for (const Event& e : events) state.apply(e);
  return state;
}

}  // namespace civic
