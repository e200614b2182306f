// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "civic/store.hpp"
#include "civic/trust.hpp"

namespace civic {

struct UserRecord {
  ReporterProfile profile;
  std::string salt;
  std::string credential_hash;
  int iterations = 0;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

/// Idempotency scope: a registered user id, or the shared anonymous scope.
std::string client_key_scope(const ReporterRef& author);

// Typed event payloads.

struct UserRegisteredPayload {
  UserRecord user;
};

struct ReportSubmittedPayload {
  Report report;
  double author_reputation_at_submit = 0.0;
};

struct CommunityValidatedPayload {
  ReportId report_id;
  double threshold = 0.0;
};

struct AdminVerdictPayload {
  ReportId report_id;
  Verdict verdict = Verdict::confirm;
  UserId admin_id;
};

Json to_payload(const UserRegisteredPayload& p);
Json to_payload(const ReportSubmittedPayload& p);
Json to_payload(const Rating& p);
Json to_payload(const CommunityValidatedPayload& p);
Json to_payload(const AdminVerdictPayload& p);

/// Everything derived from the event log: profiles, reports, trust states and the
/// client-key index. `apply` is the only mutator and is shared by the live service
/// and by replay, so both paths compute identical state.
class PlatformState {
 public:
  explicit PlatformState(TrustParams params = {}) : params_(params) {}

  /// Throws CorruptLog if the event is inconsistent with the current state.
  void apply(const Event& event);

  const std::map<UserId, UserRecord>& users() const { return users_; }
  const std::map<ReportId, Report>& reports() const { return reports_; }
  const std::map<ReportId, TrustState>& trust() const { return trust_; }
  const TrustParams& params() const { return params_; }

  const UserRecord* find_user(const UserId& id) const;
  const UserRecord* find_user_by_name(std::string_view name) const;
  const Report* find_report(ReportId id) const;
  const TrustState* find_trust(ReportId id) const;

  std::optional<ReportId> lookup_client_key(const std::string& scope, const std::string& client_key) const;

  ReportId next_report_id() const { return ReportId{next_report_id_}; }
  std::uint64_t last_seq() const { return last_seq_; }

  /// Display name for redaction; empty for anonymous or unknown authors.
  std::string display_name_of(const ReporterRef& author) const;
  PublicReport public_view(const Report& report) const;

  friend bool operator==(const PlatformState&, const PlatformState&) = default;

 private:
  void apply_reputation(const std::vector<ReputationDelta>& deltas);
  void set_status(ReportId id, const TrustState& state);

  TrustParams params_;
  std::map<UserId, UserRecord> users_;
  std::map<std::string, UserId> names_;
  std::map<ReportId, Report> reports_;
  std::map<ReportId, TrustState> trust_;
  std::map<std::pair<std::string, std::string>, ReportId> client_keys_;
  std::uint64_t next_report_id_ = 1;
  std::uint64_t last_seq_ = 0;
};

/// Rebuilds the derived state from a log. Equal logs give equal states.
PlatformState replay(std::span<const Event> events, const TrustParams& params = {});

}  // namespace civic
