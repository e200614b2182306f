// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <vector>

#include "civic/model.hpp"

namespace civic {

enum class Vote : int { dispute = -1, support = +1 };

Vote parse_vote(int value);  // throws BadRequest for anything but +1 / -1

struct Rating {
  ReportId report_id;
  UserId rater_id;
  Vote vote = Vote::support;
  double rater_reputation_at_vote = 0.0;
  Timestamp time{};

  friend bool operator==(const Rating&, const Rating&) = default;
};

/// Tunables of the reputation model.
struct TrustParams {
  double threshold = 1.5;
  double initial_reputation = 0.5;
  double anonymous_author_weight = 0.3;
  double community_validation_bonus = 0.05;
  double admin_confirm_bonus = 0.05;
  double admin_reject_penalty = 0.10;
  double rater_agreement_delta = 0.02;

  friend bool operator==(const TrustParams&, const TrustParams&) = default;
};

struct TrustState {
  ReportId report_id;
  ReporterRef author;
  double author_reputation_at_submit = 0.0;
  std::map<UserId, Rating> ratings;  // one per rater
  double score = 0.0;
  ValidationStatus status = ValidationStatus::pending();

  friend bool operator==(const TrustState&, const TrustState&) = default;
};

/// Fresh state for a newly submitted report; score starts at the author weight.
TrustState make_trust_state(ReportId id, ReporterRef author, double author_reputation_at_submit);

/// author_reputation_at_submit + sum(vote * rater_reputation_at_vote), summed in rater-id order
/// so that an incrementally maintained score and a replayed one agree bit for bit.
double trust_score(const TrustState& state);

/// Replaces any earlier rating by the same rater. Status is left alone.
/// Throws UnknownReport, SelfRating, ReportRejected.
TrustState apply_rating(TrustState state, const Rating& rating);

struct ReputationDelta {
  UserId user;
  double delta = 0.0;

  friend bool operator==(const ReputationDelta&, const ReputationDelta&) = default;
};

struct TrustOutcome {
  TrustState state;
  std::vector<ReputationDelta> deltas;  // to be applied with clamp_reputation
};

/// Community evaluation. Validates when score >= threshold, never rejects.
/// Throws NotPending.
TrustOutcome evaluate(TrustState state, double threshold, const TrustParams& params = {});

enum class Verdict { confirm, reject };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view label);

/// Admin override. Confirm: pending -> validated(admin); reject: pending|validated -> rejected(admin).
/// Author and raters are rewarded or penalised according to agreement with the verdict.
/// Throws NotAdmin, NotPending (confirm on validated), ReportRejected.
TrustOutcome admin_verdict(TrustState state, Verdict verdict, const ReporterProfile& admin,
                           const TrustParams& params = {});

}  // namespace civic
