// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/trust.hpp"

namespace civic {

Vote parse_vote(int value) {
  if (value == 1) return Vote::support;
  if (value == -1) return Vote::dispute;
  throw Error(ErrorCode::BadRequest, "vote must be +1 or -1");
}

TrustState make_trust_state(ReportId id, ReporterRef author, double author_reputation_at_submit) {
  TrustState s;
  s.report_id = id;
  s.author = std::move(author);
  s.author_reputation_at_submit = author_reputation_at_submit;
  s.score = trust_score(s);
  return s;
}

double trust_score(const TrustState& state) {
  double score = state.author_reputation_at_submit;
  for (const auto& [rater, rating] : state.ratings) {
    score += static_cast<int>(rating.vote) * rating.rater_reputation_at_vote;
  }
  return score;
}

TrustState apply_rating(TrustState state, const Rating& rating) {
  if (rating.report_id != state.report_id) {
    throw Error(ErrorCode::UnknownReport, "rating targets report " + std::to_string(rating.report_id.value));
  }
  if (state.author.user && *state.author.user == rating.rater_id) {
    throw Error(ErrorCode::SelfRating, "authors cannot rate their own report");
  }
  if (state.status.is_rejected()) {
    throw Error(ErrorCode::ReportRejected, "report " + std::to_string(state.report_id.value) + " was rejected");
  }
  state.ratings.insert_or_assign(rating.rater_id, rating);
  state.score = trust_score(state);
  return state;
}

TrustOutcome evaluate(TrustState state, double threshold, const TrustParams& params) {
  if (!state.status.is_pending()) {
    throw Error(ErrorCode::NotPending, "report " + std::to_string(state.report_id.value) + " is not pending");
  }
  TrustOutcome out{std::move(state), {}};
  if (trust_score(out.state) >= threshold) {
    out.state.status = ValidationStatus::validated(Provenance::community);
    if (out.state.author.user) {
      out.deltas.push_back({*out.state.author.user, params.community_validation_bonus});
    }
  }
  return out;
}

std::string_view to_string(Verdict v) { return v == Verdict::confirm ? "confirm" : "reject"; }

Verdict parse_verdict(std::string_view label) {
  if (label == "confirm") return Verdict::confirm;
  if (label == "reject") return Verdict::reject;
  throw Error(ErrorCode::BadRequest, "verdict must be 'confirm' or 'reject'");
}

TrustOutcome admin_verdict(TrustState state, Verdict verdict, const ReporterProfile& admin,
                           const TrustParams& params) {
  if (admin.role != Role::admin) {
    throw Error(ErrorCode::NotAdmin, "verdicts require the admin role");
  }
  if (state.status.is_rejected()) {
    throw Error(ErrorCode::ReportRejected, "report " + std::to_string(state.report_id.value) + " was rejected");
  }
  if (verdict == Verdict::confirm && !state.status.is_pending()) {
    throw Error(ErrorCode::NotPending, "report " + std::to_string(state.report_id.value) + " is already validated");
  }

  TrustOutcome out{std::move(state), {}};
  const bool confirm = verdict == Verdict::confirm;
  out.state.status = confirm ? ValidationStatus::validated(Provenance::admin)
                             : ValidationStatus::rejected(Provenance::admin);

  if (out.state.author.user) {
    out.deltas.push_back({*out.state.author.user, confirm ? params.admin_confirm_bonus : -params.admin_reject_penalty});
  }
  const Vote agreeing = confirm ? Vote::support : Vote::dispute;
  for (const auto& [rater, rating] : out.state.ratings) {
    out.deltas.push_back(
        {rater, rating.vote == agreeing ? params.rater_agreement_delta : -params.rater_agreement_delta});
  }
  return out;
}

}  // namespace civic
