// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>

#include "civic/crypto.hpp"

namespace civic {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::garbage: return "garbage";
    case Category::air: return "air";
    case Category::water: return "water";
    case Category::noise: return "noise";
    case Category::light: return "light";
    case Category::visual: return "visual";
    case Category::other: return "other";
  }
  return "other";
}

Category parse_category(std::string_view label) {
  for (Category c : kAllCategories) {
    if (iequals(label, to_string(c))) return c;
  }
  if (iequals(label, "waste")) return Category::garbage;
  throw Error(ErrorCode::UnknownCategory, "unknown category '" + std::string(label) + "'");
}

std::size_t CategorySet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<Category> CategorySet::to_vector() const {
  std::vector<Category> out;
  for (Category c : kAllCategories) {
    if (contains(c)) out.push_back(c);
  }
  return out;
}

std::string_view to_string(LocationSource s) {
  switch (s) {
    case LocationSource::gps: return "gps";
    case LocationSource::network: return "network";
    case LocationSource::manual: return "manual";
  }
  return "manual";
}

LocationSource parse_location_source(std::string_view label) {
  for (auto s : {LocationSource::gps, LocationSource::network, LocationSource::manual}) {
    if (iequals(label, to_string(s))) return s;
  }
  throw Error(ErrorCode::BadRequest, "unknown location source '" + std::string(label) + "'");
}

std::string_view to_string(AttachmentKind k) { return k == AttachmentKind::photo ? "photo" : "video"; }

AttachmentKind parse_attachment_kind(std::string_view label) {
  if (iequals(label, "photo")) return AttachmentKind::photo;
  if (iequals(label, "video")) return AttachmentKind::video;
  throw Error(ErrorCode::BadAttachment, "unknown attachment kind '" + std::string(label) + "'");
}

std::string_view to_string(Role r) { return r == Role::admin ? "admin" : "citizen"; }

Role parse_role(std::string_view label) {
  if (label == "admin") return Role::admin;
  if (label == "citizen") return Role::citizen;
  throw Error(ErrorCode::BadRequest, "unknown role '" + std::string(label) + "'");
}

double clamp_reputation(double r) { return std::clamp(r, 0.0, 1.0); }

std::string_view to_string(Provenance p) { return p == Provenance::admin ? "admin" : "community"; }

std::string_view to_string(ValidationStatus::State s) {
  switch (s) {
    case ValidationStatus::State::pending: return "pending";
    case ValidationStatus::State::validated: return "validated";
    case ValidationStatus::State::rejected: return "rejected";
  }
  return "pending";
}

ValidationStatus::State parse_status_state(std::string_view label) {
  for (auto s : {ValidationStatus::State::pending, ValidationStatus::State::validated,
                 ValidationStatus::State::rejected}) {
    if (label == to_string(s)) return s;
  }
  throw Error(ErrorCode::BadRequest, "unknown status '" + std::string(label) + "'");
}

bool is_allowed_transition(ValidationStatus::State from, ValidationStatus::State to) {
  using S = ValidationStatus::State;
  return (from == S::pending && (to == S::validated || to == S::rejected)) ||
         (from == S::validated && to == S::rejected);
}

std::optional<Error> find_violation(const ReportDraft& draft) {
  if (draft.categories.empty()) {
    return Error(ErrorCode::EmptyCategories, "categories: at least one category is required");
  }
  const auto& loc = draft.location;
  if (!(loc.lat >= -90.0 && loc.lat <= 90.0) || !(loc.lon >= -180.0 && loc.lon <= 180.0)) {
    return Error(ErrorCode::BadCoordinates, "location: lat must be in [-90, 90] and lon in [-180, 180]");
  }
  if (utf8_length(draft.text) > kMaxTextLength) {
    return Error(ErrorCode::TextTooLong, "text: at most 2000 characters");
  }
  if (draft.attachment) {
    const auto& a = *draft.attachment;
    if (a.size_bytes == 0) return Error(ErrorCode::BadAttachment, "attachment: size_bytes must be positive");
    if (a.content_hash.size() != kDigestHexLength || !is_lower_hex(a.content_hash)) {
      return Error(ErrorCode::BadAttachment, "attachment: content_hash must be 64 lowercase hex chars");
    }
  }
  if (draft.client_key.empty() || draft.client_key.size() > kMaxClientKeyLength) {
    return Error(ErrorCode::BadClientKey, "client_key: must be 1-64 characters");
  }
  return std::nullopt;
}

const ReportDraft& validate_draft(const ReportDraft& draft) {
  if (auto err = find_violation(draft)) throw *err;
  return draft;
}

PublicReport redact(const Report& report, std::string_view author_display_name) {
  PublicReport out;
  out.report_id = report.report_id;
  out.categories = report.draft.categories;
  out.location = report.draft.location;
  out.text = report.draft.text;
  if (report.draft.attachment) out.attachment_kind = report.draft.attachment->kind;
  out.status = report.status;
  out.server_time = report.server_time;
  out.author = report.author.is_anonymous() ? std::string(kAnonymousMarker) : std::string(author_display_name);
  return out;
}

PublicReport redact(const PublicReport& report) { return report; }

}  // namespace civic
