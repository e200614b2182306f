// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "civic/error.hpp"
#include "civic/time.hpp"

namespace civic {

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

enum class Category : std::uint8_t { garbage, air, water, noise, light, visual, other };

inline constexpr std::size_t kCategoryCount = 7;
inline constexpr std::array<Category, kCategoryCount> kAllCategories{
    Category::garbage, Category::air,    Category::water, Category::noise,
    Category::light,   Category::visual, Category::other};

std::string_view to_string(Category c);

/// Case-insensitive exact match over the closed set; "waste" is an alias of garbage.
/// Throws Error(UnknownCategory).
Category parse_category(std::string_view label);

/// Duplicate-free set of categories, iterated in declaration order.
class CategorySet {
 public:
  CategorySet() = default;
  CategorySet(std::initializer_list<Category> cats) {
    for (Category c : cats) insert(c);
  }

  void insert(Category c) { bits_ |= bit(c); }
  bool contains(Category c) const { return (bits_ & bit(c)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  bool intersects(const CategorySet& other) const { return (bits_ & other.bits_) != 0; }
  std::vector<Category> to_vector() const;

  friend bool operator==(const CategorySet&, const CategorySet&) = default;

 private:
  static constexpr std::uint8_t bit(Category c) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c)); }
  std::uint8_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// Locations and media
// ---------------------------------------------------------------------------

enum class LocationSource : std::uint8_t { gps, network, manual };

std::string_view to_string(LocationSource s);
LocationSource parse_location_source(std::string_view label);

struct GeoPoint {
  double lat = 0.0;  // degrees WGS84
  double lon = 0.0;
  LocationSource source = LocationSource::gps;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

enum class AttachmentKind : std::uint8_t { photo, video };

std::string_view to_string(AttachmentKind k);
AttachmentKind parse_attachment_kind(std::string_view label);

inline constexpr std::size_t kDigestHexLength = 64;  // SHA-256

struct AttachmentMeta {
  AttachmentKind kind = AttachmentKind::photo;
  std::string content_hash;
  std::uint64_t size_bytes = 0;
  std::string media_ref;

  friend bool operator==(const AttachmentMeta&, const AttachmentMeta&) = default;
};

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

struct UserId {
  std::string value;
  auto operator<=>(const UserId&) const = default;
};

struct ReportId {
  std::uint64_t value = 0;
  auto operator<=>(const ReportId&) const = default;
};

enum class Role : std::uint8_t { citizen, admin };

std::string_view to_string(Role r);
Role parse_role(std::string_view label);

/// Author of a report: a registered user, or the shared anonymous principal when empty.
struct ReporterRef {
  std::optional<UserId> user;

  static ReporterRef anonymous() { return {}; }
  static ReporterRef registered(UserId id) { return {std::move(id)}; }
  bool is_anonymous() const { return !user.has_value(); }

  friend bool operator==(const ReporterRef&, const ReporterRef&) = default;
};

inline constexpr std::string_view kAnonymousMarker = "anonymous";

struct ReporterProfile {
  UserId user_id;
  std::string display_name;
  double reputation = 0.5;
  Role role = Role::citizen;

  friend bool operator==(const ReporterProfile&, const ReporterProfile&) = default;
};

double clamp_reputation(double r);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxTextLength = 2000;
inline constexpr std::size_t kMaxClientKeyLength = 64;

struct ReportDraft {
  CategorySet categories;
  GeoPoint location;
  std::string text;
  std::optional<AttachmentMeta> attachment;
  bool anonymous = false;
  std::string client_key;
  Timestamp client_time{};

  friend bool operator==(const ReportDraft&, const ReportDraft&) = default;
};

enum class Provenance : std::uint8_t { community, admin };

std::string_view to_string(Provenance p);

class ValidationStatus {
 public:
  enum class State : std::uint8_t { pending, validated, rejected };

  static ValidationStatus pending() { return {}; }
  static ValidationStatus validated(Provenance by) { return {State::validated, by}; }
  static ValidationStatus rejected(Provenance by) { return {State::rejected, by}; }

  State state() const { return state_; }
  std::optional<Provenance> provenance() const { return provenance_; }
  bool is_pending() const { return state_ == State::pending; }
  bool is_validated() const { return state_ == State::validated; }
  bool is_rejected() const { return state_ == State::rejected; }

  friend bool operator==(const ValidationStatus&, const ValidationStatus&) = default;

 private:
  ValidationStatus() = default;
  ValidationStatus(State s, Provenance p) : state_(s), provenance_(p) {}

  State state_ = State::pending;
  std::optional<Provenance> provenance_;
};

std::string_view to_string(ValidationStatus::State s);
ValidationStatus::State parse_status_state(std::string_view label);

/// The allowed status graph: pending->validated, pending->rejected, validated->rejected.
bool is_allowed_transition(ValidationStatus::State from, ValidationStatus::State to);

struct Report {
  ReportId report_id;
  ReportDraft draft;
  ReporterRef author;
  Timestamp server_time{};
  ValidationStatus status = ValidationStatus::pending();

  friend bool operator==(const Report&, const Report&) = default;
};

/// What leaves the server for a report. Carries no user ids or credentials.
struct PublicReport {
  ReportId report_id;
  CategorySet categories;
  GeoPoint location;
  std::string text;
  std::optional<AttachmentKind> attachment_kind;
  ValidationStatus status = ValidationStatus::pending();
  Timestamp server_time{};
  std::string author;  // display_name or kAnonymousMarker

  friend bool operator==(const PublicReport&, const PublicReport&) = default;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// First violated invariant of the draft, if any. Checks run in field order:
/// categories, location, text, attachment, client_key.
std::optional<Error> find_violation(const ReportDraft& draft);

/// Returns the draft unchanged, or throws the first violation.
const ReportDraft& validate_draft(const ReportDraft& draft);

/// `author_display_name` is ignored for anonymous reports.
PublicReport redact(const Report& report, std::string_view author_display_name);

/// Redaction of an already-public view; the identity on well-formed input.
PublicReport redact(const PublicReport& report);

}  // namespace civic

template <>
struct std::hash<civic::UserId> {
  std::size_t operator()(const civic::UserId& id) const noexcept { return std::hash<std::string>{}(id.value); }
};

template <>
struct std::hash<civic::ReportId> {
  std::size_t operator()(const civic::ReportId& id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
