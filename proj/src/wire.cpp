// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/wire.hpp"

#include <cmath>

namespace civic {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadRequest, what); }

std::string get_string(const Json& j, const char* name) {
  const Json& v = require_field(j, name);
  if (!v.is_string()) bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

double get_number(const Json& j, const char* name) {
  const Json& v = require_field(j, name);
  if (!v.is_number()) bad(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

bool get_bool(const Json& j, const char* name, bool fallback) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) bad(std::string("field '") + name + "' must be a boolean");
  return it->get<bool>();
}

}  // namespace

const Json& require_field(const Json& j, const char* name) {
  if (!j.is_object()) bad("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) bad(std::string("missing field '") + name + "'");
  return *it;
}

Json parse_body(std::string_view body) {
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) bad("request body must be a JSON object");
  return j;
}

Json timestamp_json(Timestamp t) { return format_rfc3339(t); }

Timestamp timestamp_from_json(const Json& j) {
  if (!j.is_string()) bad("timestamps must be RFC 3339 strings");
  return parse_rfc3339(j.get<std::string>());
}

void to_json(Json& j, const CategorySet& cats) {
  j = Json::array();
  for (Category c : cats.to_vector()) j.push_back(std::string(to_string(c)));
}

void from_json(const Json& j, CategorySet& cats) {
  if (!j.is_array()) bad("categories must be an array of labels");
  cats = {};
  for (const Json& label : j) {
    if (!label.is_string()) bad("categories must be an array of labels");
    cats.insert(parse_category(label.get<std::string>()));
  }
}

void to_json(Json& j, const GeoPoint& p) {
  j = Json{{"lat", p.lat}, {"lon", p.lon}, {"source", to_string(p.source)}};
}

void from_json(const Json& j, GeoPoint& p) {
  p.lat = get_number(j, "lat");
  p.lon = get_number(j, "lon");
  auto it = j.find("source");
  p.source = (it == j.end() || it->is_null()) ? LocationSource::gps
                                              : parse_location_source(get_string(j, "source"));
}

void to_json(Json& j, const AttachmentMeta& a) {
  j = Json{{"kind", to_string(a.kind)},
           {"content_hash", a.content_hash},
           {"size_bytes", a.size_bytes},
           {"media_ref", a.media_ref}};
}

void from_json(const Json& j, AttachmentMeta& a) {
  a.kind = parse_attachment_kind(get_string(j, "kind"));
  a.content_hash = get_string(j, "content_hash");
  const Json& size = require_field(j, "size_bytes");
  if (!size.is_number_integer() || size.get<std::int64_t>() < 0) bad("size_bytes must be a non-negative integer");
  a.size_bytes = size.get<std::uint64_t>();
  auto it = j.find("media_ref");
  a.media_ref = (it != j.end() && it->is_string()) ? it->get<std::string>() : std::string{};
}

void to_json(Json& j, const ReportDraft& d) {
  j = Json{{"categories", d.categories},
           {"location", d.location},
           {"text", d.text},
           {"attachment", d.attachment ? Json(*d.attachment) : Json(nullptr)},
           {"anonymous", d.anonymous},
           {"client_key", d.client_key},
           {"client_time", timestamp_json(d.client_time)}};
}

void from_json(const Json& j, ReportDraft& d) {
  from_json(require_field(j, "categories"), d.categories);
  from_json(require_field(j, "location"), d.location);
  auto text = j.find("text");
  d.text = (text == j.end() || text->is_null()) ? std::string{} : get_string(j, "text");
  auto att = j.find("attachment");
  if (att != j.end() && !att->is_null()) {
    AttachmentMeta meta;
    from_json(*att, meta);
    d.attachment = std::move(meta);
  } else {
    d.attachment.reset();
  }
  d.anonymous = get_bool(j, "anonymous", false);
  d.client_key = get_string(j, "client_key");
  auto ct = j.find("client_time");
  d.client_time = (ct == j.end() || ct->is_null()) ? Timestamp{} : timestamp_from_json(*ct);
}

void to_json(Json& j, const ValidationStatus& s) {
  j = Json{{"state", to_string(s.state())},
           {"provenance", s.provenance() ? Json(std::string(to_string(*s.provenance()))) : Json(nullptr)}};
}

void from_json(const Json& j, ValidationStatus& s) {
  const auto state = parse_status_state(get_string(j, "state"));
  if (state == ValidationStatus::State::pending) {
    s = ValidationStatus::pending();
    return;
  }
  const Provenance by = get_string(j, "provenance") == "admin" ? Provenance::admin : Provenance::community;
  s = state == ValidationStatus::State::validated ? ValidationStatus::validated(by) : ValidationStatus::rejected(by);
}

void to_json(Json& j, const Report& r) {
  j = Json{{"report_id", r.report_id.value},
           {"draft", r.draft},
           {"author", r.author.user ? Json(r.author.user->value) : Json(nullptr)},
           {"server_time", timestamp_json(r.server_time)},
           {"status", r.status}};
}

void from_json(const Json& j, Report& r) {
  r.report_id = ReportId{require_field(j, "report_id").get<std::uint64_t>()};
  from_json(require_field(j, "draft"), r.draft);
  const Json& author = require_field(j, "author");
  r.author = author.is_null() ? ReporterRef::anonymous() : ReporterRef::registered(UserId{author.get<std::string>()});
  r.server_time = timestamp_from_json(require_field(j, "server_time"));
  from_json(require_field(j, "status"), r.status);
}

void to_json(Json& j, const PublicReport& r) {
  j = Json{{"report_id", r.report_id.value},
           {"categories", r.categories},
           {"location", r.location},
           {"text", r.text},
           {"attachment_kind",
            r.attachment_kind ? Json(std::string(to_string(*r.attachment_kind))) : Json(nullptr)},
           {"status", to_string(r.status.state())},
           {"provenance",
            r.status.provenance() ? Json(std::string(to_string(*r.status.provenance()))) : Json(nullptr)},
           {"server_time", timestamp_json(r.server_time)},
           {"author", r.author}};
}

void from_json(const Json& j, PublicReport& r) {
  r.report_id = ReportId{require_field(j, "report_id").get<std::uint64_t>()};
  from_json(require_field(j, "categories"), r.categories);
  from_json(require_field(j, "location"), r.location);
  r.text = get_string(j, "text");
  const Json& kind = require_field(j, "attachment_kind");
  r.attachment_kind = kind.is_null() ? std::nullopt : std::optional(parse_attachment_kind(kind.get<std::string>()));
  Json status{{"state", require_field(j, "status")}, {"provenance", require_field(j, "provenance")}};
  from_json(status, r.status);
  r.server_time = timestamp_from_json(require_field(j, "server_time"));
  r.author = get_string(j, "author");
}

void to_json(Json& j, const ReporterProfile& p) {
  j = Json{{"user_id", p.user_id.value},
           {"display_name", p.display_name},
           {"reputation", p.reputation},
           {"role", to_string(p.role)}};
}

void from_json(const Json& j, ReporterProfile& p) {
  p.user_id = UserId{get_string(j, "user_id")};
  p.display_name = get_string(j, "display_name");
  p.reputation = get_number(j, "reputation");
  p.role = parse_role(get_string(j, "role"));
}

void to_json(Json& j, const Rating& r) {
  j = Json{{"report_id", r.report_id.value},
           {"rater_id", r.rater_id.value},
           {"vote", static_cast<int>(r.vote)},
           {"rater_reputation_at_vote", r.rater_reputation_at_vote},
           {"time", timestamp_json(r.time)}};
}

void from_json(const Json& j, Rating& r) {
  r.report_id = ReportId{require_field(j, "report_id").get<std::uint64_t>()};
  r.rater_id = UserId{get_string(j, "rater_id")};
  r.vote = parse_vote(require_field(j, "vote").get<int>());
  r.rater_reputation_at_vote = get_number(j, "rater_reputation_at_vote");
  r.time = timestamp_from_json(require_field(j, "time"));
}

void to_json(Json& j, const CellIndex& c) { j = Json{{"row", c.row}, {"col", c.col}, {"cell_size", c.cell_size}}; }

void to_json(Json& j, const MapCell& c) {
  Json counts = Json::object();
  for (Category cat : kAllCategories) counts[std::string(to_string(cat))] = c.count(cat);
  // bounds make the grid renderable without knowing the floor convention
  const double s = c.index.cell_size;
  j = Json{{"index", c.index},
           {"counts", counts},
           {"total", c.total},
           {"latest_time", timestamp_json(c.latest_time)},
           {"bounds",
            {{"min_lat", static_cast<double>(c.index.row) * s},
             {"min_lon", static_cast<double>(c.index.col) * s},
             {"max_lat", static_cast<double>(c.index.row + 1) * s},
             {"max_lon", static_cast<double>(c.index.col + 1) * s}}}};
}

void from_json(const Json& j, MapCell& c) {
  const Json& idx = require_field(j, "index");
  c.index = CellIndex{require_field(idx, "row").get<std::int64_t>(), require_field(idx, "col").get<std::int64_t>(),
                      get_number(idx, "cell_size")};
  const Json& counts = require_field(j, "counts");
  for (Category cat : kAllCategories) {
    auto it = counts.find(std::string(to_string(cat)));
    c.counts[static_cast<std::size_t>(cat)] = it == counts.end() ? 0 : it->get<std::uint64_t>();
  }
  c.total = require_field(j, "total").get<std::uint64_t>();
  c.latest_time = timestamp_from_json(require_field(j, "latest_time"));
}

void to_json(Json& j, const CategoryShare& s) {
  j = Json{{"category", to_string(s.category)},
           {"count", s.count},
           {"fraction", s.fraction},
           {"percent", std::round(s.fraction * 1000.0) / 10.0}};
}

void to_json(Json& j, const SummaryDocument& d) {
  Json totals = Json::array();
  for (const auto& [c, n] : d.totals) totals.push_back({{"category", to_string(c)}, {"count", n}});
  j = Json{{"period", {{"start", timestamp_json(d.period.start)}, {"end", timestamp_json(d.period.end)}}},
           {"detail", to_string(d.detail)},
           {"report_count", d.report_count},
           {"totals", totals},
           {"top_cells", d.top_cells}};
  if (d.detail == Detail::detailed) j["reports"] = d.reports;
}

}  // namespace civic
