// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Canonical JSON encoding of the domain types. Object keys are emitted in sorted order
// (nlohmann::json default), so equal values always serialize to equal bytes.

#include <json.hpp>

#include "civic/geo.hpp"
#include "civic/model.hpp"
#include "civic/trust.hpp"

namespace civic {

using Json = nlohmann::json;

// Decoders throw Error(BadRequest) (or the more specific validation code) on malformed input.

void to_json(Json& j, const CategorySet& cats);
void from_json(const Json& j, CategorySet& cats);
void to_json(Json& j, const GeoPoint& p);
void from_json(const Json& j, GeoPoint& p);
void to_json(Json& j, const AttachmentMeta& a);
void from_json(const Json& j, AttachmentMeta& a);
void to_json(Json& j, const ReportDraft& d);
void from_json(const Json& j, ReportDraft& d);
void to_json(Json& j, const ValidationStatus& s);
void from_json(const Json& j, ValidationStatus& s);
void to_json(Json& j, const Report& r);
void from_json(const Json& j, Report& r);
void to_json(Json& j, const PublicReport& r);
void from_json(const Json& j, PublicReport& r);
void to_json(Json& j, const ReporterProfile& p);
void from_json(const Json& j, ReporterProfile& p);
void to_json(Json& j, const Rating& r);
void from_json(const Json& j, Rating& r);
void to_json(Json& j, const CellIndex& c);
void to_json(Json& j, const MapCell& c);
void from_json(const Json& j, MapCell& c);
void to_json(Json& j, const CategoryShare& s);
void to_json(Json& j, const SummaryDocument& d);

Json timestamp_json(Timestamp t);
Timestamp timestamp_from_json(const Json& j);

/// Field lookup that reports a missing or mistyped field as BadRequest.
const Json& require_field(const Json& j, const char* name);

/// Parses a request body; BadRequest on syntax errors or a non-object document.
Json parse_body(std::string_view body);

}  // namespace civic
