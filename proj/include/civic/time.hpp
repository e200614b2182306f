// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace civic {

/// UTC instant with millisecond resolution; the wire form is RFC 3339 ("2016-12-05T10:15:00.000Z").
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();

std::string format_rfc3339(Timestamp t);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z" and numeric offsets ("+06:00").
/// Throws Error(BadRequest) on anything else.
Timestamp parse_rfc3339(std::string_view text);

}  // namespace civic
