// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/time.hpp"

#include <cctype>
#include <cstdio>

#include "civic/error.hpp"

namespace civic {

using namespace std::chrono;

Timestamp now_utc() { return time_point_cast<milliseconds>(system_clock::now()); }

std::string format_rfc3339(Timestamp t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()), static_cast<int>(hms.subseconds().count()));
  return buf;
}

namespace {

[[noreturn]] void bad_time(std::string_view text) {
  throw Error(ErrorCode::BadRequest, "invalid RFC 3339 timestamp: '" + std::string(text) + "'");
}

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
  if (pos + count > text.size()) bad_time(text);
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) bad_time(text);
    v = v * 10 + (c - '0');
  }
  pos += count;
  return v;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || (text[pos] != c && !(c == 'T' && (text[pos] == 't' || text[pos] == ' '))))
    bad_time(text);
  ++pos;
}

}  // namespace

Timestamp parse_rfc3339(std::string_view text) {
  std::size_t pos = 0;
  const int y = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int mo = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = read_digits(text, pos, 2);
  expect(text, pos, 'T');
  const int h = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int mi = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int s = read_digits(text, pos, 2);

  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int scale = 100;
    std::size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (scale > 0) millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
      ++digits;
    }
    if (digits == 0) bad_time(text);
  }

  minutes offset{0};
  if (pos >= text.size()) bad_time(text);
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '-' ? -1 : 1;
    ++pos;
    const int oh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int om = read_digits(text, pos, 2);
    offset = minutes{sign * (oh * 60 + om)};
  } else {
    bad_time(text);
  }
  if (pos != text.size()) bad_time(text);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) bad_time(text);
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{millis} - offset;
}

}  // namespace civic
