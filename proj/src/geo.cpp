// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace civic {

CellIndex cell_of(const GeoPoint& point, double cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorCode::BadCellSize, "cell_size must be a positive number of degrees");
  }
  return {static_cast<std::int64_t>(std::floor(point.lat / cell_size)),
          static_cast<std::int64_t>(std::floor(point.lon / cell_size)), cell_size};
}

void check_bbox(const BBox& b) {
  const bool finite = std::isfinite(b.min_lat) && std::isfinite(b.min_lon) && std::isfinite(b.max_lat) &&
                      std::isfinite(b.max_lon);
  if (!finite || b.min_lat > b.max_lat || b.min_lon > b.max_lon || b.min_lat < -90.0 || b.max_lat > 90.0 ||
      b.min_lon < -180.0 || b.max_lon > 180.0) {
    throw Error(ErrorCode::BadBBox, "bbox must satisfy -90<=min_lat<=max_lat<=90 and -180<=min_lon<=max_lon<=180");
  }
}

std::vector<MapCell> aggregate_map(std::span<const Report> reports, const BBox& bbox, double cell_size,
                                   const std::optional<CategorySet>& category_filter) {
  check_bbox(bbox);
  cell_of({}, cell_size);  // validates cell_size even for empty input

  std::map<CellIndex, MapCell> cells;
  for (const Report& r : reports) {
    const auto& loc = r.draft.location;
    if (!bbox.contains(loc)) continue;
    if (category_filter && !category_filter->intersects(r.draft.categories)) continue;

    const CellIndex idx = cell_of(loc, cell_size);
    auto [it, inserted] = cells.try_emplace(idx);
    MapCell& cell = it->second;
    if (inserted) cell.index = idx;
    for (Category c : r.draft.categories.to_vector()) {
      if (!category_filter || category_filter->contains(c)) ++cell.counts[static_cast<std::size_t>(c)];
    }
    ++cell.total;
    cell.latest_time = std::max(cell.latest_time, r.server_time);
  }

  std::vector<MapCell> out;
  out.reserve(cells.size());
  for (auto& [idx, cell] : cells) out.push_back(std::move(cell));
  return out;
}

std::vector<CategoryShare> category_distribution(std::span<const Report> reports) {
  std::array<double, kCategoryCount> counts{};
  for (const Report& r : reports) {
    const auto cats = r.draft.categories.to_vector();
    if (cats.empty()) continue;
    const double share = 1.0 / static_cast<double>(cats.size());
    for (Category c : cats) counts[static_cast<std::size_t>(c)] += share;
  }

  double total = 0.0;
  for (double c : counts) total += c;

  std::vector<CategoryShare> out;
  if (total <= 0.0) return out;
  for (Category c : kAllCategories) {
    const double n = counts[static_cast<std::size_t>(c)];
    if (n > 0.0) out.push_back({c, n, n / total});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

std::string_view to_string(Detail d) { return d == Detail::detailed ? "detailed" : "summarized"; }

Detail parse_detail(std::string_view label) {
  if (label == "detailed") return Detail::detailed;
  if (label == "summarized") return Detail::summarized;
  throw Error(ErrorCode::BadRequest, "detail must be 'detailed' or 'summarized'");
}

SummaryDocument build_summary(std::span<const Report> reports, const Period& period, Detail detail,
                              double cell_size, const Redactor& redactor) {
  if (!(period.start < period.end)) {
    throw Error(ErrorCode::BadPeriod, "period start must be before end");
  }

  std::vector<Report> selected;
  for (const Report& r : reports) {
    if (r.status.is_validated() && r.server_time >= period.start && r.server_time < period.end) {
      selected.push_back(r);
    }
  }
  std::sort(selected.begin(), selected.end(), [](const Report& a, const Report& b) {
    return std::tie(a.server_time, a.report_id) < std::tie(b.server_time, b.report_id);
  });

  SummaryDocument doc;
  doc.period = period;
  doc.detail = detail;
  doc.report_count = selected.size();

  CategoryCounts counts{};
  for (const Report& r : selected) {
    for (Category c : r.draft.categories.to_vector()) ++counts[static_cast<std::size_t>(c)];
  }
  for (Category c : kAllCategories) doc.totals.emplace_back(c, counts[static_cast<std::size_t>(c)]);
  std::stable_sort(doc.totals.begin(), doc.totals.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  doc.top_cells = aggregate_map(selected, BBox{}, cell_size);
  std::stable_sort(doc.top_cells.begin(), doc.top_cells.end(),
                   [](const MapCell& a, const MapCell& b) { return a.total > b.total; });
  if (doc.top_cells.size() > kSummaryTopCells) doc.top_cells.resize(kSummaryTopCells);

  if (detail == Detail::detailed) {
    doc.reports.reserve(selected.size());
    for (const Report& r : selected) doc.reports.push_back(redactor(r));
  }
  return doc;
}

namespace {

std::string categories_label(const CategorySet& cats) {
  std::string out;
  for (Category c : cats.to_vector()) {
    if (!out.empty()) out += ',';
    out += to_string(c);
  }
  return out;
}

std::string one_line(std::string_view text) {
  std::string out(text);
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\n' || c == '\r' || c == '\t'; }, ' ');
  return out;
}

}  // namespace

std::string render_text(const SummaryDocument& doc) {
  std::ostringstream os;
  char line[256];

  os << "POLLUTION REPORT SUMMARY (" << to_string(doc.detail) << ")\n";
  os << "Period: " << format_rfc3339(doc.period.start) << " .. " << format_rfc3339(doc.period.end) << "\n";
  os << "Validated reports: " << doc.report_count << "\n\n";

  os << "CATEGORY    COUNT  SHARE\n";
  std::uint64_t tags = 0;
  for (const auto& [c, n] : doc.totals) tags += n;
  for (const auto& [c, n] : doc.totals) {
    const double pct = tags == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(tags);
    std::snprintf(line, sizeof(line), "%-10s %6llu %5.1f%%\n", std::string(to_string(c)).c_str(),
                  static_cast<unsigned long long>(n), pct);
    os << line;
  }

  os << "\nBUSIEST CELLS\n";
  os << "      ROW        COL  CELL_DEG  TOTAL\n";
  for (const MapCell& cell : doc.top_cells) {
    std::snprintf(line, sizeof(line), "%9lld %10lld %9.4f %6llu\n", static_cast<long long>(cell.index.row),
                  static_cast<long long>(cell.index.col), cell.index.cell_size,
                  static_cast<unsigned long long>(cell.total));
    os << line;
  }

  if (doc.detail == Detail::detailed) {
    os << "\nREPORTS\n";
    os << "      ID  SERVER_TIME               LAT         LON         CATEGORIES            AUTHOR            "
          "TEXT\n";
    for (const PublicReport& r : doc.reports) {
      std::snprintf(line, sizeof(line), "%8llu  %-24s %11.6f %11.6f  %-20s  %-16s  ",
                    static_cast<unsigned long long>(r.report_id.value), format_rfc3339(r.server_time).c_str(),
                    r.location.lat, r.location.lon, categories_label(r.categories).c_str(), r.author.c_str());
      os << line << one_line(r.text) << "\n";
    }
  }
  return os.str();
}

}  // namespace civic
