// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "civic/model.hpp"

namespace civic {

inline constexpr double kDefaultCellSize = 0.005;  // degrees, ~550 m at Dhaka

struct CellIndex {
  std::int64_t row = 0;  // floor(lat / cell_size)
  std::int64_t col = 0;  // floor(lon / cell_size)
  double cell_size = kDefaultCellSize;

  auto operator<=>(const CellIndex&) const = default;
};

/// Throws BadCellSize unless cell_size is finite and > 0.
CellIndex cell_of(const GeoPoint& point, double cell_size);

struct BBox {
  double min_lat = -90.0;
  double min_lon = -180.0;
  double max_lat = 90.0;
  double max_lon = 180.0;

  bool contains(const GeoPoint& p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Throws BadBBox for inverted, non-finite or out-of-range rectangles.
void check_bbox(const BBox& bbox);

using CategoryCounts = std::array<std::uint64_t, kCategoryCount>;

struct MapCell {
  CellIndex index;
  CategoryCounts counts{};
  std::uint64_t total = 0;
  Timestamp latest_time{};

  std::uint64_t count(Category c) const { return counts[static_cast<std::size_t>(c)]; }
  friend bool operator==(const MapCell&, const MapCell&) = default;
};

/// One cell per occupied grid square, ordered by (row, col). A report with k categories bumps k
/// counters and adds 1 to total. With a filter, only reports carrying a filtered category are
/// counted and only the filtered counters move.
std::vector<MapCell> aggregate_map(std::span<const Report> reports, const BBox& bbox, double cell_size,
                                   const std::optional<CategorySet>& category_filter = std::nullopt);

struct CategoryShare {
  Category category = Category::other;
  double count = 0.0;  // fractional: 1/k per tag of a k-category report
  double fraction = 0.0;

  friend bool operator==(const CategoryShare&, const CategoryShare&) = default;
};

/// Non-zero categories only, largest share first (ties in declaration order).
std::vector<CategoryShare> category_distribution(std::span<const Report> reports);

struct Period {
  Timestamp start{};
  Timestamp end{};  // exclusive
};

enum class Detail { summarized, detailed };

std::string_view to_string(Detail d);
Detail parse_detail(std::string_view label);

inline constexpr std::size_t kSummaryTopCells = 5;

struct SummaryDocument {
  Period period;
  Detail detail = Detail::summarized;
  std::uint64_t report_count = 0;
  std::vector<std::pair<Category, std::uint64_t>> totals;  // all categories, largest first
  std::vector<MapCell> top_cells;
  std::vector<PublicReport> reports;  // detailed only, oldest first
};

using Redactor = std::function<PublicReport(const Report&)>;

/// Only validated reports with server_time in [start, end) are counted. Throws BadPeriod.
SummaryDocument build_summary(std::span<const Report> reports, const Period& period, Detail detail,
                              double cell_size, const Redactor& redactor);

/// Printable rendering with fixed-width columns (layout documented in README).
std::string render_text(const SummaryDocument& doc);

}  // namespace civic
