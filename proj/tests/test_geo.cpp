// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "civic/geo.hpp"
#include "civic/wire.hpp"
#include "support.hpp"

using namespace civic;
using civic::testing::at_ms;
using civic::testing::pick;
using civic::testing::Rng;
using civic::testing::uniform;

namespace {

Report make_report(std::uint64_t id, CategorySet cats, double lat, double lon, std::int64_t ms = 0) {
  Report r;
  r.report_id = ReportId{id};
  r.draft = civic::testing::make_draft(cats, lat, lon);
  r.server_time = at_ms(1'780'000'000'000 + ms);
  r.status = ValidationStatus::validated(Provenance::community);
  return r;
}

std::vector<Report> random_reports(Rng& rng, std::size_t n, double lat0, double lon0, double spread) {
  std::vector<Report> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make_report(i + 1, civic::testing::random_categories(rng), lat0 + uniform(rng, -spread, spread),
                              lon0 + uniform(rng, -spread, spread), static_cast<std::int64_t>(pick(rng, 100000))));
  }
  return out;
}

// Brute-force oracle: one linear pass per report over an unsorted cell list.
struct OracleCell {
  std::int64_t row, col;
  CategoryCounts counts{};
  std::uint64_t total = 0;
  Timestamp latest{};
};

std::vector<OracleCell> brute_force(const std::vector<Report>& reports, const BBox& b, double cs,
                                    std::optional<Category> only) {
  std::vector<OracleCell> cells;
  for (const Report& r : reports) {
    const double lat = r.draft.location.lat, lon = r.draft.location.lon;
    if (lat < b.min_lat || lat > b.max_lat || lon < b.min_lon || lon > b.max_lon) continue;
    if (only && !r.draft.categories.contains(*only)) continue;
    const auto row = static_cast<std::int64_t>(std::floor(lat / cs));
    const auto col = static_cast<std::int64_t>(std::floor(lon / cs));
    OracleCell* hit = nullptr;
    for (auto& c : cells) {
      if (c.row == row && c.col == col) hit = &c;
    }
    if (hit == nullptr) {
      cells.push_back({row, col});
      hit = &cells.back();
    }
    hit->total += 1;
    for (std::size_t k = 0; k < kCategoryCount; ++k) {
      if (r.draft.categories.contains(kAllCategories[k]) && (!only || kAllCategories[k] == *only)) hit->counts[k] += 1;
    }
    if (r.server_time > hit->latest) hit->latest = r.server_time;
  }
  return cells;
}

bool same_cells(const std::vector<MapCell>& got, const std::vector<OracleCell>& want) {
  if (got.size() != want.size()) return false;
  for (const OracleCell& w : want) {
    const auto it = std::find_if(got.begin(), got.end(),
                                 [&](const MapCell& g) { return g.index.row == w.row && g.index.col == w.col; });
    if (it == got.end() || it->counts != w.counts || it->total != w.total || it->latest_time != w.latest) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("geo") {
  TEST_CASE("cell_of uses floor on both axes") {
    CHECK(cell_of({23.7465, 90.3760}, 0.005) == CellIndex{4749, 18075, 0.005});
    CHECK(cell_of({-0.001, -0.001}, 0.005) == CellIndex{-1, -1, 0.005});
    CHECK_THROWS_AS(cell_of({0, 0}, 0.0), Error);
    CHECK_THROWS_AS(cell_of({0, 0}, -1.0), Error);
  }

  TEST_CASE("multi-category report counts once in total") {
    const std::vector<Report> rs{make_report(1, {Category::garbage, Category::air}, 23.7465, 90.3760)};
    const auto cells = aggregate_map(rs, BBox{}, 0.005);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].total == 1);
    CHECK(cells[0].count(Category::garbage) == 1);
    CHECK(cells[0].count(Category::air) == 1);
  }

  TEST_CASE("bbox validation") {
    CHECK_THROWS_AS(aggregate_map({}, BBox{10, 0, 5, 1}, 0.005), Error);
    CHECK_THROWS_AS(aggregate_map({}, BBox{-91, 0, 5, 1}, 0.005), Error);
    CHECK(aggregate_map({}, BBox{}, 0.005).empty());
  }

  TEST_CASE("property: oracle equivalence and conservation") {
    Rng rng(31);
    for (int round = 0; round < 40; ++round) {
      const double cs = std::array{0.001, 0.005, 0.01, 0.3, 1.0}[pick(rng, 5)];
      const auto reports = random_reports(rng, 1 + pick(rng, 1000), 23.75, 90.4, pick(rng, 2) ? 0.05 : 20.0);
      BBox b;
      if (round % 2) b = {23.70 + uniform(rng, -0.05, 0.02), 90.35 + uniform(rng, -0.05, 0.02), 23.80, 90.45};

      const auto cells = aggregate_map(reports, b, cs);
      CHECK(same_cells(cells, brute_force(reports, b, cs, std::nullopt)));

      const auto in_box = std::count_if(reports.begin(), reports.end(),
                                        [&](const Report& r) { return b.contains(r.draft.location); });
      std::uint64_t sum = 0;
      for (const auto& c : cells) sum += c.total;
      CHECK(sum == static_cast<std::uint64_t>(in_box));
      CHECK(std::is_sorted(cells.begin(), cells.end(),
                           [](const MapCell& x, const MapCell& y) { return x.index < y.index; }));
    }
  }

  TEST_CASE("property: filter consistency") {
    Rng rng(32);
    for (int round = 0; round < 30; ++round) {
      const auto reports = random_reports(rng, 400, 23.75, 90.4, 0.03);
      const auto all = aggregate_map(reports, BBox{}, 0.005);
      for (Category c : kAllCategories) {
        const auto filtered = aggregate_map(reports, BBox{}, 0.005, CategorySet{c});
        CHECK(same_cells(filtered, brute_force(reports, BBox{}, 0.005, c)));
        std::size_t nonzero = 0;
        for (const MapCell& u : all) {
          const std::uint64_t want = u.count(c);
          if (want == 0) continue;
          ++nonzero;
          const auto it = std::find_if(filtered.begin(), filtered.end(),
                                       [&](const MapCell& f) { return f.index == u.index; });
          REQUIRE(it != filtered.end());
          CHECK(it->total == want);
          CHECK(it->count(c) == want);
        }
        CHECK(filtered.size() == nonzero);
      }
    }
  }

  TEST_CASE("category distribution") {
    const std::vector<Report> rs{make_report(1, {Category::garbage}, 1, 1),
                                 make_report(2, {Category::garbage, Category::air}, 1, 1)};
    const auto d = category_distribution(rs);
    REQUIRE(d.size() == 2);
    CHECK(d[0].category == Category::garbage);
    CHECK(d[0].count == 1.5);
    CHECK(d[0].fraction == 0.75);
    CHECK(d[1].fraction == 0.25);
    CHECK(category_distribution({}).empty());

    Rng rng(33);
    for (int round = 0; round < 500; ++round) {
      const auto reports = random_reports(rng, 1 + pick(rng, 200), 0, 0, 1);
      const auto shares = category_distribution(reports);
      double sum = 0;
      for (const auto& s : shares) sum += s.fraction;
      CHECK(std::abs(sum - 1.0) < 1e-9);
      double count = 0;
      for (const auto& s : shares) count += s.count;
      CHECK(count == doctest::Approx(static_cast<double>(reports.size())).epsilon(1e-12));
    }
  }

  TEST_CASE("summary document") {
    const Redactor redactor = [](const Report& r) { return redact(r, "someone"); };
    const Period p{at_ms(1'780'000'000'000), at_ms(1'780'000'100'000)};

    const auto empty = build_summary({}, p, Detail::summarized, 0.005, redactor);
    CHECK(empty.report_count == 0);
    CHECK(empty.totals.size() == kCategoryCount);
    for (const auto& [c, n] : empty.totals) CHECK(n == 0);

    std::vector<Report> rs{make_report(2, {Category::air}, 23.7, 90.4, 500), make_report(1, {Category::garbage}, 23.7, 90.4, 100),
                           make_report(3, {Category::garbage}, 23.7, 90.4, 900)};
    rs[2].status = ValidationStatus::pending();
    const auto detailed = build_summary(rs, p, Detail::detailed, 0.005, redactor);
    REQUIRE(detailed.reports.size() == 2);
    CHECK(detailed.reports[0].report_id == ReportId{1});
    CHECK(detailed.reports[1].report_id == ReportId{2});
    CHECK(build_summary(rs, p, Detail::summarized, 0.005, redactor).reports.empty());

    CHECK_THROWS_AS(build_summary(rs, Period{p.end, p.start}, Detail::summarized, 0.005, redactor), Error);
    CHECK_THROWS_AS(build_summary(rs, Period{p.start, p.start}, Detail::summarized, 0.005, redactor), Error);

    const std::string text = render_text(detailed);
    CHECK(text.find("CATEGORY") != std::string::npos);
    CHECK(text.find("BUSIEST CELLS") != std::string::npos);
    CHECK(text.find("REPORTS") != std::string::npos);
    CHECK(render_text(detailed) == text);
    CHECK(Json(detailed).dump() == Json(build_summary(rs, p, Detail::detailed, 0.005, redactor)).dump());
  }
}
