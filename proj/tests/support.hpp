// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures for the test binaries: scratch directories, seeded generators, and
// quick service setup.

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "civic/crypto.hpp"
#include "civic/model.hpp"
#include "civic/service.hpp"

namespace civic::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("civic-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + random_hex(4));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline CategorySet random_categories(Rng& rng) {
  CategorySet s;
  const std::size_t k = 1 + pick(rng, 3);
  for (std::size_t i = 0; i < k; ++i) s.insert(kAllCategories[pick(rng, kCategoryCount)]);
  return s;
}

inline Timestamp at_ms(std::int64_t ms) { return Timestamp{std::chrono::milliseconds(ms)}; }

inline ReportDraft make_draft(CategorySet cats, double lat, double lon, std::string key = {}) {
  ReportDraft d;
  d.categories = cats;
  d.location = GeoPoint{lat, lon, LocationSource::gps};
  d.text = "smoke near the junction";
  d.client_key = key.empty() ? random_hex(16) : std::move(key);
  d.client_time = at_ms(1'780'000'000'000);
  return d;
}

/// Test clock: advances one second per reading so timestamps are distinct and ordered.
struct SteppingClock {
  std::shared_ptr<std::atomic<std::int64_t>> ms = std::make_shared<std::atomic<std::int64_t>>(1'780'000'000'000);
  Timestamp operator()() const { return at_ms(ms->fetch_add(1000)); }
};

/// Small PBKDF2 cost and no fsync: the tests care about behaviour, not hardening.
inline ServiceConfig quick_config(const std::filesystem::path& dir) {
  ServiceConfig c;
  c.data_dir = dir;
  c.pbkdf2_iterations = 1000;
  c.durability = Durability::none;
  c.clock = SteppingClock{};
  return c;
}

}  // namespace civic::testing
