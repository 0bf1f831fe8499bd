// Copyright 2026 The Rentlab Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rentlab/common.hpp"
#include "rentlab/geo.hpp"
#include "rentlab/wrangle.hpp"

namespace rentlab {
namespace {

double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

TEST(QuantileTest, MatchesSortOracle) {
  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> v(1 + uniform_index(rng, 100));
    for (auto& x : v) x = standard_normal(rng);
    const double q = uniform_unit(rng);
    EXPECT_NEAR(quantile(v, q), sorted_quantile(v, q), 1e-12);
  }
}

TEST(QuantileTest, SkipsMissingAndValidatesLevel) {
  const Cells<double> cells{3.0, std::nullopt, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(quantile(std::span<const std::optional<double>>(cells), 0.5), 2.0);
  const std::vector<double> v{1.0};
  EXPECT_THROW(quantile(v, 1.5), ArgumentError);
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), EmptyInputError);
}

TEST(IqrTest, FencesUseMultiplier) {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const Fences f = iqr_fences(v, 0.5);
  EXPECT_DOUBLE_EQ(f.q1, 3.0);
  EXPECT_DOUBLE_EQ(f.q3, 7.0);
  EXPECT_DOUBLE_EQ(f.lower, 1.0);
  EXPECT_DOUBLE_EQ(f.upper, 9.0);
}

TEST(IqrTest, RemoveOutliersKeepsOnlyFencedAndMissingRows) {
  Rng rng(22);
  Cells<double> price;
  for (int i = 0; i < 300; ++i) price.emplace_back(150.0 + 30.0 * standard_normal(rng));
  price.emplace_back(5000.0);
  price.emplace_back(std::nullopt);
  Table t(price.size());
  t.add("price", Column(price));
  WrangleReport report;
  const Fences f = iqr_fences(std::span<const std::optional<double>>(price), 0.5);
  const Table kept = remove_outliers(t, "price", 0.5, &report);
  std::size_t missing = 0;
  for (const auto& v : kept.column("price").numeric()) {
    if (!v) {
      ++missing;
      continue;
    }
    EXPECT_TRUE(f.contains(*v));
  }
  EXPECT_EQ(missing, 1u);
  ASSERT_EQ(report.entries.size(), 1u);
  EXPECT_EQ(report.entries[0].rows_affected, t.n_rows() - kept.n_rows());
  // Larger multipliers never remove more rows.
  EXPECT_GE(remove_outliers(t, "price", 1.5).n_rows(), kept.n_rows());
}

TEST(ImputeTest, GroupMeanThenGlobalMedian) {
  Table t(6);
  t.add("host_id", Column(Cells<std::int64_t>{1, 1, 1, 2, 2, 3}));
  t.add("score", Column(Cells<double>{4.0, 2.0, std::nullopt, 5.0, std::nullopt, std::nullopt}));
  const Table g = impute_group_mean(t, "score", "host_id");
  EXPECT_DOUBLE_EQ(*g.column("score").numeric()[2], 3.0);
  EXPECT_DOUBLE_EQ(*g.column("score").numeric()[4], 5.0);
  EXPECT_TRUE(g.column("score").is_missing(5));
  const Table m = impute_global_median(g, "score");
  EXPECT_DOUBLE_EQ(*m.column("score").numeric()[5], 4.0);  // median of 4,2,3,5,5
  EXPECT_EQ(m.column("score").missing_count(), 0u);
}

TEST(KnnImputeTest, MatchesBruteForceNeighbourMean) {
  Rng rng(23);
  const std::size_t n = 80;
  Cells<double> lat, lon, beds;
  for (std::size_t i = 0; i < n; ++i) {
    lat.emplace_back(30.2 + 0.2 * uniform_unit(rng));
    lon.emplace_back(-97.8 + 0.2 * uniform_unit(rng));
    if (i % 7 == 0) {
      beds.emplace_back(std::nullopt);
    } else {
      beds.emplace_back(static_cast<double>(1 + uniform_index(rng, 5)));
    }
  }
  Table t(n);
  t.add("latitude", Column(lat));
  t.add("longitude", Column(lon));
  t.add("beds", Column(beds));
  const int k = 5;
  const KnnImputation r = knn_impute_geo(t, "beds", "latitude", "longitude", k);
  for (std::size_t i = 0; i < n; ++i) {
    if (beds[i]) {
      EXPECT_EQ(r.table.column("beds").numeric()[i], beds[i]);
      continue;
    }
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (beds[j]) d.emplace_back(haversine_km({*lat[i], *lon[i]}, {*lat[j], *lon[j]}), j);
    }
    std::stable_sort(d.begin(), d.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += *beds[d[static_cast<std::size_t>(j)].second];
    EXPECT_NEAR(*r.table.column("beds").numeric()[i], sum / k, 1e-12);
  }
  EXPECT_EQ(r.cells.size(), (n + 6) / 7);
}

TEST(KnnImputeTest, FlagsShortageOfDonors) {
  Table t(3);
  t.add("latitude", Column(Cells<double>{30.0, 30.1, 30.2}));
  t.add("longitude", Column(Cells<double>{-97.0, -97.0, -97.0}));
  t.add("beds", Column(Cells<double>{1.0, std::nullopt, 3.0}));
  const KnnImputation r = knn_impute_geo(t, "beds", "latitude", "longitude", 10);
  EXPECT_TRUE(r.short_of_donors);
  EXPECT_DOUBLE_EQ(*r.table.column("beds").numeric()[1], 2.0);
  Table empty(1);
  empty.add("latitude", Column(Cells<double>{30.0}));
  empty.add("longitude", Column(Cells<double>{-97.0}));
  empty.add("beds", Column(Cells<double>{std::nullopt}));
  EXPECT_THROW(knn_impute_geo(empty, "beds", "latitude", "longitude"), EmptyInputError);
}

TEST(CalendarGapTest, BackfillsWithWeekdayMeans) {
  // Two weeks of history, then a one-week gap.
  Cells<std::int64_t> id;
  Cells<Date> date;
  Cells<double> price;
  const Date start{2023, 1, 2};  // Monday
  for (int d = 0; d < 14; ++d) {
    id.emplace_back(7);
    date.emplace_back(start.plus_days(d));
    price.emplace_back(100.0 + 10.0 * (d % 7) + (d >= 7 ? 4.0 : 0.0));
  }
  Table cal(id.size());
  cal.add("listing_id", Column(id));
  cal.add("date", Column(date));
  cal.add("price", Column(price));
  const GapSpec gap{start.plus_days(14), start.plus_days(20)};
  const Table filled = fill_calendar_gap(cal, gap);
  ASSERT_EQ(filled.n_rows(), 21u);
  for (std::size_t r = 14; r < 21; ++r) {
    const Date d = *filled.column("date").date()[r];
    EXPECT_DOUBLE_EQ(*filled.column("price").numeric()[r], 102.0 + 10.0 * d.weekday());
  }
  // Existing rows are untouched.
  EXPECT_DOUBLE_EQ(*filled.column("price").numeric()[0], 100.0);
  EXPECT_THROW(fill_calendar_gap(cal, GapSpec{gap.end, gap.start}), ArgumentError);
}

TEST(WrangleReportTest, CsvHeader) {
  WrangleReport r;
  r.add("remove_outliers", "price", 3, "multiplier=0.5");
  EXPECT_EQ(r.to_csv(), "operation,column,rows_affected,flags\nremove_outliers,price,3,multiplier=0.5\n");
}

}  // namespace
}  // namespace rentlab
