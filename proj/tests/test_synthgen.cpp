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
#include <set>

#include "rentlab/common.hpp"
#include "rentlab/synthgen.hpp"

namespace rentlab {
namespace {

GenConfig small_config(std::uint64_t seed) {
  GenConfig cfg;
  cfg.n_listings = 40;
  cfg.start = Date{2023, 1, 2};
  cfg.end = Date{2023, 4, 30};
  cfg.seed = seed;
  return cfg;
}

std::vector<double> prices(const Table& calendar) {
  std::vector<double> out;
  for (const auto& cell : calendar.column("price").text()) {
    if (cell) out.push_back(*parse_currency(*cell));
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

TEST(GenerateTest, CalendarCoversEveryListingDay) {
  const GenConfig cfg = small_config(91);
  const GeneratedData d = generate(cfg);
  EXPECT_EQ(d.listings.n_rows(), 40u);
  const auto days = static_cast<std::size_t>(cfg.end.to_days() - cfg.start.to_days() + 1);
  EXPECT_EQ(d.calendar.n_rows(), 40u * days);
  EXPECT_EQ(d.truth.review_sign.size(), d.reviews.n_rows());
  EXPECT_EQ(d.truth.listings.size(), 40u);
}

TEST(GenerateTest, NoiselessPricesMatchGroundTruth) {
  GenConfig cfg = small_config(92);
  cfg.noise_std = 0.0;
  cfg.outlier_fraction = 0.0;
  const GeneratedData d = generate(cfg);
  const auto& ids = d.calendar.column("listing_id").integer();
  const auto& dates = d.calendar.column("date").date();
  const auto& price = d.calendar.column("price").text();
  for (std::size_t r = 0; r < d.calendar.n_rows(); r += 7) {
    const double truth = ground_truth(cfg, d.truth, *ids[r], *dates[r]);
    EXPECT_NEAR(*parse_currency(*price[r]), truth, 0.005 + 1e-9);
  }
}

TEST(GenerateTest, WeekendAndPeakMonthsArePricier) {
  const GenConfig cfg = small_config(93);
  const GeneratedData d = generate(cfg);
  const auto& dates = d.calendar.column("date").date();
  const auto& price = d.calendar.column("price").text();
  std::vector<double> weekday, weekend, feb, mar;
  for (std::size_t r = 0; r < d.calendar.n_rows(); ++r) {
    if (!price[r]) continue;
    const double p = *parse_currency(*price[r]);
    (dates[r]->weekday() >= 4 && dates[r]->weekday() <= 5 ? weekend : weekday).push_back(p);
    if (dates[r]->month == 2) feb.push_back(p);
    if (dates[r]->month == 3) mar.push_back(p);
  }
  EXPECT_GT(median(weekend), median(weekday));
  EXPECT_GT(median(mar), median(feb));
}

TEST(GenerateTest, DeterministicPerSeed) {
  const GeneratedData a = generate(small_config(94));
  const GeneratedData b = generate(small_config(94));
  const GeneratedData c = generate(small_config(95));
  EXPECT_EQ(prices(a.calendar), prices(b.calendar));
  EXPECT_NE(prices(a.calendar), prices(c.calendar));
  EXPECT_EQ(a.truth.outliers, b.truth.outliers);
}

TEST(GenerateTest, PlantsOutliersAndMissingCells) {
  GenConfig cfg = small_config(96);
  cfg.outlier_fraction = 0.02;
  cfg.missing_fraction = 0.05;
  const GeneratedData d = generate(cfg);
  EXPECT_EQ(d.truth.outliers.size(),
            static_cast<std::size_t>(std::llround(0.02 * static_cast<double>(d.calendar.n_rows()))));
  EXPECT_EQ(d.calendar.column("price").missing_count(), d.truth.missing_prices);
  EXPECT_GT(d.truth.missing_prices, 0u);
}

TEST(GenConfigTest, ValidatesAndParses) {
  GenConfig cfg;
  cfg.n_listings = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = GenConfig{};
  cfg.q1 = 500.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = GenConfig{};
  cfg.peak_months = {13};
  EXPECT_THROW(cfg.validate(), ArgumentError);
  const GenConfig parsed = gen_config_from_json(
      nlohmann::json::parse(R"({"n_listings": 12, "start": "2023-01-01", "end": "2023-01-31"})"));
  EXPECT_EQ(parsed.n_listings, 12);
  EXPECT_EQ(parsed.end, (Date{2023, 1, 31}));
  EXPECT_THROW(gen_config_from_json(nlohmann::json::parse(R"({"listings": 12})")), ArgumentError);
  EXPECT_EQ(gen_config_from_json(to_json(parsed)).n_listings, 12);
}

TEST(SparseLinearTest, PlantsExactSupport) {
  const SparseProblem sp = generate_sparse_linear(100, 12, 4, 0.0, 97);
  EXPECT_EQ(sp.matrix.cols(), 12);
  EXPECT_EQ(sp.informative.size(), 4u);
  std::size_t nonzero = 0;
  for (double c : sp.coefficients) nonzero += c != 0.0;
  EXPECT_EQ(nonzero, 4u);
  const Eigen::Map<const Eigen::VectorXd> beta(sp.coefficients.data(), 12);
  EXPECT_TRUE((sp.matrix.x * beta).isApprox(sp.matrix.y, 1e-12));
  EXPECT_THROW(generate_sparse_linear(10, 3, 5, 0.1, 0), ArgumentError);
}

}  // namespace
}  // namespace rentlab
