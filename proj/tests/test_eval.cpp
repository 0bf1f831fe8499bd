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
#include <sstream>

#include "rentlab/common.hpp"
#include "rentlab/eval.hpp"

namespace rentlab {
namespace {

FeatureMatrix noisy_linear(int n, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.x.resize(n, 3);
  m.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) m.x(i, j) = standard_normal(rng);
    m.y(i) = 1.0 + 2.0 * m.x(i, 0) - m.x(i, 1) + 0.3 * standard_normal(rng);
  }
  m.feature_names = {"a", "b", "c"};
  return m;
}

TEST(MetricTest, KnownValues) {
  const Eigen::Vector4d y(1.0, 2.0, 3.0, 4.0);
  const Eigen::Vector4d yhat(1.0, 2.0, 3.0, 6.0);
  EXPECT_DOUBLE_EQ(mae(y, yhat), 0.5);
  EXPECT_DOUBLE_EQ(rmse(y, yhat), 1.0);
  EXPECT_DOUBLE_EQ(r_squared(y, yhat), 1.0 - 4.0 / 5.0);
  EXPECT_DOUBLE_EQ(r_squared(y, y), 1.0);
  const Eigen::Vector4d mean = Eigen::Vector4d::Constant(2.5);
  EXPECT_DOUBLE_EQ(r_squared(y, mean), 0.0);
}

TEST(MetricTest, Identities) {
  Rng rng(81);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd y(20), yhat(20);
    for (int i = 0; i < 20; ++i) y(i) = standard_normal(rng), yhat(i) = standard_normal(rng);
    const Metrics m = compute_metrics(y, yhat);
    EXPECT_LE(m.mae, m.rmse + 1e-15);
    const double mse = (y - yhat).squaredNorm() / 20.0;
    const double var = (y.array() - y.mean()).square().mean();
    EXPECT_NEAR(m.r_squared, 1.0 - mse / var, 1e-12);
    EXPECT_LE(m.r_squared, 1.0);
  }
}

TEST(MetricTest, Errors) {
  const Eigen::Vector2d two(1.0, 2.0);
  const Eigen::Vector3d three(1.0, 2.0, 3.0);
  EXPECT_THROW(rmse(two, three), ArgumentError);
  EXPECT_THROW(mae(Eigen::VectorXd(), Eigen::VectorXd()), ArgumentError);
  EXPECT_THROW(r_squared(Eigen::Vector2d(3.0, 3.0), two), UndefinedMetricError);
}

TEST(SplitTest, PartitionsDeterministically) {
  const SplitIndices a = split_indices(101, 0.8, 5);
  const SplitIndices b = split_indices(101, 0.8, 5);
  const SplitIndices c = split_indices(101, 0.8, 6);
  EXPECT_EQ(a.train, b.train);
  EXPECT_NE(a.train, c.train);
  EXPECT_EQ(a.train.size(), 81u);
  std::set<Eigen::Index> all(a.train.begin(), a.train.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 101u);
  EXPECT_EQ(*all.rbegin(), 100);
  EXPECT_THROW(split_indices(3, 0.99, 1), ArgumentError);
}

TEST(SplitTest, TrainTestSplitCopiesRows) {
  const FeatureMatrix m = noisy_linear(30, 82);
  const TrainTest tt = train_test_split(m, 0.7, 3);
  ASSERT_EQ(tt.train.rows() + tt.test.rows(), 30);
  for (std::size_t i = 0; i < tt.indices.test.size(); ++i) {
    EXPECT_EQ(tt.test.x.row(static_cast<Eigen::Index>(i)), m.x.row(tt.indices.test[i]));
    EXPECT_EQ(tt.test.y(static_cast<Eigen::Index>(i)), m.y(tt.indices.test[i]));
  }
}

TEST(KfoldTest, BalancedPartition) {
  for (std::size_t n : {10u, 23u, 100u}) {
    const FoldPlan plan = kfold_plan(n, 4, 9);
    const auto sizes = plan.fold_sizes();
    ASSERT_EQ(sizes.size(), 4u);
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) -
                  *std::min_element(sizes.begin(), sizes.end()),
              1u);
    for (int f = 0; f < 4; ++f) {
      EXPECT_EQ(plan.rows_in(f).size() + plan.rows_not_in(f).size(), n);
    }
  }
  EXPECT_THROW(kfold_plan(5, 1, 0), ArgumentError);
  EXPECT_THROW(kfold_plan(3, 4, 0), ArgumentError);
}

TEST(ParamGridTest, JsonRoundTripAndValidation) {
  const auto j = nlohmann::json::parse(R"({"alpha": [0.1, 1.0], "max_depth": 3})");
  const ParamGrid grid = param_grid_from_json(j);
  ASSERT_EQ(grid.size(), 2u);
  EXPECT_EQ(to_json(grid), nlohmann::json::parse(R"({"alpha": [0.1, 1.0], "max_depth": [3.0]})"));
  EXPECT_THROW(param_grid_from_json(nlohmann::json::parse(R"({"alpha": []})")), ArgumentError);
  EXPECT_THROW(param_grid_from_json(nlohmann::json::parse(R"({"bogus": [1]})")), Error);
  EXPECT_THROW(param_grid_from_json(nlohmann::json::parse(R"({"alpha": ["x"]})")), ArgumentError);
}

TEST(RandomSearchTest, DeterministicThreadInvariantAndBest) {
  const FeatureMatrix m = noisy_linear(120, 83);
  const ParamGrid grid{{"alpha", {0.001, 0.01, 0.1, 1.0, 5.0}}};
  const SearchResult a = random_search(m, ModelFamily::kLasso, grid, 4, 3, 11, {}, 1);
  const SearchResult b = random_search(m, ModelFamily::kLasso, grid, 4, 3, 11, {}, 4);
  ASSERT_EQ(a.trials.size(), 4u);
  EXPECT_EQ(a.best_index, b.best_index);
  EXPECT_EQ(a.cv_score, b.cv_score);
  std::set<double> sampled;
  for (const auto& t : a.trials) {
    sampled.insert(t.config.alpha);
    EXPECT_LE(t.r_squared, a.cv_score);
  }
  EXPECT_EQ(sampled.size(), 4u);
  EXPECT_EQ(a.best.alpha, a.trials[a.best_index].config.alpha);
}

TEST(CompareModelsTest, ReportsEveryConfigurationInOrder) {
  const FeatureMatrix m = noisy_linear(150, 84);
  const TrainTest tt = train_test_split(m, 0.8, 1);
  std::vector<ModelConfig> configs(2);
  configs[0].name = "OLS";
  configs[1].name = "Boost";
  configs[1].family = ModelFamily::kGbm;
  configs[1].params.n_rounds = 20;
  const Comparison c = compare_models(tt.train, tt.test, configs, 2, 2, 3, 1);
  ASSERT_EQ(c.reports.size(), 2u);
  EXPECT_EQ(c.reports[0].model_name, "OLS");
  EXPECT_GT(c.reports[0].r_squared, 0.9);
  EXPECT_EQ(c.reports[0].feature_set, m.feature_names);
  std::ostringstream os;
  write_report_table_csv(c.reports, os);
  std::istringstream is(os.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "Metric,OLS,Boost");
  EXPECT_EQ(lines[1].rfind("R-Squared,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("Mean Absolute Error,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("Root Mean Squared Error,", 0), 0u);
}

}  // namespace
}  // namespace rentlab
