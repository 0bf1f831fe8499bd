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

// Regression metrics, seeded splits, k-fold plans, random hyperparameter
// search and the model comparison report.

#ifndef RENTLAB_EVAL_HPP_
#define RENTLAB_EVAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rentlab/features.hpp"
#include "rentlab/models.hpp"

namespace rentlab {

// Throw ArgumentError on length mismatch or empty input.
double rmse(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& yhat);
double mae(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& yhat);
// Throws UndefinedMetricError when y is constant.
double r_squared(const Eigen::Ref<const Eigen::VectorXd>& y,
                 const Eigen::Ref<const Eigen::VectorXd>& yhat);

struct Metrics {
  double r_squared = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
};

Metrics compute_metrics(const Eigen::Ref<const Eigen::VectorXd>& y,
                        const Eigen::Ref<const Eigen::VectorXd>& yhat);

struct SplitIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

// Seeded shuffle; the first round(n * train_fraction) shuffled rows train.
// Throws ArgumentError when either side would be empty.
SplitIndices split_indices(Eigen::Index n, double train_fraction, std::uint64_t seed);

struct TrainTest {
  FeatureMatrix train;
  FeatureMatrix test;
  SplitIndices indices;
};

TrainTest train_test_split(const FeatureMatrix& m, double train_fraction = 0.8,
                           std::uint64_t seed = 0);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // fold of each row

  std::vector<std::size_t> fold_sizes() const;
  std::vector<Eigen::Index> rows_in(int fold) const;
  std::vector<Eigen::Index> rows_not_in(int fold) const;
};

// Shuffled round-robin assignment; fold sizes differ by at most one.
// Throws ArgumentError unless 2 <= k <= n.
FoldPlan kfold_plan(std::size_t n, int k, std::uint64_t seed);

struct EvalReport {
  std::string model_name;
  ModelFamily family = ModelFamily::kOls;
  double r_squared = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  HyperParams config;
  std::vector<std::string> feature_set;
  std::optional<double> cv_score;
};

// Ordered so sampled configurations are reproducible.
using ParamGrid = std::vector<std::pair<std::string, std::vector<double>>>;

ParamGrid param_grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParamGrid& grid);

struct SearchResult {
  HyperParams best;
  double cv_score = 0.0;  // mean validation R² of the best trial
  std::size_t best_index = 0;
  std::vector<EvalReport> trials;  // cross-validated means, sample order
};

// Samples n_samples configurations (without replacement when the grid has at
// most 10 * n_samples combinations) and scores each by mean validation R² over
// a k-fold plan. Best: highest score, then lower RMSE, then sample order.
SearchResult random_search(const FeatureMatrix& m, ModelFamily family, const ParamGrid& grid,
                           int n_samples, int k, std::uint64_t seed,
                           const HyperParams& base = {}, int threads = 0);

struct ModelConfig {
  std::string name;  // column label in the report
  ModelFamily family = ModelFamily::kOls;
  HyperParams params;
  ParamGrid grid;  // searched when non-empty
};

std::string display_name(ModelFamily family);

struct Comparison {
  std::vector<EvalReport> reports;
  std::vector<Model> models;
};

// Fits each configuration on train (after a search when it has a grid, refit
// on all of train) and evaluates on test.
Comparison compare_models(const FeatureMatrix& train, const FeatureMatrix& test,
                          std::span<const ModelConfig> configs, std::uint64_t seed,
                          int search_samples = 10, int cv_folds = 5, int threads = 0);

// Rows R-Squared, Mean Absolute Error, Root Mean Squared Error; one column per
// model.
void write_report_table_csv(std::span<const EvalReport> reports, std::ostream& out);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(std::span<const EvalReport> reports);

}  // namespace rentlab

#endif  // RENTLAB_EVAL_HPP_
