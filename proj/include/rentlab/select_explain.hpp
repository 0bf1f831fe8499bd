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

// Feature selection (univariate F-statistics, k-best, greedy forward
// selection) and model explanations (interventional Shapley values, forest
// impurity importance).

#ifndef RENTLAB_SELECT_EXPLAIN_HPP_
#define RENTLAB_SELECT_EXPLAIN_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rentlab/features.hpp"
#include "rentlab/models.hpp"

namespace rentlab {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Upper tail P(F > f) of the F(d1, d2) distribution.
double f_distribution_sf(double f, double d1, double d2);

struct FeatureScore {
  std::string feature;
  double score = 0.0;    // +infinity when the feature is perfectly correlated
  double p_value = 1.0;
  bool infinite = false;
  bool zero_variance = false;
};

// F = r^2 / (1 - r^2) * (n - 2) per feature, r the Pearson correlation with
// the target. Returned in feature order. Throws ArgumentError for n < 3 and
// UndefinedMetricError for a constant target.
std::vector<FeatureScore> f_scores(const FeatureMatrix& m);

struct KBest {
  std::vector<std::string> features;  // descending score, ties by name
  bool truncated = false;             // k exceeded the feature count
};

KBest select_k_best(std::span<const FeatureScore> scores, int k = 40);

struct ForwardOptions {
  int max_features = 85;
  double min_rel_improvement = 1e-3;  // validation MSE drop / intercept-only MSE
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct ForwardSelection {
  std::vector<std::string> features;  // selection order
  // Validation MSE before any feature and after each accepted step.
  std::vector<double> validation_mse;
};

// Greedy forward selection by OLS validation MSE on a seeded split.
ForwardSelection forward_select(const FeatureMatrix& m, const ForwardOptions& options = {});

// OLS validation MSE of one feature subset on the split forward_select uses.
// Rank-deficient subsets score +infinity.
double subset_validation_mse(const FeatureMatrix& m, std::span<const Eigen::Index> subset,
                             double train_fraction = 0.8, std::uint64_t seed = 0);

struct ShapExplanation {
  double base_value = 0.0;
  std::vector<double> values;
  double prediction = 0.0;
  bool exact = true;
};

inline constexpr int kMaxExactShapFeatures = 12;

// kAuto enumerates exactly up to kMaxExactShapFeatures features.
enum class ShapMode { kAuto, kExact, kSampled };

// v(S) = mean over background rows of the prediction with S taken from the
// instance and the rest from the background row. Exact enumeration for up to
// 12 features, otherwise `budget` permutations (in antithetic pairs) drawn
// from a stream seeded by `seed`. Throws ArgumentError on an empty background.
ShapExplanation shapley_values(const FittedModel& model,
                               const Eigen::Ref<const Eigen::RowVectorXd>& instance,
                               const Eigen::MatrixXd& background, int budget = 256,
                               std::uint64_t seed = 0, ShapMode mode = ShapMode::kAuto);

struct ShapRanking {
  std::vector<std::pair<std::string, double>> mean_abs;  // descending
  std::vector<ShapExplanation> rows;
};

// Mean |phi| per feature over the rows of `data`. Row r uses the stream
// derive_seed(seed, r), so results do not depend on `threads`.
ShapRanking shap_ranking(const FittedModel& model, const FeatureMatrix& data,
                         const Eigen::MatrixXd& background, int budget = 256,
                         std::uint64_t seed = 0, int threads = 0,
                         ShapMode mode = ShapMode::kAuto);

// Summed SSE decrease per feature, normalized within each tree, averaged over
// trees and normalized to sum 1. Descending, ties by feature order.
std::vector<std::pair<std::string, double>> impurity_importance(
    std::span<const Tree> trees, std::span<const std::string> feature_names);
std::vector<std::pair<std::string, double>> impurity_importance(
    const ForestModel& forest, std::span<const std::string> feature_names);

// feature,<value_header> CSV, at most `top` rows (0: all).
void write_ranking_csv(const std::vector<std::pair<std::string, double>>& ranking,
                       std::string_view value_header, std::ostream& out, std::size_t top = 0);
void write_scores_csv(std::span<const FeatureScore> scores, std::ostream& out);

nlohmann::json to_json(const ShapExplanation& e, std::span<const std::string> names);

}  // namespace rentlab

#endif  // RENTLAB_SELECT_EXPLAIN_HPP_
