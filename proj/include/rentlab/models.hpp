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

// Regression model families: least squares, elastic-net family via cyclic
// coordinate descent, CART regression trees, bagged forests and
// squared-loss gradient boosting.

#ifndef RENTLAB_MODELS_HPP_
#define RENTLAB_MODELS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rentlab/features.hpp"

namespace rentlab {

enum class Penalty { kNone, kL1, kL2, kElastic };

std::string_view to_string(Penalty p);

struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  Penalty penalty = Penalty::kNone;
  double alpha = 0.0;
  double l1_ratio = 0.0;
  // Coordinate descent bookkeeping; OLS reports converged with 0 iterations.
  bool converged = true;
  int iterations = 0;
};

// Flat node storage; children are indices into Tree::nodes. Split nodes send
// x[feature] <= threshold to the left child.
struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;        // mean training target in the node
  std::size_t samples = 0;   // training rows reaching the node (with repeats)
  double sse_decrease = 0.0; // SSE(node) - SSE(left) - SSE(right) for splits

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int depth() const;
  std::size_t leaf_count() const;
  // Index of the leaf a row falls into.
  int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct ForestModel {
  std::vector<Tree> trees;
  int max_features = 0;
  std::uint64_t seed = 0;
};

struct BoostedModel {
  double base = 0.0;
  std::vector<Tree> trees;
  double learning_rate = 0.1;
  // Training RMSE after initialization and after each round.
  std::vector<double> train_rmse;
};

using FittedModel = std::variant<LinearModel, Tree, ForestModel, BoostedModel>;

enum class ModelFamily { kOls, kLasso, kRidge, kElasticNet, kTree, kForest, kGbm };

std::string_view to_string(ModelFamily f);
// Accepts the names produced by to_string plus "xgboost"/"boosted" for kGbm and
// "random_forest" for kForest. Throws ArgumentError.
ModelFamily parse_family(std::string_view name);

struct HyperParams {
  double alpha = 1.0;
  double l1_ratio = 0.5;
  int n_trees = 100;
  int max_depth = 12;
  int min_samples_split = 2;
  int max_features = 0;  // 0: ceil(p/3) for forests, p for single trees
  double learning_rate = 0.1;
  int n_rounds = 100;
  // Not tunable through grids.
  double tol = 1e-6;
  int max_iter = 1000;
  bool bootstrap = true;

  // Throws ArgumentError naming the first out-of-range field.
  void validate() const;
};

nlohmann::json to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const nlohmann::json& j, HyperParams base = {});
// Sets one field by name ("alpha", "n_trees", ...). Throws ArgumentError.
void set_hyperparam(HyperParams& hp, std::string_view name, double value);

// Normal equations on column-centered data, solved by Cholesky. Throws
// RankDeficiencyError when the design is singular.
LinearModel fit_ols(const FeatureMatrix& m);

// Minimizes (1/2n)||y - X b - b0||^2 + alpha (l1_ratio ||b||_1 +
// (1 - l1_ratio)/2 ||b||_2^2) with an unpenalized intercept.
LinearModel fit_elastic_net(const FeatureMatrix& m, double alpha, double l1_ratio,
                            double tol = 1e-6, int max_iter = 1000);

// The objective above, for tests and diagnostics.
double elastic_net_objective(const FeatureMatrix& m, double intercept,
                             const Eigen::VectorXd& coef, double alpha, double l1_ratio);

struct TreeOptions {
  int max_depth = 12;
  int min_samples_split = 2;
  int max_features = 0;  // 0: all features
};

Tree fit_tree(const FeatureMatrix& m, int max_depth, int min_samples_split);
Tree fit_tree(const FeatureMatrix& m, const TreeOptions& options);

// Trees are fitted on bootstrap samples (unless hp.bootstrap is false) with a
// random feature subset per split. Tree t draws from a stream derived from
// (seed, t), so the result does not depend on `threads`.
ForestModel fit_forest(const FeatureMatrix& m, const HyperParams& hp, std::uint64_t seed,
                       int threads = 0);

BoostedModel fit_gbm(const FeatureMatrix& m, const HyperParams& hp);

double predict_row(const FittedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& row);
// Throws ArgumentError on a feature-count mismatch.
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& x);
Eigen::VectorXd predict(const FittedModel& model, const FeatureMatrix& m);

// Number of input features the model was trained on; trees only know the
// largest feature index they use, so this may under-report for them.
std::optional<Eigen::Index> expected_features(const FittedModel& model);

// A fitted model with the metadata needed to use it standalone.
struct Model {
  ModelFamily family = ModelFamily::kOls;
  HyperParams params;
  std::vector<std::string> feature_names;
  FittedModel fitted;

  Eigen::VectorXd predict(const FeatureMatrix& m) const;
};

Model fit_model(ModelFamily family, const FeatureMatrix& m, const HyperParams& hp,
                std::uint64_t seed, int threads = 0);

// Self-describing JSON: family tag, hyperparameters, feature names and
// coefficients or nested tree nodes. Round trips are prediction-identical.
nlohmann::json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

}  // namespace rentlab

#endif  // RENTLAB_MODELS_HPP_
