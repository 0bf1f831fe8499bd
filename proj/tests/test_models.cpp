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

#include <cmath>

#include "rentlab/common.hpp"
#include "rentlab/models.hpp"

namespace rentlab {
namespace {

FeatureMatrix linear_problem(int n, int p, double noise, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.x.resize(n, p);
  m.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) m.x(i, j) = standard_normal(rng) + 0.5 * j;
    m.y(i) = 2.0;
    for (int j = 0; j < p; ++j) m.y(i) += (j + 1) * (j % 2 ? -1.0 : 1.0) * m.x(i, j);
    m.y(i) += noise * standard_normal(rng);
  }
  for (int j = 0; j < p; ++j) m.feature_names.push_back("x" + std::to_string(j));
  return m;
}

FeatureMatrix nonlinear_problem(int n, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.x.resize(n, 3);
  m.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) m.x(i, j) = 4.0 * uniform_unit(rng) - 2.0;
    m.y(i) = (m.x(i, 0) > 0.0 ? 3.0 : -1.0) + m.x(i, 1) * m.x(i, 2) + 0.1 * standard_normal(rng);
  }
  m.feature_names = {"a", "b", "c"};
  return m;
}

TEST(OlsTest, MatchesQrSolution) {
  const FeatureMatrix m = linear_problem(100, 4, 0.5, 41);
  const LinearModel fit = fit_ols(m);
  Eigen::MatrixXd d(100, 5);
  d.col(0).setOnes();
  d.rightCols(4) = m.x;
  const Eigen::VectorXd beta = d.colPivHouseholderQr().solve(m.y);
  EXPECT_NEAR(fit.intercept, beta(0), 1e-9);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(fit.coefficients(j), beta(j + 1), 1e-9);
}

TEST(OlsTest, SingularDesignThrows) {
  FeatureMatrix m = linear_problem(30, 3, 0.1, 42);
  m.x.col(2) = 2.0 * m.x.col(0);
  EXPECT_THROW(fit_ols(m), RankDeficiencyError);
  m.x.col(2).setConstant(1.0);
  EXPECT_THROW(fit_ols(m), RankDeficiencyError);
}

TEST(ElasticNetTest, RidgeMatchesClosedForm) {
  const FeatureMatrix m = linear_problem(40, 5, 1.0, 43);
  const double alpha = 0.3;
  const LinearModel fit = fit_elastic_net(m, alpha, 0.0, 1e-13, 100000);
  const Eigen::MatrixXd xc = m.x.rowwise() - m.x.colwise().mean();
  const Eigen::VectorXd yc = m.y.array() - m.y.mean();
  const Eigen::MatrixXd a = xc.transpose() * xc + 40.0 * alpha * Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd closed = a.ldlt().solve(xc.transpose() * yc);
  EXPECT_LT((fit.coefficients - closed).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.intercept, m.y.mean() - m.x.colwise().mean().dot(fit.coefficients), 1e-9);
}

TEST(ElasticNetTest, LassoZeroesEverythingAboveAlphaMax) {
  const FeatureMatrix m = linear_problem(50, 4, 1.0, 44);
  const Eigen::MatrixXd xc = m.x.rowwise() - m.x.colwise().mean();
  const Eigen::VectorXd yc = m.y.array() - m.y.mean();
  const double alpha_max = (xc.transpose() * yc).cwiseAbs().maxCoeff() / 50.0;
  EXPECT_TRUE(fit_elastic_net(m, alpha_max * 1.0001, 1.0).coefficients.isZero());
  EXPECT_FALSE(fit_elastic_net(m, alpha_max * 0.9, 1.0).coefficients.isZero());
}

TEST(ElasticNetTest, CoordinatePerturbationDoesNotImprove) {
  const FeatureMatrix m = linear_problem(60, 6, 2.0, 45);
  for (double l1 : {0.0, 0.3, 0.7, 1.0}) {
    const LinearModel fit = fit_elastic_net(m, 0.2, l1, 1e-12, 100000);
    const double best = elastic_net_objective(m, fit.intercept, fit.coefficients, 0.2, l1);
    for (int j = 0; j < 6; ++j) {
      for (double d : {-1e-4, 1e-4}) {
        Eigen::VectorXd c = fit.coefficients;
        c(j) += d;
        EXPECT_GE(elastic_net_objective(m, fit.intercept, c, 0.2, l1), best - 1e-12);
      }
    }
  }
}

TEST(ElasticNetTest, ReportsNonConvergence) {
  const FeatureMatrix m = linear_problem(60, 6, 2.0, 46);
  EXPECT_FALSE(fit_elastic_net(m, 0.01, 0.5, 1e-15, 1).converged);
  EXPECT_THROW(fit_elastic_net(m, -1.0, 0.5), ArgumentError);
  EXPECT_THROW(fit_elastic_net(m, 0.1, 1.5), ArgumentError);
}

TEST(TreeTest, RootSplitMatchesExhaustiveSearch) {
  const FeatureMatrix m = nonlinear_problem(120, 47);
  const Tree t = fit_tree(m, 1, 2);
  ASSERT_EQ(t.nodes.size(), 3u);
  double best_gain = -1.0;
  int best_feature = -1;
  const double total = (m.y.array() - m.y.mean()).square().sum();
  for (int j = 0; j < 3; ++j) {
    for (int r = 0; r < m.rows(); ++r) {
      const double thr = m.x(r, j);
      double sl = 0, sr = 0, ql = 0, qr = 0;
      int nl = 0, nr = 0;
      for (int i = 0; i < m.rows(); ++i) {
        if (m.x(i, j) <= thr) {
          sl += m.y(i), ql += m.y(i) * m.y(i), ++nl;
        } else {
          sr += m.y(i), qr += m.y(i) * m.y(i), ++nr;
        }
      }
      if (nl == 0 || nr == 0) continue;
      const double sse = (ql - sl * sl / nl) + (qr - sr * sr / nr);
      if (total - sse > best_gain) best_gain = total - sse, best_feature = j;
    }
  }
  EXPECT_EQ(t.nodes[0].feature, best_feature);
  EXPECT_NEAR(t.nodes[0].sse_decrease, best_gain, 1e-8 * total);
}

TEST(TreeTest, FitsStepFunctionExactlyAndRespectsDepth) {
  FeatureMatrix m;
  m.x.resize(8, 1);
  m.y.resize(8);
  for (int i = 0; i < 8; ++i) {
    m.x(i, 0) = i;
    m.y(i) = i < 3 ? 1.0 : (i < 6 ? 5.0 : 2.0);
  }
  m.feature_names = {"x"};
  const Tree deep = fit_tree(m, 10, 2);
  EXPECT_EQ(predict(FittedModel(deep), m.x), m.y);
  EXPECT_LE(fit_tree(m, 1, 2).depth(), 1);
  m.y.setConstant(3.0);
  EXPECT_EQ(fit_tree(m, 10, 2).nodes.size(), 1u);
}

TEST(ForestTest, DeterministicAndThreadInvariant) {
  const FeatureMatrix m = nonlinear_problem(200, 48);
  HyperParams hp;
  hp.n_trees = 16;
  hp.max_depth = 6;
  const ForestModel a = fit_forest(m, hp, 7, 1);
  const ForestModel b = fit_forest(m, hp, 7, 4);
  const ForestModel c = fit_forest(m, hp, 8, 1);
  EXPECT_EQ(predict(FittedModel(a), m.x), predict(FittedModel(b), m.x));
  EXPECT_NE(predict(FittedModel(a), m.x), predict(FittedModel(c), m.x));
  EXPECT_EQ(a.trees.size(), 16u);
}

TEST(GbmTest, TrainingErrorNeverIncreases) {
  const FeatureMatrix m = nonlinear_problem(200, 49);
  HyperParams hp;
  hp.n_rounds = 40;
  hp.max_depth = 3;
  hp.learning_rate = 0.2;
  const BoostedModel b = fit_gbm(m, hp);
  ASSERT_EQ(b.train_rmse.size(), 41u);
  for (std::size_t i = 1; i < b.train_rmse.size(); ++i) {
    EXPECT_LE(b.train_rmse[i], b.train_rmse[i - 1] + 1e-12);
  }
  EXPECT_DOUBLE_EQ(b.base, m.y.mean());
}

TEST(GbmTest, OneFullStepEqualsResidualTree) {
  const FeatureMatrix m = nonlinear_problem(100, 50);
  HyperParams hp;
  hp.n_rounds = 1;
  hp.max_depth = 2;
  hp.learning_rate = 1.0;
  const BoostedModel b = fit_gbm(m, hp);
  FeatureMatrix resid = m;
  resid.y = m.y.array() - m.y.mean();
  const Tree t = fit_tree(resid, 2, hp.min_samples_split);
  const Eigen::VectorXd expected = predict(FittedModel(t), m.x).array() + m.y.mean();
  EXPECT_TRUE(predict(FittedModel(b), m.x).isApprox(expected, 1e-12));
}

TEST(ModelJsonTest, RoundTripPreservesPredictions) {
  const FeatureMatrix m = nonlinear_problem(150, 51);
  HyperParams hp;
  hp.n_trees = 5;
  hp.n_rounds = 5;
  hp.max_depth = 4;
  hp.alpha = 0.05;
  for (ModelFamily f : {ModelFamily::kOls, ModelFamily::kLasso, ModelFamily::kRidge,
                        ModelFamily::kElasticNet, ModelFamily::kTree, ModelFamily::kForest,
                        ModelFamily::kGbm}) {
    const Model model = fit_model(f, m, hp, 3);
    const Model back = model_from_json(nlohmann::json::parse(to_json(model).dump()));
    EXPECT_EQ(back.family, f);
    EXPECT_EQ(back.feature_names, m.feature_names);
    EXPECT_EQ(back.predict(m), model.predict(m)) << to_string(f);
  }
  EXPECT_THROW(model_from_json(nlohmann::json{{"format", "other"}}), ArgumentError);
}

TEST(ModelTest, RejectsWrongWidthAndBadParams) {
  const FeatureMatrix m = linear_problem(30, 3, 0.1, 52);
  const Model model = fit_model(ModelFamily::kOls, m, {}, 0);
  EXPECT_THROW(model.predict(m.select(std::vector<std::string>{"x0", "x1"})), Error);
  HyperParams bad;
  bad.max_depth = -1;
  EXPECT_THROW(bad.validate(), ArgumentError);
  EXPECT_THROW(parse_family("svm"), ArgumentError);
  EXPECT_EQ(parse_family("xgboost"), ModelFamily::kGbm);
}

}  // namespace
}  // namespace rentlab
