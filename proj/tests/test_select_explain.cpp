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
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "rentlab/common.hpp"
#include "rentlab/eval.hpp"
#include "rentlab/select_explain.hpp"
#include "rentlab/synthgen.hpp"

namespace rentlab {
namespace {

TEST(IncompleteBetaTest, MatchesBoost) {
  Rng rng(61);
  for (int i = 0; i < 500; ++i) {
    const double a = 0.1 + 50.0 * uniform_unit(rng);
    const double b = 0.1 + 50.0 * uniform_unit(rng);
    const double x = uniform_unit(rng);
    EXPECT_NEAR(incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-10)
        << a << ' ' << b << ' ' << x;
  }
  EXPECT_DOUBLE_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
}

TEST(FDistributionTest, SurvivalMatchesBoost) {
  for (double d2 : {5.0, 30.0, 500.0}) {
    const boost::math::fisher_f dist(1.0, d2);
    for (double f : {0.01, 0.5, 1.0, 4.0, 20.0}) {
      EXPECT_NEAR(f_distribution_sf(f, 1.0, d2), boost::math::cdf(boost::math::complement(dist, f)),
                  1e-10);
    }
  }
}

FeatureMatrix correlated_problem(std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  const int n = 80;
  m.x.resize(n, 4);
  m.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) m.x(i, j) = standard_normal(rng);
    m.y(i) = 3.0 * m.x(i, 0) + 1.0 * m.x(i, 1) + standard_normal(rng);
  }
  m.feature_names = {"strong", "weak", "noise_a", "noise_b"};
  return m;
}

TEST(FScoreTest, MatchesCorrelationFormula) {
  const FeatureMatrix m = correlated_problem(62);
  const auto scores = f_scores(m);
  const double n = static_cast<double>(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Eigen::VectorXd xc = m.x.col(j).array() - m.x.col(j).mean();
    const Eigen::VectorXd yc = m.y.array() - m.y.mean();
    const double r = xc.dot(yc) / std::sqrt(xc.squaredNorm() * yc.squaredNorm());
    const double f = r * r / (1.0 - r * r) * (n - 2.0);
    const auto& s = scores[static_cast<std::size_t>(j)];
    EXPECT_NEAR(s.score, f, 1e-9 * std::max(1.0, f));
    const boost::math::fisher_f dist(1.0, n - 2.0);
    EXPECT_NEAR(s.p_value, boost::math::cdf(boost::math::complement(dist, f)), 1e-10);
  }
}

TEST(FScoreTest, FlagsDegenerateColumns) {
  FeatureMatrix m = correlated_problem(63);
  m.x.col(2).setConstant(1.0);
  m.x.col(3) = m.y;
  const auto scores = f_scores(m);
  EXPECT_TRUE(scores[2].zero_variance);
  EXPECT_TRUE(scores[3].infinite);
  EXPECT_DOUBLE_EQ(scores[3].p_value, 0.0);
  m.y.setConstant(2.0);
  EXPECT_THROW(f_scores(m), UndefinedMetricError);
}

TEST(KBestTest, OrdersByScoreAndTruncates) {
  const FeatureMatrix m = correlated_problem(64);
  const auto scores = f_scores(m);
  const KBest two = select_k_best(scores, 2);
  EXPECT_EQ(two.features, (std::vector<std::string>{"strong", "weak"}));
  EXPECT_FALSE(two.truncated);
  const KBest all = select_k_best(scores, 40);
  EXPECT_TRUE(all.truncated);
  EXPECT_EQ(all.features.size(), 4u);
}

TEST(ForwardSelectTest, RecoversSparseSupport) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SparseProblem sp = generate_sparse_linear(200, 10, 3, 0.1, seed);
    ForwardOptions opt;
    opt.seed = seed;
    const ForwardSelection fs = forward_select(sp.matrix, opt);
    const std::set<std::string> chosen(fs.features.begin(), fs.features.end());
    EXPECT_EQ(chosen, std::set<std::string>(sp.informative.begin(), sp.informative.end()));
    for (std::size_t i = 1; i < fs.validation_mse.size(); ++i) {
      EXPECT_LT(fs.validation_mse[i], fs.validation_mse[i - 1]);
    }
  }
}

TEST(ForwardSelectTest, FirstStepIsBestSingleton) {
  const SparseProblem sp = generate_sparse_linear(150, 8, 4, 0.5, 65);
  ForwardOptions opt;
  opt.seed = 66;
  const ForwardSelection fs = forward_select(sp.matrix, opt);
  double best = 1e300;
  std::string best_name;
  for (Eigen::Index j = 0; j < sp.matrix.cols(); ++j) {
    const std::vector<Eigen::Index> subset{j};
    const double v = subset_validation_mse(sp.matrix, subset, opt.train_fraction, opt.seed);
    if (v < best) best = v, best_name = sp.matrix.feature_names[static_cast<std::size_t>(j)];
  }
  ASSERT_FALSE(fs.features.empty());
  EXPECT_EQ(fs.features[0], best_name);
  EXPECT_NEAR(fs.validation_mse[1], best, 1e-12 * best);
}

TEST(ForwardSelectTest, StopsAtMaxFeatures) {
  const SparseProblem sp = generate_sparse_linear(100, 10, 6, 0.1, 67);
  ForwardOptions opt;
  opt.max_features = 2;
  EXPECT_EQ(forward_select(sp.matrix, opt).features.size(), 2u);
}

// Brute-force Shapley values from the permutation definition.
std::vector<double> brute_shapley(const FittedModel& model, const Eigen::RowVectorXd& x,
                                  const Eigen::MatrixXd& bg) {
  const auto p = static_cast<int>(x.size());
  auto value = [&](const std::vector<char>& in) {
    Eigen::MatrixXd z = bg;
    for (int j = 0; j < p; ++j) {
      if (in[static_cast<std::size_t>(j)]) z.col(j).setConstant(x(j));
    }
    return predict(model, z).mean();
  };
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(static_cast<std::size_t>(p), 0.0);
  int count = 0;
  do {
    std::vector<char> in(static_cast<std::size_t>(p), 0);
    double prev = value(in);
    for (int j : order) {
      in[static_cast<std::size_t>(j)] = 1;
      const double cur = value(in);
      phi[static_cast<std::size_t>(j)] += cur - prev;
      prev = cur;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& v : phi) v /= count;
  return phi;
}

TEST(ShapleyTest, ExactMatchesPermutationDefinition) {
  Rng rng(68);
  FeatureMatrix m;
  m.x.resize(150, 5);
  m.y.resize(150);
  for (int i = 0; i < 150; ++i) {
    for (int j = 0; j < 5; ++j) m.x(i, j) = standard_normal(rng);
    m.y(i) = m.x(i, 0) * m.x(i, 1) + std::abs(m.x(i, 2)) + 0.1 * standard_normal(rng);
  }
  m.feature_names = {"a", "b", "c", "d", "e"};
  HyperParams hp;
  hp.n_rounds = 10;
  hp.max_depth = 3;
  const FittedModel model = fit_gbm(m, hp);
  const Eigen::MatrixXd bg = m.x.topRows(12);
  for (int r = 100; r < 103; ++r) {
    const Eigen::RowVectorXd x = m.x.row(r);
    const ShapExplanation e = shapley_values(model, x, bg, 0, 0, ShapMode::kExact);
    const auto oracle = brute_shapley(model, x, bg);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(e.values[j], oracle[j], 1e-10);
    EXPECT_NEAR(std::accumulate(e.values.begin(), e.values.end(), 0.0),
                e.prediction - e.base_value, 1e-10);
  }
}

TEST(ShapleyTest, SampledIsDeterministicAndEfficient) {
  LinearModel lin;
  lin.intercept = 1.0;
  lin.coefficients = Eigen::VectorXd::LinSpaced(14, -3.0, 3.0);
  Rng rng(69);
  Eigen::MatrixXd bg(10, 14);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 14; ++j) bg(i, j) = standard_normal(rng);
  }
  const Eigen::RowVectorXd x = Eigen::RowVectorXd::Ones(14);
  const FittedModel model = lin;
  const ShapExplanation a = shapley_values(model, x, bg, 16, 5);
  const ShapExplanation b = shapley_values(model, x, bg, 16, 5);
  EXPECT_FALSE(a.exact);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NEAR(std::accumulate(a.values.begin(), a.values.end(), 0.0), a.prediction - a.base_value,
              1e-9);
  // For an additive model every permutation gives the same contributions.
  const Eigen::RowVectorXd mean = bg.colwise().mean();
  for (int j = 0; j < 14; ++j) {
    EXPECT_NEAR(a.values[static_cast<std::size_t>(j)], lin.coefficients(j) * (1.0 - mean(j)), 1e-9);
  }
}

TEST(ShapRankingTest, ThreadInvariantAndSorted) {
  const FeatureMatrix m = correlated_problem(70);
  HyperParams hp;
  hp.n_trees = 8;
  hp.max_depth = 4;
  const FittedModel forest = fit_forest(m, hp, 1, 1);
  const Eigen::MatrixXd bg = m.x.topRows(8);
  const ShapRanking a = shap_ranking(forest, m, bg, 8, 3, 1);
  const ShapRanking b = shap_ranking(forest, m, bg, 8, 3, 4);
  EXPECT_EQ(a.mean_abs, b.mean_abs);
  EXPECT_EQ(a.mean_abs.front().first, "strong");
  for (std::size_t i = 1; i < a.mean_abs.size(); ++i) {
    EXPECT_GE(a.mean_abs[i - 1].second, a.mean_abs[i].second);
  }
  std::ostringstream os;
  write_ranking_csv(a.mean_abs, "mean_abs_shap", os, 2);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(ImpurityImportanceTest, NormalizedAndRanksSignal) {
  const FeatureMatrix m = correlated_problem(71);
  HyperParams hp;
  hp.n_trees = 10;
  hp.max_depth = 5;
  const ForestModel forest = fit_forest(m, hp, 2, 1);
  const auto imp = impurity_importance(forest, m.feature_names);
  double total = 0.0;
  for (const auto& [name, v] : imp) {
    EXPECT_GE(v, 0.0);
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(imp.front().first, "strong");
}

}  // namespace
}  // namespace rentlab
