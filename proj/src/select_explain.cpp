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

#include "rentlab/select_explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "rentlab/common.hpp"
#include "rentlab/eval.hpp"
#include "rentlab/tabular.hpp"

namespace rentlab {

// ---------------------------------------------------------------------------
// F distribution
// ---------------------------------------------------------------------------

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("incomplete_beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("incomplete_beta: x must be in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_distribution_sf(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw ArgumentError("f_distribution_sf: bad degrees of freedom");
  if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

// ---------------------------------------------------------------------------
// Univariate scores
// ---------------------------------------------------------------------------

std::vector<FeatureScore> f_scores(const FeatureMatrix& m) {
  const Eigen::Index n = m.rows();
  if (n < 3) throw ArgumentError("f_scores: need at least 3 rows");
  const Eigen::VectorXd yc = m.y.array() - m.y.mean();
  const double syy = yc.squaredNorm();
  if (!(syy > 0.0)) throw UndefinedMetricError("f_scores: target has zero variance");
  const double dof = static_cast<double>(n - 2);
  std::vector<FeatureScore> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    FeatureScore s;
    s.feature = static_cast<std::size_t>(j) < m.feature_names.size()
                    ? m.feature_names[static_cast<std::size_t>(j)]
                    : "x" + std::to_string(j);
    const Eigen::VectorXd xc = m.x.col(j).array() - m.x.col(j).mean();
    const double sxx = xc.squaredNorm();
    if (!(sxx > 0.0)) {
      s.zero_variance = true;
      out.push_back(std::move(s));
      continue;
    }
    const double r = xc.dot(yc) / std::sqrt(sxx * syy);
    const double r2 = std::min(1.0, r * r);
    if (1.0 - r2 <= 4.0 * std::numeric_limits<double>::epsilon()) {
      s.infinite = true;
      s.score = std::numeric_limits<double>::infinity();
      s.p_value = 0.0;
    } else {
      s.score = r2 / (1.0 - r2) * dof;
      s.p_value = f_distribution_sf(s.score, 1.0, dof);
    }
    out.push_back(std::move(s));
  }
  return out;
}

KBest select_k_best(std::span<const FeatureScore> scores, int k) {
  if (k < 1) throw ArgumentError("select_k_best: k must be >= 1");
  std::vector<const FeatureScore*> order;
  for (const auto& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const FeatureScore* a, const FeatureScore* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->feature < b->feature;
  });
  KBest out;
  out.truncated = static_cast<std::size_t>(k) > order.size();
  const std::size_t take = std::min(order.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < take; ++i) out.features.push_back(order[i]->feature);
  return out;
}

// ---------------------------------------------------------------------------
// Forward selection
// ---------------------------------------------------------------------------

namespace {

// Train/validation cross products with train-mean centering, so any subset's
// OLS fit and validation MSE come from small dense solves.
class SubsetScorer {
 public:
  SubsetScorer(const FeatureMatrix& m, double train_fraction, std::uint64_t seed) {
    const SplitIndices split = split_indices(m.rows(), train_fraction, seed);
    const FeatureMatrix train = m.take_rows(split.train);
    const FeatureMatrix val = m.take_rows(split.test);
    const Eigen::RowVectorXd x_mean = train.x.colwise().mean();
    const double y_mean = train.y.mean();
    const Eigen::MatrixXd xt = train.x.rowwise() - x_mean;
    const Eigen::VectorXd yt = train.y.array() - y_mean;
    const Eigen::MatrixXd xv = val.x.rowwise() - x_mean;
    const Eigen::VectorXd yv = val.y.array() - y_mean;
    gram_ = xt.transpose() * xt;
    xty_ = xt.transpose() * yt;
    val_gram_ = xv.transpose() * xv;
    val_xty_ = xv.transpose() * yv;
    val_yy_ = yv.squaredNorm();
    n_val_ = static_cast<double>(val.rows());
  }

  double mse(std::span<const Eigen::Index> subset) const {
    const auto k = static_cast<Eigen::Index>(subset.size());
    if (k == 0) return val_yy_ / n_val_;
    Eigen::MatrixXd a(k, k);
    Eigen::VectorXd b(k);
    Eigen::VectorXd scale(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double d = gram_(subset[i], subset[i]);
      if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
      scale(i) = std::sqrt(d);
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      b(i) = xty_(subset[i]) / scale(i);
      for (Eigen::Index j = 0; j < k; ++j) {
        a(i, j) = gram_(subset[i], subset[j]) / (scale(i) * scale(j));
      }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal();
    if (!pivots.allFinite() || pivots.array().square().minCoeff() < 1e-12) {
      return std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd beta = llt.solve(b).array() / scale.array();
    double quad = val_yy_;
    for (Eigen::Index i = 0; i < k; ++i) {
      quad -= 2.0 * beta(i) * val_xty_(subset[i]);
      for (Eigen::Index j = 0; j < k; ++j) {
        quad += beta(i) * beta(j) * val_gram_(subset[i], subset[j]);
      }
    }
    return std::max(0.0, quad) / n_val_;
  }

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd xty_;
  Eigen::MatrixXd val_gram_;
  Eigen::VectorXd val_xty_;
  double val_yy_ = 0.0;
  double n_val_ = 1.0;
};

}  // namespace

double subset_validation_mse(const FeatureMatrix& m, std::span<const Eigen::Index> subset,
                             double train_fraction, std::uint64_t seed) {
  return SubsetScorer(m, train_fraction, seed).mse(subset);
}

ForwardSelection forward_select(const FeatureMatrix& m, const ForwardOptions& options) {
  if (options.max_features < 1) throw ArgumentError("forward_select: max_features must be >= 1");
  if (!(options.min_rel_improvement >= 0.0)) {
    throw ArgumentError("forward_select: min_rel_improvement must be >= 0");
  }
  const SubsetScorer scorer(m, options.train_fraction, options.seed);
  ForwardSelection out;
  std::vector<Eigen::Index> chosen;
  std::vector<char> used(static_cast<std::size_t>(m.cols()), 0);
  const double baseline = scorer.mse(chosen);
  double current = baseline;
  out.validation_mse.push_back(current);
  const auto limit = std::min<Eigen::Index>(options.max_features, m.cols());
  while (static_cast<Eigen::Index>(chosen.size()) < limit) {
    if (!(current > 1e-12 * baseline)) break;
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_j = -1;
    chosen.push_back(0);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      chosen.back() = j;
      const double e = scorer.mse(chosen);
      if (e < best) {
        best = e;
        best_j = j;
      }
    }
    chosen.pop_back();
    if (best_j < 0) break;
    // Gain in units of R².
    const double gain = (current - best) / baseline;
    if (!(gain >= options.min_rel_improvement) || !(gain > 0.0)) break;
    chosen.push_back(best_j);
    used[static_cast<std::size_t>(best_j)] = 1;
    current = best;
    out.validation_mse.push_back(current);
    out.features.push_back(static_cast<std::size_t>(best_j) < m.feature_names.size()
                               ? m.feature_names[static_cast<std::size_t>(best_j)]
                               : "x" + std::to_string(best_j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shapley values
// ---------------------------------------------------------------------------

namespace {

class CoalitionGame {
 public:
  CoalitionGame(const FittedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& instance,
                const Eigen::MatrixXd& background)
      : model_(model), instance_(instance), composite_(background), background_(background) {}

  // Value with the given features taken from the instance.
  double value(std::uint32_t mask) {
    composite_ = background_;
    for (Eigen::Index j = 0; j < instance_.size(); ++j) {
      if (mask & (1u << j)) composite_.col(j).setConstant(instance_(j));
    }
    return predict(model_, composite_).mean();
  }

  // Incremental form for permutation walks.
  void reset() { composite_ = background_; }
  double add(Eigen::Index j) {
    composite_.col(j).setConstant(instance_(j));
    return predict(model_, composite_).mean();
  }

 private:
  const FittedModel& model_;
  Eigen::RowVectorXd instance_;
  Eigen::MatrixXd composite_;
  const Eigen::MatrixXd& background_;
};

}  // namespace

ShapExplanation shapley_values(const FittedModel& model,
                               const Eigen::Ref<const Eigen::RowVectorXd>& instance,
                               const Eigen::MatrixXd& background, int budget,
                               std::uint64_t seed, ShapMode mode) {
  if (background.rows() == 0) throw ArgumentError("shapley_values: empty background");
  if (background.cols() != instance.size()) {
    throw ArgumentError("shapley_values: background and instance widths differ");
  }
  const auto p = static_cast<int>(instance.size());
  const bool exact = mode == ShapMode::kExact ||
                     (mode == ShapMode::kAuto && p <= kMaxExactShapFeatures);
  if (exact && p > 24) throw ArgumentError("shapley_values: too many features for enumeration");
  if (!exact && budget < 1) throw ArgumentError("shapley_values: budget must be >= 1");

  ShapExplanation out;
  out.exact = exact;
  out.prediction = predict_row(model, instance);
  out.values.assign(static_cast<std::size_t>(p), 0.0);
  CoalitionGame game(model, instance, background);

  if (exact) {
    const std::uint32_t n_masks = 1u << p;
    std::vector<double> v(n_masks);
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) v[mask] = game.value(mask);
    out.base_value = v[0];
    // |S|! (p - |S| - 1)! / p!
    std::vector<double> weight(static_cast<std::size_t>(std::max(p, 1)));
    for (int s = 0; s < p; ++s) {
      weight[static_cast<std::size_t>(s)] =
          std::exp(std::lgamma(s + 1.0) + std::lgamma(p - s + 0.0) - std::lgamma(p + 1.0));
    }
    for (int i = 0; i < p; ++i) {
      const std::uint32_t bit = 1u << i;
      double phi = 0.0;
      for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
        if (mask & bit) continue;
        phi += weight[static_cast<std::size_t>(std::popcount(mask))] * (v[mask | bit] - v[mask]);
      }
      out.values[static_cast<std::size_t>(i)] = phi;
    }
    return out;
  }

  Rng rng(seed);
  game.reset();
  out.base_value = predict(model, background).mean();
  auto walk = [&](const std::vector<std::size_t>& order) {
    game.reset();
    double prev = out.base_value;
    for (std::size_t j : order) {
      const double cur = game.add(static_cast<Eigen::Index>(j));
      out.values[j] += cur - prev;
      prev = cur;
    }
  };
  int done = 0;
  while (done < budget) {
    std::vector<std::size_t> order = random_permutation(static_cast<std::size_t>(p), rng);
    walk(order);
    ++done;
    if (done < budget) {
      std::reverse(order.begin(), order.end());
      walk(order);
      ++done;
    }
  }
  for (auto& v : out.values) v /= static_cast<double>(done);
  return out;
}

namespace {

std::vector<std::pair<std::string, double>> rank_descending(
    std::span<const std::string> names, const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i : order) {
    out.emplace_back(i < names.size() ? names[i] : "x" + std::to_string(i), values[i]);
  }
  return out;
}

}  // namespace

ShapRanking shap_ranking(const FittedModel& model, const FeatureMatrix& data,
                         const Eigen::MatrixXd& background, int budget, std::uint64_t seed,
                         int threads, ShapMode mode) {
  if (data.rows() == 0) throw EmptyInputError("shap_ranking: no rows to explain");
  ShapRanking out;
  out.rows.resize(static_cast<std::size_t>(data.rows()));
  parallel_for(out.rows.size(), threads, [&](std::size_t r) {
    out.rows[r] = shapley_values(model, data.x.row(static_cast<Eigen::Index>(r)), background,
                                 budget, derive_seed(seed, r), mode);
  });
  std::vector<double> mean_abs(static_cast<std::size_t>(data.cols()), 0.0);
  for (const auto& e : out.rows) {
    for (std::size_t j = 0; j < mean_abs.size(); ++j) mean_abs[j] += std::abs(e.values[j]);
  }
  for (auto& v : mean_abs) v /= static_cast<double>(out.rows.size());
  out.mean_abs = rank_descending(data.feature_names, mean_abs);
  return out;
}

// ---------------------------------------------------------------------------
// Impurity importance
// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, double>> impurity_importance(
    std::span<const Tree> trees, std::span<const std::string> feature_names) {
  const std::size_t p = feature_names.size();
  std::vector<double> total(p, 0.0);
  for (const auto& tree : trees) {
    std::vector<double> per_tree(p, 0.0);
    double sum = 0.0;
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      const auto f = static_cast<std::size_t>(node.feature);
      if (f >= p) throw ArgumentError("impurity_importance: split on unknown feature index");
      per_tree[f] += node.sse_decrease;
      sum += node.sse_decrease;
    }
    if (sum > 0.0) {
      for (std::size_t j = 0; j < p; ++j) total[j] += per_tree[j] / sum;
    }
  }
  const double norm = std::accumulate(total.begin(), total.end(), 0.0);
  if (norm > 0.0) {
    for (auto& v : total) v /= norm;
  }
  return rank_descending(feature_names, total);
}

std::vector<std::pair<std::string, double>> impurity_importance(
    const ForestModel& forest, std::span<const std::string> feature_names) {
  return impurity_importance(std::span<const Tree>(forest.trees), feature_names);
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

void write_ranking_csv(const std::vector<std::pair<std::string, double>>& ranking,
                       std::string_view value_header, std::ostream& out, std::size_t top) {
  out << "feature," << value_header << '\n';
  const std::size_t n = top == 0 ? ranking.size() : std::min(top, ranking.size());
  for (std::size_t i = 0; i < n; ++i) {
    out << csv_escape(ranking[i].first) << ',' << format_double(ranking[i].second) << '\n';
  }
}

void write_scores_csv(std::span<const FeatureScore> scores, std::ostream& out) {
  out << "feature,f_score,p_value,flag\n";
  for (const auto& s : scores) {
    out << csv_escape(s.feature) << ',' << (s.infinite ? "inf" : format_double(s.score)) << ','
        << format_double(s.p_value) << ','
        << (s.infinite ? "perfect_correlation" : (s.zero_variance ? "zero_variance" : ""))
        << '\n';
  }
}

nlohmann::json to_json(const ShapExplanation& e, std::span<const std::string> names) {
  nlohmann::json values = nlohmann::json::array();
  for (std::size_t j = 0; j < e.values.size(); ++j) {
    values.push_back({{"feature", j < names.size() ? names[j] : "x" + std::to_string(j)},
                      {"value", e.values[j]}});
  }
  return nlohmann::json{{"base_value", e.base_value},
                        {"prediction", e.prediction},
                        {"exact", e.exact},
                        {"values", values}};
}

}  // namespace rentlab
