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

#include "rentlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rentlab/common.hpp"

namespace rentlab {

std::string_view to_string(Penalty p) {
  switch (p) {
    case Penalty::kNone: return "none";
    case Penalty::kL1: return "l1";
    case Penalty::kL2: return "l2";
    case Penalty::kElastic: return "elastic";
  }
  return "none";
}

namespace {

Penalty parse_penalty(std::string_view s) {
  if (s == "l1") return Penalty::kL1;
  if (s == "l2") return Penalty::kL2;
  if (s == "elastic") return Penalty::kElastic;
  return Penalty::kNone;
}

void require_finite(const FeatureMatrix& m, const char* op) {
  if (!m.x.allFinite() || !m.y.allFinite()) {
    throw ArgumentError(std::string(op) + ": non-finite values in input");
  }
  if (m.y.size() != m.x.rows()) {
    throw ArgumentError(std::string(op) + ": target length does not match rows");
  }
}

}  // namespace

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::kOls: return "ols";
    case ModelFamily::kLasso: return "lasso";
    case ModelFamily::kRidge: return "ridge";
    case ModelFamily::kElasticNet: return "elastic_net";
    case ModelFamily::kTree: return "tree";
    case ModelFamily::kForest: return "forest";
    case ModelFamily::kGbm: return "gbm";
  }
  return "ols";
}

ModelFamily parse_family(std::string_view name) {
  if (name == "ols" || name == "linear") return ModelFamily::kOls;
  if (name == "lasso") return ModelFamily::kLasso;
  if (name == "ridge") return ModelFamily::kRidge;
  if (name == "elastic_net" || name == "elastic") return ModelFamily::kElasticNet;
  if (name == "tree") return ModelFamily::kTree;
  if (name == "forest" || name == "random_forest") return ModelFamily::kForest;
  if (name == "gbm" || name == "xgboost" || name == "boosted") return ModelFamily::kGbm;
  throw ArgumentError("unknown model family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

void HyperParams::validate() const {
  auto fail = [](const char* what) { throw ArgumentError(std::string("hyperparameter ") + what); };
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and >= 0");
  if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0)) fail("l1_ratio must be in [0, 1]");
  if (n_trees < 1) fail("n_trees must be >= 1");
  if (max_depth < 0) fail("max_depth must be >= 0");
  if (min_samples_split < 1) fail("min_samples_split must be >= 1");
  if (max_features < 0) fail("max_features must be >= 0");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail("learning_rate must be in (0, 1]");
  if (n_rounds < 0) fail("n_rounds must be >= 0");
  if (!(tol > 0.0)) fail("tol must be > 0");
  if (max_iter < 1) fail("max_iter must be >= 1");
}

nlohmann::json to_json(const HyperParams& hp) {
  return nlohmann::json{{"alpha", hp.alpha},
                        {"l1_ratio", hp.l1_ratio},
                        {"n_trees", hp.n_trees},
                        {"max_depth", hp.max_depth},
                        {"min_samples_split", hp.min_samples_split},
                        {"max_features", hp.max_features},
                        {"learning_rate", hp.learning_rate},
                        {"n_rounds", hp.n_rounds},
                        {"tol", hp.tol},
                        {"max_iter", hp.max_iter},
                        {"bootstrap", hp.bootstrap}};
}

void set_hyperparam(HyperParams& hp, std::string_view name, double value) {
  auto as_int = [&]() {
    if (value != std::floor(value) || std::abs(value) > 1e9) {
      throw ArgumentError("hyperparameter '" + std::string(name) + "' must be an integer");
    }
    return static_cast<int>(value);
  };
  if (name == "alpha") {
    hp.alpha = value;
  } else if (name == "l1_ratio") {
    hp.l1_ratio = value;
  } else if (name == "n_trees") {
    hp.n_trees = as_int();
  } else if (name == "max_depth") {
    hp.max_depth = as_int();
  } else if (name == "min_samples_split") {
    hp.min_samples_split = as_int();
  } else if (name == "max_features") {
    hp.max_features = as_int();
  } else if (name == "learning_rate") {
    hp.learning_rate = value;
  } else if (name == "n_rounds") {
    hp.n_rounds = as_int();
  } else if (name == "tol") {
    hp.tol = value;
  } else if (name == "max_iter") {
    hp.max_iter = as_int();
  } else if (name == "bootstrap") {
    hp.bootstrap = value != 0.0;
  } else {
    throw ArgumentError("unknown hyperparameter '" + std::string(name) + "'");
  }
}

HyperParams hyperparams_from_json(const nlohmann::json& j, HyperParams base) {
  if (!j.is_object()) throw ArgumentError("hyperparameters must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (value.is_boolean()) {
      set_hyperparam(base, key, value.get<bool>() ? 1.0 : 0.0);
    } else if (value.is_number()) {
      set_hyperparam(base, key, value.get<double>());
    } else {
      throw ArgumentError("hyperparameter '" + key + "' must be a number");
    }
  }
  return base;
}

// ---------------------------------------------------------------------------
// Linear models
// ---------------------------------------------------------------------------

LinearModel fit_ols(const FeatureMatrix& m) {
  require_finite(m, "fit_ols");
  const Eigen::Index n = m.rows();
  const Eigen::Index p = m.cols();
  if (n == 0) throw EmptyInputError("fit_ols: no rows");
  LinearModel model;
  model.penalty = Penalty::kNone;
  const Eigen::RowVectorXd x_mean = m.x.colwise().mean();
  const double y_mean = m.y.mean();
  if (p == 0) {
    model.intercept = y_mean;
    model.coefficients.resize(0);
    return model;
  }
  Eigen::MatrixXd xc = m.x.rowwise() - x_mean;
  const Eigen::VectorXd yc = m.y.array() - y_mean;
  // Solve on unit-norm columns, then rescale.
  Eigen::VectorXd norms = xc.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(norms(j) > 0.0)) {
      throw RankDeficiencyError("fit_ols: feature '" +
                                (static_cast<std::size_t>(j) < m.feature_names.size()
                                     ? m.feature_names[static_cast<std::size_t>(j)]
                                     : std::to_string(j)) +
                                "' is constant; the design is singular (consider ridge)");
    }
    xc.col(j) /= norms(j);
  }
  const Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal();
  if (llt.info() != Eigen::Success || !pivots.allFinite() ||
      pivots.array().square().minCoeff() < 1e-12) {
    throw RankDeficiencyError(
        "fit_ols: design matrix is rank deficient (collinear features); consider ridge");
  }
  const Eigen::VectorXd beta_scaled = llt.solve(xc.transpose() * yc);
  model.coefficients = beta_scaled.array() / norms.array();
  model.intercept = y_mean - x_mean.dot(model.coefficients);
  return model;
}

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

LinearModel fit_elastic_net(const FeatureMatrix& m, double alpha, double l1_ratio, double tol,
                            int max_iter) {
  require_finite(m, "fit_elastic_net");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ArgumentError("fit_elastic_net: alpha must be finite and >= 0");
  }
  if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0)) {
    throw ArgumentError("fit_elastic_net: l1_ratio must be in [0, 1]");
  }
  if (!(tol > 0.0) || max_iter < 1) throw ArgumentError("fit_elastic_net: bad tol/max_iter");
  const Eigen::Index n = m.rows();
  const Eigen::Index p = m.cols();
  if (n == 0) throw EmptyInputError("fit_elastic_net: no rows");

  LinearModel model;
  model.alpha = alpha;
  model.l1_ratio = l1_ratio;
  model.penalty = l1_ratio == 1.0 ? Penalty::kL1 : (l1_ratio == 0.0 ? Penalty::kL2 : Penalty::kElastic);

  const Eigen::RowVectorXd x_mean = m.x.colwise().mean();
  const double y_mean = m.y.mean();
  const Eigen::MatrixXd xc = m.x.rowwise() - x_mean;
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::VectorXd col_sq = xc.colwise().squaredNorm().transpose() * inv_n;
  const double l1 = alpha * l1_ratio;
  const double l2 = alpha * (1.0 - l1_ratio);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd resid = m.y.array() - y_mean;
  model.converged = p == 0;
  int iter = 0;
  for (; iter < max_iter && p > 0; ++iter) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double denom = col_sq(j) + l2;
      const double old = beta(j);
      double updated = 0.0;
      if (denom > 0.0 && col_sq(j) > 0.0) {
        const double z = xc.col(j).dot(resid) * inv_n + col_sq(j) * old;
        updated = soft_threshold(z, l1) / denom;
      }
      const double delta = updated - old;
      if (delta != 0.0) {
        resid.noalias() -= xc.col(j) * delta;
        beta(j) = updated;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    if (max_delta < tol) {
      model.converged = true;
      ++iter;
      break;
    }
  }
  model.iterations = iter;
  model.coefficients = beta;
  model.intercept = y_mean - x_mean.dot(beta);
  return model;
}

double elastic_net_objective(const FeatureMatrix& m, double intercept, const Eigen::VectorXd& coef,
                             double alpha, double l1_ratio) {
  const Eigen::VectorXd r = (m.y - m.x * coef).array() - intercept;
  const double n = static_cast<double>(m.rows());
  return r.squaredNorm() / (2.0 * n) +
         alpha * (l1_ratio * coef.lpNorm<1>() + 0.5 * (1.0 - l1_ratio) * coef.squaredNorm());
}

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return nodes[static_cast<std::size_t>(leaf_index(row))].value;
}

int Tree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = row(n.feature) <= n.threshold ? n.left : n.right;
  }
  return i;
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.is_leaf()) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

// Builds one tree over a sample given as row indices (repeats allowed). Every
// feature keeps an array of sample positions sorted by its value; a node owns
// the same [begin, end) range in all of them, and splits stable-partition
// each range so the order survives without re-sorting.
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
              std::span<const Eigen::Index> sample, const TreeOptions& options, Rng* rng)
      : options_(options), rng_(rng) {
    const auto m = sample.size();
    p_ = static_cast<int>(x.cols());
    ys_.resize(m);
    xs_.assign(static_cast<std::size_t>(p_), std::vector<double>(m));
    for (std::size_t s = 0; s < m; ++s) {
      ys_[s] = y(sample[s]);
      for (int f = 0; f < p_; ++f) xs_[static_cast<std::size_t>(f)][s] = x(sample[s], f);
    }
    order_.assign(static_cast<std::size_t>(p_), std::vector<int>(m));
    for (int f = 0; f < p_; ++f) {
      auto& ord = order_[static_cast<std::size_t>(f)];
      std::iota(ord.begin(), ord.end(), 0);
      const auto& col = xs_[static_cast<std::size_t>(f)];
      std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
        return col[static_cast<std::size_t>(a)] < col[static_cast<std::size_t>(b)];
      });
    }
    goes_left_.assign(m, 0);
    scratch_.resize(m);
    features_.resize(static_cast<std::size_t>(p_));
    std::iota(features_.begin(), features_.end(), 0);
    n_candidates_ = options.max_features > 0 ? std::min(options.max_features, p_) : p_;
  }

  Tree build() {
    Tree tree;
    if (ys_.empty()) throw EmptyInputError("fit_tree: no rows");
    std::vector<int> all(ys_.size());
    std::iota(all.begin(), all.end(), 0);
    node_positions_ = std::move(all);
    grow(tree, 0, ys_.size(), 0);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(Tree& tree, std::size_t begin, std::size_t end, int depth) {
    const std::size_t n = end - begin;
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = ys_[static_cast<std::size_t>(node_positions_[i])];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(n);
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes.back().value = mean;
    tree.nodes.back().samples = n;

    const bool stop = depth >= options_.max_depth ||
                      n < static_cast<std::size_t>(std::max(2, options_.min_samples_split)) ||
                      lo == hi;
    if (stop) return index;

    const Split best = find_split(begin, end, sum);
    if (best.feature < 0) return index;

    // Partition every feature's order by the chosen split.
    const auto& col = xs_[static_cast<std::size_t>(best.feature)];
    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const int pos = order_[0][i];
      const bool left = col[static_cast<std::size_t>(pos)] <= best.threshold;
      goes_left_[static_cast<std::size_t>(pos)] = left ? 1 : 0;
      n_left += left ? 1 : 0;
    }
    for (int f = 0; f < p_; ++f) partition(order_[static_cast<std::size_t>(f)], begin, end);
    partition(node_positions_, begin, end);

    TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.sse_decrease = best.gain;
    const int left = grow(tree, begin, begin + n_left, depth + 1);
    const int right = grow(tree, begin + n_left, end, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  void partition(std::vector<int>& v, std::size_t begin, std::size_t end) {
    std::size_t l = begin;
    std::size_t r = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const int pos = v[i];
      if (goes_left_[static_cast<std::size_t>(pos)]) {
        v[l++] = pos;
      } else {
        scratch_[r++] = pos;
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
              v.begin() + static_cast<std::ptrdiff_t>(l));
  }

  Split find_split(std::size_t begin, std::size_t end, double total) {
    const std::size_t n = end - begin;
    std::vector<int> candidates;
    if (n_candidates_ < p_) {
      // Partial Fisher-Yates over a persistent pool, then ascending order so
      // gain ties resolve to the lower feature index.
      for (int i = 0; i < n_candidates_; ++i) {
        const auto j = static_cast<std::size_t>(i) +
                       uniform_index(*rng_, static_cast<std::uint64_t>(p_ - i));
        std::swap(features_[static_cast<std::size_t>(i)], features_[j]);
      }
      candidates.assign(features_.begin(), features_.begin() + n_candidates_);
      std::sort(candidates.begin(), candidates.end());
    } else {
      candidates = features_;
      std::sort(candidates.begin(), candidates.end());
    }

    const double parent = total * total / static_cast<double>(n);
    Split best;
    for (int f : candidates) {
      const auto& ord = order_[static_cast<std::size_t>(f)];
      const auto& col = xs_[static_cast<std::size_t>(f)];
      double left_sum = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        const auto pos = static_cast<std::size_t>(ord[i]);
        left_sum += ys_[pos];
        const double a = col[pos];
        const double b = col[static_cast<std::size_t>(ord[i + 1])];
        if (!(a < b)) continue;
        const auto nl = static_cast<double>(i - begin + 1);
        const double nr = static_cast<double>(n) - nl;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
        if (gain > best.gain) {
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = {f, mid, gain};
        }
      }
    }
    // Gains at rounding level are not splits.
    double sse = 0.0;
    const double mean = total / static_cast<double>(n);
    for (std::size_t i = begin; i < end; ++i) {
      const double d = ys_[static_cast<std::size_t>(node_positions_[i])] - mean;
      sse += d * d;
    }
    if (!(best.gain > 1e-12 * sse) || !(best.gain > 0.0)) return Split{};
    return best;
  }

  TreeOptions options_;
  Rng* rng_;
  int p_ = 0;
  int n_candidates_ = 0;
  std::vector<double> ys_;
  std::vector<std::vector<double>> xs_;
  std::vector<std::vector<int>> order_;
  std::vector<int> node_positions_;
  std::vector<char> goes_left_;
  std::vector<int> scratch_;
  std::vector<int> features_;
};

Tree build_tree(const FeatureMatrix& m, std::span<const Eigen::Index> sample,
                const TreeOptions& options, Rng* rng) {
  if (options.max_depth < 0) throw ArgumentError("fit_tree: max_depth must be >= 0");
  if (options.max_features > 0 && options.max_features < m.cols() && rng == nullptr) {
    throw ArgumentError("fit_tree: feature subsampling needs a random stream");
  }
  TreeBuilder builder(m.x, m.y, sample, options, rng);
  return builder.build();
}

}  // namespace

Tree fit_tree(const FeatureMatrix& m, const TreeOptions& options) {
  require_finite(m, "fit_tree");
  if (m.rows() == 0) throw EmptyInputError("fit_tree: empty matrix");
  std::vector<Eigen::Index> all(static_cast<std::size_t>(m.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  Rng rng(0);
  return build_tree(m, all, options, &rng);
}

Tree fit_tree(const FeatureMatrix& m, int max_depth, int min_samples_split) {
  return fit_tree(m, TreeOptions{max_depth, min_samples_split, 0});
}

ForestModel fit_forest(const FeatureMatrix& m, const HyperParams& hp, std::uint64_t seed,
                       int threads) {
  require_finite(m, "fit_forest");
  hp.validate();
  const auto p = static_cast<int>(m.cols());
  const auto n = static_cast<std::size_t>(m.rows());
  if (n == 0) throw EmptyInputError("fit_forest: empty matrix");
  if (hp.max_features > p) {
    throw ArgumentError("fit_forest: max_features " + std::to_string(hp.max_features) +
                        " exceeds feature count " + std::to_string(p));
  }
  ForestModel forest;
  forest.seed = seed;
  forest.max_features = hp.max_features > 0 ? hp.max_features : std::max(1, (p + 2) / 3);
  forest.trees.resize(static_cast<std::size_t>(hp.n_trees));
  const TreeOptions options{hp.max_depth, hp.min_samples_split, forest.max_features};

  auto fit_one = [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<Eigen::Index> sample(n);
    if (hp.bootstrap) {
      for (auto& s : sample) s = static_cast<Eigen::Index>(uniform_index(rng, n));
    } else {
      std::iota(sample.begin(), sample.end(), Eigen::Index{0});
    }
    forest.trees[t] = build_tree(m, sample, options, &rng);
  };

  parallel_for(forest.trees.size(), threads, fit_one);
  return forest;
}

BoostedModel fit_gbm(const FeatureMatrix& m, const HyperParams& hp) {
  require_finite(m, "fit_gbm");
  if (!(hp.learning_rate > 0.0 && hp.learning_rate <= 1.0)) {
    throw ArgumentError("fit_gbm: learning_rate must be in (0, 1]");
  }
  if (hp.n_rounds < 0) throw ArgumentError("fit_gbm: n_rounds must be >= 0");
  if (m.rows() == 0) throw EmptyInputError("fit_gbm: empty matrix");
  BoostedModel model;
  model.learning_rate = hp.learning_rate;
  model.base = m.y.mean();
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(m.rows(), model.base);
  auto rmse = [&]() { return std::sqrt((m.y - pred).squaredNorm() / static_cast<double>(m.rows())); };
  model.train_rmse.push_back(rmse());

  FeatureMatrix residual = m;
  std::vector<Eigen::Index> all(static_cast<std::size_t>(m.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  const TreeOptions options{hp.max_depth, hp.min_samples_split, 0};
  for (int round = 0; round < hp.n_rounds; ++round) {
    // Negative gradient of squared loss.
    residual.y = m.y - pred;
    Tree tree = build_tree(residual, all, options, nullptr);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      pred(r) += model.learning_rate * tree.predict(m.x.row(r));
    }
    model.trees.push_back(std::move(tree));
    model.train_rmse.push_back(rmse());
  }
  return model;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

namespace {

int max_feature_used(const Tree& t) {
  int f = -1;
  for (const auto& n : t.nodes) f = std::max(f, n.feature);
  return f;
}

}  // namespace

double predict_row(const FittedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  return std::visit(
      [&](const auto& mdl) -> double {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return mdl.intercept + row.dot(mdl.coefficients.transpose());
        } else if constexpr (std::is_same_v<T, Tree>) {
          return mdl.predict(row);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          double s = 0.0;
          for (const auto& t : mdl.trees) s += t.predict(row);
          return s / static_cast<double>(mdl.trees.size());
        } else {
          double s = 0.0;
          for (const auto& t : mdl.trees) s += t.predict(row);
          return mdl.base + mdl.learning_rate * s;
        }
      },
      model);
}

std::optional<Eigen::Index> expected_features(const FittedModel& model) {
  return std::visit(
      [](const auto& mdl) -> std::optional<Eigen::Index> {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return mdl.coefficients.size();
        } else if constexpr (std::is_same_v<T, Tree>) {
          return max_feature_used(mdl) + 1;
        } else {
          int f = -1;
          for (const auto& t : mdl.trees) f = std::max(f, max_feature_used(t));
          return f + 1;
        }
      },
      model);
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& x) {
  const bool exact = std::holds_alternative<LinearModel>(model);
  const auto need = expected_features(model).value_or(0);
  if ((exact && x.cols() != need) || (!exact && x.cols() < need)) {
    throw ArgumentError("predict: model expects " + std::to_string(need) +
                        " features, got " + std::to_string(x.cols()));
  }
  Eigen::VectorXd out(x.rows());
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    out = (x * lin->coefficients).array() + lin->intercept;
    return out;
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = predict_row(model, x.row(r));
  return out;
}

Eigen::VectorXd predict(const FittedModel& model, const FeatureMatrix& m) {
  return predict(model, m.x);
}

Eigen::VectorXd Model::predict(const FeatureMatrix& m) const {
  if (!feature_names.empty() && static_cast<std::size_t>(m.cols()) != feature_names.size()) {
    throw ArgumentError("predict: model has " + std::to_string(feature_names.size()) +
                        " features, matrix has " + std::to_string(m.cols()));
  }
  return rentlab::predict(fitted, m.x);
}

Model fit_model(ModelFamily family, const FeatureMatrix& m, const HyperParams& hp,
                std::uint64_t seed, int threads) {
  hp.validate();
  Model model;
  model.family = family;
  model.params = hp;
  model.feature_names = m.feature_names;
  switch (family) {
    case ModelFamily::kOls:
      model.fitted = fit_ols(m);
      break;
    case ModelFamily::kLasso:
      model.fitted = fit_elastic_net(m, hp.alpha, 1.0, hp.tol, hp.max_iter);
      break;
    case ModelFamily::kRidge:
      model.fitted = fit_elastic_net(m, hp.alpha, 0.0, hp.tol, hp.max_iter);
      break;
    case ModelFamily::kElasticNet:
      model.fitted = fit_elastic_net(m, hp.alpha, hp.l1_ratio, hp.tol, hp.max_iter);
      break;
    case ModelFamily::kTree: {
      if (hp.max_features > m.cols()) throw ArgumentError("fit_tree: max_features exceeds p");
      const TreeOptions opt{hp.max_depth, hp.min_samples_split, hp.max_features};
      std::vector<Eigen::Index> all(static_cast<std::size_t>(m.rows()));
      std::iota(all.begin(), all.end(), Eigen::Index{0});
      Rng rng(derive_seed(seed, 0));
      require_finite(m, "fit_tree");
      if (m.rows() == 0) throw EmptyInputError("fit_tree: empty matrix");
      model.fitted = build_tree(m, all, opt, &rng);
      break;
    }
    case ModelFamily::kForest:
      model.fitted = fit_forest(m, hp, seed, threads);
      break;
    case ModelFamily::kGbm:
      model.fitted = fit_gbm(m, hp);
      break;
  }
  return model;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json node_to_json(const Tree& t, int i) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
  json j{{"value", n.value}, {"samples", n.samples}};
  if (n.is_leaf()) return j;
  j["feature"] = n.feature;
  j["threshold"] = n.threshold;
  j["sse_decrease"] = n.sse_decrease;
  j["left"] = node_to_json(t, n.left);
  j["right"] = node_to_json(t, n.right);
  return j;
}

int node_from_json(const json& j, Tree& t) {
  const int index = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  TreeNode n;
  n.value = j.at("value").get<double>();
  n.samples = j.value("samples", std::size_t{0});
  if (j.contains("feature")) {
    n.feature = j.at("feature").get<int>();
    n.threshold = j.at("threshold").get<double>();
    n.sse_decrease = j.value("sse_decrease", 0.0);
    n.left = node_from_json(j.at("left"), t);
    n.right = node_from_json(j.at("right"), t);
  }
  t.nodes[static_cast<std::size_t>(index)] = n;
  return index;
}

json tree_to_json(const Tree& t) { return t.nodes.empty() ? json() : node_to_json(t, 0); }

Tree tree_from_json(const json& j) {
  Tree t;
  node_from_json(j, t);
  return t;
}

json trees_to_json(const std::vector<Tree>& trees) {
  json arr = json::array();
  for (const auto& t : trees) arr.push_back(tree_to_json(t));
  return arr;
}

std::vector<Tree> trees_from_json(const json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(tree_from_json(t));
  return out;
}

}  // namespace

nlohmann::json to_json(const Model& model) {
  json j{{"format", "rentlab-model"},
         {"version", 1},
         {"family", std::string(to_string(model.family))},
         {"hyperparams", to_json(model.params)},
         {"feature_names", model.feature_names}};
  std::visit(
      [&](const auto& mdl) {
        using T = std::decay_t<decltype(mdl)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["linear"] = json{{"intercept", mdl.intercept},
                             {"coefficients", std::vector<double>(mdl.coefficients.begin(),
                                                                  mdl.coefficients.end())},
                             {"penalty", std::string(to_string(mdl.penalty))},
                             {"alpha", mdl.alpha},
                             {"l1_ratio", mdl.l1_ratio},
                             {"converged", mdl.converged},
                             {"iterations", mdl.iterations}};
        } else if constexpr (std::is_same_v<T, Tree>) {
          j["tree"] = tree_to_json(mdl);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["forest"] = json{{"max_features", mdl.max_features},
                             {"seed", mdl.seed},
                             {"trees", trees_to_json(mdl.trees)}};
        } else {
          j["boosted"] = json{{"base", mdl.base},
                              {"learning_rate", mdl.learning_rate},
                              {"train_rmse", mdl.train_rmse},
                              {"trees", trees_to_json(mdl.trees)}};
        }
      },
      model.fitted);
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "rentlab-model") {
      throw ArgumentError("not a rentlab model document");
    }
    Model model;
    model.family = parse_family(j.at("family").get<std::string>());
    model.params = hyperparams_from_json(j.at("hyperparams"));
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (j.contains("linear")) {
      const auto& l = j.at("linear");
      LinearModel lin;
      lin.intercept = l.at("intercept").get<double>();
      const auto coef = l.at("coefficients").get<std::vector<double>>();
      lin.coefficients = Eigen::Map<const Eigen::VectorXd>(coef.data(),
                                                           static_cast<Eigen::Index>(coef.size()));
      lin.penalty = parse_penalty(l.value("penalty", std::string("none")));
      lin.alpha = l.value("alpha", 0.0);
      lin.l1_ratio = l.value("l1_ratio", 0.0);
      lin.converged = l.value("converged", true);
      lin.iterations = l.value("iterations", 0);
      model.fitted = lin;
    } else if (j.contains("tree")) {
      model.fitted = tree_from_json(j.at("tree"));
    } else if (j.contains("forest")) {
      const auto& f = j.at("forest");
      ForestModel forest;
      forest.max_features = f.at("max_features").get<int>();
      forest.seed = f.at("seed").get<std::uint64_t>();
      forest.trees = trees_from_json(f.at("trees"));
      model.fitted = std::move(forest);
    } else if (j.contains("boosted")) {
      const auto& b = j.at("boosted");
      BoostedModel boosted;
      boosted.base = b.at("base").get<double>();
      boosted.learning_rate = b.at("learning_rate").get<double>();
      boosted.train_rmse = b.value("train_rmse", std::vector<double>{});
      boosted.trees = trees_from_json(b.at("trees"));
      model.fitted = std::move(boosted);
    } else {
      throw ArgumentError("model document has no fitted parameters");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace rentlab
