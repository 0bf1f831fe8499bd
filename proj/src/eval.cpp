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

#include "rentlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "rentlab/common.hpp"
#include "rentlab/tabular.hpp"

namespace rentlab {

namespace {

void check_pair(const Eigen::Ref<const Eigen::VectorXd>& y,
                const Eigen::Ref<const Eigen::VectorXd>& yhat, const char* op) {
  if (y.size() != yhat.size()) {
    throw ArgumentError(std::string(op) + ": length mismatch (" + std::to_string(y.size()) +
                        " vs " + std::to_string(yhat.size()) + ")");
  }
  if (y.size() == 0) throw ArgumentError(std::string(op) + ": empty input");
}

}  // namespace

double rmse(const Eigen::Ref<const Eigen::VectorXd>& y,
            const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  check_pair(y, yhat, "rmse");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

double mae(const Eigen::Ref<const Eigen::VectorXd>& y,
           const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  check_pair(y, yhat, "mae");
  return (y - yhat).cwiseAbs().sum() / static_cast<double>(y.size());
}

double r_squared(const Eigen::Ref<const Eigen::VectorXd>& y,
                 const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  check_pair(y, yhat, "r_squared");
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  if (!(sst > 0.0)) throw UndefinedMetricError("r_squared: target has zero variance");
  return 1.0 - (y - yhat).squaredNorm() / sst;
}

Metrics compute_metrics(const Eigen::Ref<const Eigen::VectorXd>& y,
                        const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  return Metrics{r_squared(y, yhat), mae(y, yhat), rmse(y, yhat)};
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

SplitIndices split_indices(Eigen::Index n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train_test_split: fraction must be in (0, 1)");
  }
  const auto n_train = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * train_fraction));
  if (n < 2 || n_train < 1 || n_train >= n) {
    throw ArgumentError("train_test_split: " + std::to_string(n) + " rows cannot be split at " +
                        format_double(train_fraction));
  }
  Rng rng(derive_seed(seed, 0x5eed));
  const auto perm = random_permutation(static_cast<std::size_t>(n), rng);
  SplitIndices out;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    (static_cast<Eigen::Index>(i) < n_train ? out.train : out.test)
        .push_back(static_cast<Eigen::Index>(perm[i]));
  }
  return out;
}

TrainTest train_test_split(const FeatureMatrix& m, double train_fraction, std::uint64_t seed) {
  TrainTest out;
  out.indices = split_indices(m.rows(), train_fraction, seed);
  out.train = m.take_rows(out.indices.train);
  out.test = m.take_rows(out.indices.test);
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int f : assignments) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

std::vector<Eigen::Index> FoldPlan::rows_in(int fold) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

std::vector<Eigen::Index> FoldPlan::rows_not_in(int fold) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

FoldPlan kfold_plan(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw ArgumentError("kfold_plan: need 2 <= k <= n (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ")");
  }
  Rng rng(derive_seed(seed, 0xf01d));
  const auto perm = random_permutation(n, rng);
  FoldPlan plan;
  plan.k = k;
  plan.assignments.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    plan.assignments[perm[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

ParamGrid param_grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("parameter grid must be a JSON object");
  ParamGrid grid;
  for (const auto& [name, values] : j.items()) {
    std::vector<double> v;
    if (values.is_array()) {
      for (const auto& x : values) {
        if (!x.is_number()) throw ArgumentError("grid values for '" + name + "' must be numbers");
        v.push_back(x.get<double>());
      }
    } else if (values.is_number()) {
      v.push_back(values.get<double>());
    } else {
      throw ArgumentError("grid entry '" + name + "' must be a number list");
    }
    if (v.empty()) throw ArgumentError("grid entry '" + name + "' is empty");
    HyperParams probe;
    set_hyperparam(probe, name, v.front());
    grid.emplace_back(name, std::move(v));
  }
  return grid;
}

nlohmann::json to_json(const ParamGrid& grid) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, values] : grid) j[name] = values;
  return j;
}

namespace {

using Combination = std::vector<std::size_t>;  // value index per grid entry

HyperParams apply_combination(const HyperParams& base, const ParamGrid& grid,
                              const Combination& c) {
  HyperParams hp = base;
  for (std::size_t i = 0; i < grid.size(); ++i) set_hyperparam(hp, grid[i].first, grid[i].second[c[i]]);
  return hp;
}

std::vector<Combination> sample_combinations(const ParamGrid& grid, int n_samples, Rng& rng) {
  double cardinality = 1.0;
  for (const auto& [_, values] : grid) cardinality *= static_cast<double>(values.size());
  std::vector<Combination> out;
  if (cardinality <= 10.0 * n_samples) {
    std::vector<Combination> all(1);
    for (const auto& [_, values] : grid) {
      std::vector<Combination> next;
      for (const auto& prefix : all) {
        for (std::size_t v = 0; v < values.size(); ++v) {
          next.push_back(prefix);
          next.back().push_back(v);
        }
      }
      all = std::move(next);
    }
    const auto perm = random_permutation(all.size(), rng);
    const std::size_t take = std::min(all.size(), static_cast<std::size_t>(n_samples));
    for (std::size_t i = 0; i < take; ++i) out.push_back(all[perm[i]]);
    return out;
  }
  for (int s = 0; s < n_samples; ++s) {
    Combination c;
    for (const auto& [_, values] : grid) c.push_back(uniform_index(rng, values.size()));
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

SearchResult random_search(const FeatureMatrix& m, ModelFamily family, const ParamGrid& grid,
                           int n_samples, int k, std::uint64_t seed, const HyperParams& base,
                           int threads) {
  if (grid.empty()) throw ArgumentError("random_search: empty grid");
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw ArgumentError("random_search: no values for '" + name + "'");
  }
  if (n_samples < 1) throw ArgumentError("random_search: n_samples must be >= 1");
  Rng rng(derive_seed(seed, 0x5ea4c4));
  const auto combos = sample_combinations(grid, n_samples, rng);
  const FoldPlan plan = kfold_plan(static_cast<std::size_t>(m.rows()), k, seed);
  std::vector<FeatureMatrix> fold_train;
  std::vector<FeatureMatrix> fold_val;
  for (int f = 0; f < k; ++f) {
    fold_train.push_back(m.take_rows(plan.rows_not_in(f)));
    fold_val.push_back(m.take_rows(plan.rows_in(f)));
  }

  SearchResult result;
  result.trials.resize(combos.size());
  const std::size_t jobs = combos.size() * static_cast<std::size_t>(k);
  std::vector<Metrics> fold_metrics(jobs);
  std::vector<HyperParams> configs;
  for (const auto& c : combos) {
    configs.push_back(apply_combination(base, grid, c));
    configs.back().validate();
  }
  parallel_for(jobs, threads, [&](std::size_t job) {
    const std::size_t trial = job / static_cast<std::size_t>(k);
    const auto fold = static_cast<std::size_t>(job % static_cast<std::size_t>(k));
    const Model model = fit_model(family, fold_train[fold], configs[trial],
                                  derive_seed(derive_seed(seed, trial), fold), 1);
    fold_metrics[job] = compute_metrics(fold_val[fold].y, model.predict(fold_val[fold]));
  });

  for (std::size_t t = 0; t < combos.size(); ++t) {
    EvalReport& r = result.trials[t];
    r.model_name = display_name(family);
    r.family = family;
    r.config = configs[t];
    r.feature_set = m.feature_names;
    for (int f = 0; f < k; ++f) {
      const Metrics& fm = fold_metrics[t * static_cast<std::size_t>(k) + static_cast<std::size_t>(f)];
      r.r_squared += fm.r_squared / k;
      r.mae += fm.mae / k;
      r.rmse += fm.rmse / k;
    }
    r.cv_score = r.r_squared;
    const EvalReport& best = result.trials[result.best_index];
    if (t == 0 || r.r_squared > best.r_squared ||
        (r.r_squared == best.r_squared && r.rmse < best.rmse)) {
      result.best_index = t;
    }
  }
  result.best = result.trials[result.best_index].config;
  result.cv_score = result.trials[result.best_index].r_squared;
  return result;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

std::string display_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::kOls: return "Linear";
    case ModelFamily::kLasso: return "Lasso";
    case ModelFamily::kRidge: return "Ridge";
    case ModelFamily::kElasticNet: return "Elastic";
    case ModelFamily::kTree: return "Decision Tree";
    case ModelFamily::kForest: return "Random Forest";
    case ModelFamily::kGbm: return "XG-Boost";
  }
  return "Linear";
}

Comparison compare_models(const FeatureMatrix& train, const FeatureMatrix& test,
                          std::span<const ModelConfig> configs, std::uint64_t seed,
                          int search_samples, int cv_folds, int threads) {
  if (train.feature_names != test.feature_names) {
    throw ArgumentError("compare_models: train and test feature sets differ");
  }
  Comparison out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ModelConfig& cfg = configs[i];
    const std::uint64_t model_seed = derive_seed(seed, 0xc0de + i);
    EvalReport report;
    report.model_name = cfg.name.empty() ? display_name(cfg.family) : cfg.name;
    report.family = cfg.family;
    report.feature_set = train.feature_names;
    HyperParams hp = cfg.params;
    if (!cfg.grid.empty()) {
      const SearchResult search = random_search(train, cfg.family, cfg.grid, search_samples,
                                                cv_folds, model_seed, cfg.params, threads);
      hp = search.best;
      report.cv_score = search.cv_score;
    }
    Model model = fit_model(cfg.family, train, hp, model_seed, threads);
    const Metrics metrics = compute_metrics(test.y, model.predict(test));
    report.r_squared = metrics.r_squared;
    report.mae = metrics.mae;
    report.rmse = metrics.rmse;
    report.config = hp;
    out.reports.push_back(std::move(report));
    out.models.push_back(std::move(model));
  }
  return out;
}

void write_report_table_csv(std::span<const EvalReport> reports, std::ostream& out) {
  out << "Metric";
  for (const auto& r : reports) out << ',' << csv_escape(r.model_name);
  out << '\n';
  auto row = [&](const char* label, double EvalReport::*field) {
    out << label;
    for (const auto& r : reports) out << ',' << format_double(r.*field);
    out << '\n';
  };
  row("R-Squared", &EvalReport::r_squared);
  row("Mean Absolute Error", &EvalReport::mae);
  row("Root Mean Squared Error", &EvalReport::rmse);
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j{{"model_name", r.model_name},
                   {"family", std::string(to_string(r.family))},
                   {"r_squared", r.r_squared},
                   {"mae", r.mae},
                   {"rmse", r.rmse},
                   {"config", to_json(r.config)},
                   {"feature_set", r.feature_set}};
  if (r.cv_score) j["cv_score"] = *r.cv_score;
  return j;
}

nlohmann::json to_json(std::span<const EvalReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

}  // namespace rentlab
