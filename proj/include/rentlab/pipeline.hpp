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

// End-to-end pipeline stages. Every stage reads and writes files, and `run`
// chains the same stage functions through the same files, so running the
// stages one by one reproduces `run` byte for byte.
//
// Output directory layout:
//   raw/{listings,calendar,reviews}.csv        generated inputs
//   clean/{listings,calendar}.csv              wrangled tables
//   clean/wrangle_report.csv
//   reviews_scored.csv                         sentiment columns appended
//   features.csv, scaling.json, feature_report.csv
//   selection.csv, selected_features.txt
//   train.csv, test.csv                        selected columns only
//   models/<name>.json, eval_report.csv, eval_report.json
//   shap_ranking.csv, shap_values.json, impurity_importance.csv

#ifndef RENTLAB_PIPELINE_HPP_
#define RENTLAB_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rentlab/common.hpp"
#include "rentlab/eval.hpp"
#include "rentlab/features.hpp"
#include "rentlab/sentiment.hpp"
#include "rentlab/synthgen.hpp"
#include "rentlab/tabular.hpp"
#include "rentlab/wrangle.hpp"

namespace rentlab {

// Invalid configuration or missing referenced file (exit status 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kPipelineSchemaVersion = 1;

struct InputPaths {
  std::filesystem::path listings;
  std::filesystem::path calendar;
  std::filesystem::path reviews;
};

struct WrangleParams {
  double iqr_multiplier = kDefaultIqrMultiplier;
  int knn_k = kDefaultKnnNeighbors;
  double knn_warn_km = kDefaultKnnWarnRadiusKm;
  std::optional<GapSpec> gap;
};

struct FeatureParams {
  std::optional<std::filesystem::path> poi_file;  // default: built-in Austin set
  int amenity_k = 30;
  bool standardize = true;
};

struct SentimentAssets {
  std::filesystem::path lexicon;
  std::optional<std::filesystem::path> contractions;
  std::optional<std::filesystem::path> emoji;
};

enum class SelectionMode { kNone, kKBest, kForward };

struct SelectionParams {
  SelectionMode mode = SelectionMode::kNone;
  int k = 40;
  int max_features = 85;
  double min_rel_improvement = 1e-3;
};

struct EvalParams {
  double train_fraction = 0.8;
  int cv_folds = 5;
  int search_samples = 10;
};

struct ExplainParams {
  std::string model = "forest";  // model name or family of the model to explain
  int background = 10;
  int rows = 16;
  int budget = 32;
  int top = 20;
};

struct PipelineConfig {
  int schema_version = kPipelineSchemaVersion;
  std::uint64_t seed = 0;
  std::optional<InputPaths> inputs;
  std::optional<GenConfig> generator;
  WrangleParams wrangle;
  FeatureParams features;
  SentimentAssets sentiment;
  SelectionParams selection;
  std::vector<ModelConfig> models = default_models();
  EvalParams eval;
  ExplainParams explain;
  std::filesystem::path output_dir = "rentlab_out";
  int threads = 0;

  static std::vector<ModelConfig> default_models();
};

// Relative paths resolve against base_dir. Throws ConfigError.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
// Every referenced input file must exist. Throws ConfigError naming the path.
void check_paths(const PipelineConfig& cfg);

// Seeds of the individual stages, all derived from the config seed.
std::uint64_t split_seed(std::uint64_t seed);
std::uint64_t selection_seed(std::uint64_t seed);
std::uint64_t model_seed(std::uint64_t seed);
std::uint64_t explain_seed(std::uint64_t seed);

// Listings schema used after wrangling: imputed counts may be fractional.
const Schema& clean_listings_schema();
// Reviews schema plus the scored columns.
const Schema& scored_reviews_schema();

// ---- in-memory stages ----

struct WrangleResult {
  Table listings;
  Table calendar;
  WrangleReport report;
};

WrangleResult wrangle_tables(const Table& listings, const Table& calendar,
                             const WrangleParams& params);

struct Featurized {
  FeatureMatrix matrix;  // standardized when requested
  WrangleReport report;
};

// One row per calendar night of a known listing, target = nightly price.
Featurized featurize_tables(const Table& listings, const Table& calendar,
                            const Table* scored_reviews, const FeatureParams& params);

struct SelectionResult {
  std::vector<std::string> features;
  std::string scores_csv;
};

// Selection is computed on the training rows of the seeded split only.
SelectionResult select_features(const FeatureMatrix& m, const SelectionParams& params,
                                double train_fraction, std::uint64_t seed);

// ---- file stages ----

void generate_stage(const GenConfig& cfg, const std::filesystem::path& out_dir);
void wrangle_stage(const std::filesystem::path& listings, const std::filesystem::path& calendar,
                   const WrangleParams& params, const std::filesystem::path& out_dir);
// Returns the number of rows dropped as non-English.
std::size_t sentiment_stage(const std::filesystem::path& reviews, const SentimentAssets& assets,
                            const std::filesystem::path& out);
void featurize_stage(const std::filesystem::path& listings, const std::filesystem::path& calendar,
                     const std::optional<std::filesystem::path>& scored_reviews,
                     const FeatureParams& params, const std::filesystem::path& out_dir);
void select_stage(const std::filesystem::path& features, const SelectionParams& params,
                  double train_fraction, std::uint64_t seed, const std::filesystem::path& out_dir);
// Fits one model on the training split and writes its JSON.
void train_stage(const std::filesystem::path& features,
                 const std::optional<std::filesystem::path>& selected, const ModelConfig& model,
                 const EvalParams& eval, std::uint64_t seed, int threads,
                 const std::filesystem::path& out);
void evaluate_stage(const std::filesystem::path& features,
                    const std::optional<std::filesystem::path>& selected,
                    const std::vector<ModelConfig>& models, const EvalParams& eval,
                    std::uint64_t seed, int threads, const std::filesystem::path& out_dir);
void explain_stage(const std::filesystem::path& model, const std::filesystem::path& data,
                   const std::optional<std::filesystem::path>& background,
                   const ExplainParams& params, std::uint64_t seed, int threads,
                   const std::filesystem::path& out_dir);

// Model file name for a configuration: lowercase name, non-alphanumerics '_'.
std::string model_file_name(const ModelConfig& m);

// All stages in order. Progress lines go to `log` when given.
void run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace rentlab

#endif  // RENTLAB_PIPELINE_HPP_
