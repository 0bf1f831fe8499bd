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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rentlab/common.hpp"
#include "rentlab/pipeline.hpp"

namespace rentlab {
namespace {

namespace fs = std::filesystem;

nlohmann::json small_config() {
  return {
      {"schema_version", 1},
      {"seed", 5},
      {"generator", {{"n_listings", 20}, {"end", "2022-07-31"}, {"missing_fraction", 0.02}}},
      {"sentiment", {{"lexicon", std::string(RENTLAB_DATA_DIR) + "/lexicon.tsv"}}},
      {"selection", {{"mode", "kbest"}, {"k", 15}}},
      {"models", {{{"family", "ridge"}, {"params", {{"alpha", 0.5}}}},
                  {{"family", "lasso"}, {"params", {{"alpha", 0.05}}}},
                  {{"family", "forest"}, {"name", "Forest"},
                   {"params", {{"n_trees", 6}, {"max_depth", 5}}}}}},
      {"eval", {{"search_samples", 1}, {"cv_folds", 3}}},
      {"explain", {{"model", "Forest"}, {"rows", 4}, {"background", 4}, {"budget", 8}}},
  };
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / ("rentlab_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(PipelineConfigTest, ParsesMinimalConfig) {
  const PipelineConfig cfg = pipeline_config_from_json(small_config());
  EXPECT_EQ(cfg.seed, 5u);
  ASSERT_TRUE(cfg.generator);
  EXPECT_EQ(cfg.generator->seed, 5u);
  EXPECT_EQ(cfg.models.size(), 3u);
  EXPECT_EQ(cfg.selection.mode, SelectionMode::kKBest);
  EXPECT_EQ(cfg.output_dir, fs::path("rentlab_out"));
}

TEST(PipelineConfigTest, RejectsMalformedConfigs) {
  auto broken = [](auto edit) {
    nlohmann::json j = small_config();
    edit(j);
    return j;
  };
  EXPECT_THROW(pipeline_config_from_json(broken([](auto& j) { j.erase("seed"); })), ConfigError);
  EXPECT_THROW(pipeline_config_from_json(broken([](auto& j) { j["sed"] = 1; })), ConfigError);
  EXPECT_THROW(pipeline_config_from_json(broken([](auto& j) { j["schema_version"] = 2; })),
               ConfigError);
  EXPECT_THROW(pipeline_config_from_json(broken([](auto& j) { j.erase("generator"); })),
               ConfigError);
  EXPECT_THROW(pipeline_config_from_json(broken([](auto& j) {
                 j["inputs"] = {{"listings", "l.csv"}, {"calendar", "c.csv"}, {"reviews", "r.csv"}};
               })),
               ConfigError);
  EXPECT_THROW(pipeline_config_from_json(broken([](auto& j) { j["selection"]["mode"] = "lasso"; })),
               ConfigError);
  EXPECT_THROW(pipeline_config_from_json(broken([](auto& j) { j["models"][1]["family"] = "ridge"; })),
               ConfigError);
}

TEST(PipelineConfigTest, MissingInputFileIsNamed) {
  nlohmann::json j = small_config();
  j["sentiment"]["lexicon"] = "absent_lexicon.tsv";
  const PipelineConfig cfg = pipeline_config_from_json(j, "/nonexistent");
  try {
    check_paths(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/absent_lexicon.tsv"), std::string::npos);
  }
}

TEST(PipelineTest, ModelFileNames) {
  ModelConfig m;
  m.name = "XG-Boost";
  EXPECT_EQ(model_file_name(m), "xg_boost.json");
  m.name = "Random Forest";
  EXPECT_EQ(model_file_name(m), "random_forest.json");
}

TEST(PipelineTest, StagesComposeToRunPipeline) {
  PipelineConfig cfg = pipeline_config_from_json(small_config());
  cfg.threads = 1;
  cfg.output_dir = scratch("whole");
  run_pipeline(cfg);

  const fs::path dir = scratch("staged");
  generate_stage(*cfg.generator, dir / "raw");
  wrangle_stage(dir / "raw" / "listings.csv", dir / "raw" / "calendar.csv", cfg.wrangle,
                dir / "clean");
  sentiment_stage(dir / "raw" / "reviews.csv", cfg.sentiment, dir / "reviews_scored.csv");
  featurize_stage(dir / "clean" / "listings.csv", dir / "clean" / "calendar.csv",
                  dir / "reviews_scored.csv", cfg.features, dir);
  select_stage(dir / "features.csv", cfg.selection, cfg.eval.train_fraction, cfg.seed, dir);
  evaluate_stage(dir / "features.csv", dir / "selected_features.txt", cfg.models, cfg.eval,
                 cfg.seed, 2, dir);

  for (const char* file : {"features.csv", "selected_features.txt", "eval_report.csv",
                           "eval_report.json", "models/forest.json"}) {
    EXPECT_EQ(slurp(dir / file), slurp(cfg.output_dir / file)) << file;
  }
  const auto selected = read_lines(dir / "selected_features.txt");
  EXPECT_LE(selected.size(), 15u);
  EXPECT_TRUE(fs::exists(cfg.output_dir / "shap_ranking.csv"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "impurity_importance.csv"));
}

TEST(PipelineTest, UnknownExplainTargetFailsBeforeWork) {
  nlohmann::json j = small_config();
  j["explain"]["model"] = "svm";
  PipelineConfig cfg = pipeline_config_from_json(j);
  cfg.output_dir = scratch("bad_target");
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
  EXPECT_FALSE(fs::exists(cfg.output_dir / "clean"));
}

}  // namespace
}  // namespace rentlab
