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

// rentlab: command-line driver for the rental price pipeline.
// Exit status: 0 success, 1 pipeline or data error, 2 usage or config error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rentlab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace rentlab;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

// Options shared by every subcommand: an optional config whose values the
// subcommand flags override.
struct Common {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  PipelineConfig load() const {
    PipelineConfig cfg;
    if (config) cfg = load_pipeline_config(*config);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    return cfg;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Pipeline config JSON");
  app->add_option("--seed", c.seed, "Random seed (overrides config)");
  app->add_option("--threads", c.threads, "Worker threads, 0 for all");
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw ConfigError(std::string(what) + " file not found: " + p.string());
}

SelectionMode parse_mode(const std::string& s) {
  if (s == "none") return SelectionMode::kNone;
  if (s == "kbest") return SelectionMode::kKBest;
  if (s == "forward") return SelectionMode::kForward;
  throw ConfigError("unknown selection mode '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-term rental price pipeline"};
  app.require_subcommand(1);
  std::string stage;
  std::function<void()> action;

  // gen
  Common gen_c;
  fs::path gen_out = ".";
  std::optional<int> gen_listings;
  auto* gen = app.add_subcommand("gen", "Write synthetic listings, calendar and reviews");
  add_common(gen, gen_c);
  gen->add_option("--listings", gen_listings, "Number of listings");
  gen->add_option("-o,--out", gen_out, "Output directory");
  gen->callback([&] {
    stage = "gen";
    action = [&] {
      GenConfig g;
      if (gen_c.config) {
        const PipelineConfig cfg = gen_c.load();
        if (cfg.generator) g = *cfg.generator;
      }
      if (gen_c.seed) g.seed = *gen_c.seed;
      if (gen_listings) g.n_listings = *gen_listings;
      try {
        g.validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      generate_stage(g, gen_out);
    };
  });

  // wrangle
  Common wr_c;
  fs::path wr_listings, wr_calendar, wr_out = "clean";
  std::optional<double> wr_mult;
  std::optional<int> wr_k;
  auto* wr = app.add_subcommand("wrangle", "Deduplicate, impute and remove price outliers");
  add_common(wr, wr_c);
  wr->add_option("--listings", wr_listings, "Raw listings CSV")->required();
  wr->add_option("--calendar", wr_calendar, "Raw calendar CSV")->required();
  wr->add_option("--iqr-multiplier", wr_mult, "IQR fence multiplier");
  wr->add_option("--knn-k", wr_k, "Neighbours for geographic imputation");
  wr->add_option("-o,--out", wr_out, "Output directory");
  wr->callback([&] {
    stage = "wrangle";
    action = [&] {
      PipelineConfig cfg = wr_c.load();
      if (wr_mult) cfg.wrangle.iqr_multiplier = *wr_mult;
      if (wr_k) cfg.wrangle.knn_k = *wr_k;
      require_file(wr_listings, "listings");
      require_file(wr_calendar, "calendar");
      wrangle_stage(wr_listings, wr_calendar, cfg.wrangle, wr_out);
    };
  });

  // sentiment
  Common se_c;
  fs::path se_reviews, se_out = "reviews_scored.csv";
  std::optional<fs::path> se_lexicon, se_contractions, se_emoji;
  auto* se = app.add_subcommand("sentiment", "Score English reviews with the lexicon");
  add_common(se, se_c);
  se->add_option("reviews", se_reviews, "Reviews CSV")->required();
  se->add_option("--lexicon", se_lexicon, "Lexicon TSV (token, valence)");
  se->add_option("--contractions", se_contractions, "Contraction map TSV");
  se->add_option("--emoji", se_emoji, "Emoji map TSV");
  se->add_option("-o,--out", se_out, "Output CSV");
  se->callback([&] {
    stage = "sentiment";
    action = [&] {
      SentimentAssets assets;
      if (se_c.config) assets = se_c.load().sentiment;
      if (se_lexicon) assets.lexicon = *se_lexicon;
      if (se_contractions) assets.contractions = *se_contractions;
      if (se_emoji) assets.emoji = *se_emoji;
      if (assets.lexicon.empty()) throw ConfigError("--lexicon is required");
      require_file(assets.lexicon, "lexicon");
      if (assets.contractions) require_file(*assets.contractions, "contractions");
      if (assets.emoji) require_file(*assets.emoji, "emoji");
      require_file(se_reviews, "reviews");
      const std::size_t dropped = sentiment_stage(se_reviews, assets, se_out);
      std::cerr << "sentiment: dropped " << dropped << " non-English reviews\n";
    };
  });

  // featurize
  Common fe_c;
  fs::path fe_listings, fe_calendar, fe_out = ".";
  std::optional<fs::path> fe_reviews, fe_poi;
  std::optional<int> fe_amenity_k;
  bool fe_raw = false;
  auto* fe = app.add_subcommand("featurize", "Build the feature matrix from cleaned tables");
  add_common(fe, fe_c);
  fe->add_option("--listings", fe_listings, "Cleaned listings CSV")->required();
  fe->add_option("--calendar", fe_calendar, "Cleaned calendar CSV")->required();
  fe->add_option("--reviews", fe_reviews, "Scored reviews CSV");
  fe->add_option("--poi-file", fe_poi, "Points of interest CSV (name, latitude, longitude)");
  fe->add_option("--amenity-k", fe_amenity_k, "Number of amenity indicator columns");
  fe->add_flag("--no-standardize", fe_raw, "Keep raw feature units");
  fe->add_option("-o,--out", fe_out, "Output directory");
  fe->callback([&] {
    stage = "featurize";
    action = [&] {
      PipelineConfig cfg = fe_c.load();
      if (fe_poi) cfg.features.poi_file = *fe_poi;
      if (fe_amenity_k) cfg.features.amenity_k = *fe_amenity_k;
      if (fe_raw) cfg.features.standardize = false;
      require_file(fe_listings, "listings");
      require_file(fe_calendar, "calendar");
      if (fe_reviews) require_file(*fe_reviews, "reviews");
      if (cfg.features.poi_file) require_file(*cfg.features.poi_file, "poi");
      featurize_stage(fe_listings, fe_calendar, fe_reviews, cfg.features, fe_out);
    };
  });

  // select
  Common sl_c;
  fs::path sl_features, sl_out = ".";
  std::optional<std::string> sl_mode;
  std::optional<int> sl_k, sl_max;
  auto* sl = app.add_subcommand("select", "Select features on the training split");
  add_common(sl, sl_c);
  sl->add_option("--features", sl_features, "Feature matrix CSV")->required();
  sl->add_option("--mode", sl_mode, "none, kbest or forward");
  sl->add_option("--k", sl_k, "Features kept by kbest");
  sl->add_option("--max-features", sl_max, "Forward selection limit");
  sl->add_option("-o,--out", sl_out, "Output directory");
  sl->callback([&] {
    stage = "select";
    action = [&] {
      PipelineConfig cfg = sl_c.load();
      if (sl_mode) cfg.selection.mode = parse_mode(*sl_mode);
      if (sl_k) cfg.selection.k = *sl_k;
      if (sl_max) cfg.selection.max_features = *sl_max;
      require_file(sl_features, "features");
      select_stage(sl_features, cfg.selection, cfg.eval.train_fraction, cfg.seed, sl_out);
    };
  });

  // train
  Common tr_c;
  fs::path tr_features, tr_out = "model.json";
  std::optional<fs::path> tr_selected;
  std::string tr_family;
  std::optional<std::string> tr_params;
  auto* tr = app.add_subcommand("train", "Fit one model on the training split");
  add_common(tr, tr_c);
  tr->add_option("--features", tr_features, "Feature matrix CSV")->required();
  tr->add_option("--selected", tr_selected, "Selected feature list");
  tr->add_option("--family", tr_family, "ols, lasso, ridge, elastic_net, tree, forest or gbm")
      ->required();
  tr->add_option("--params", tr_params, "Hyperparameters as a JSON object");
  tr->add_option("-o,--out", tr_out, "Output model JSON");
  tr->callback([&] {
    stage = "train";
    action = [&] {
      const PipelineConfig cfg = tr_c.load();
      ModelConfig m;
      try {
        m.family = parse_family(tr_family);
        m.name = display_name(m.family);
        for (const auto& c : cfg.models) {
          if (c.family == m.family) m = c;
        }
        if (tr_params) m.params = hyperparams_from_json(nlohmann::json::parse(*tr_params), m.params);
        m.params.validate();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("--params: ") + e.what());
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      require_file(tr_features, "features");
      if (tr_selected) require_file(*tr_selected, "selected");
      train_stage(tr_features, tr_selected, m, cfg.eval, cfg.seed, cfg.threads, tr_out);
    };
  });

  // evaluate
  Common ev_c;
  fs::path ev_features, ev_out = ".";
  std::optional<fs::path> ev_selected;
  auto* ev = app.add_subcommand("evaluate", "Fit every configured model and report test metrics");
  add_common(ev, ev_c);
  ev->add_option("--features", ev_features, "Feature matrix CSV")->required();
  ev->add_option("--selected", ev_selected, "Selected feature list");
  ev->add_option("-o,--out", ev_out, "Output directory");
  ev->callback([&] {
    stage = "evaluate";
    action = [&] {
      const PipelineConfig cfg = ev_c.load();
      require_file(ev_features, "features");
      if (ev_selected) require_file(*ev_selected, "selected");
      evaluate_stage(ev_features, ev_selected, cfg.models, cfg.eval, cfg.seed, cfg.threads,
                     ev_out);
    };
  });

  // explain
  Common ex_c;
  fs::path ex_model, ex_data, ex_out = ".";
  std::optional<fs::path> ex_background;
  std::optional<int> ex_top, ex_rows, ex_budget, ex_bg_rows;
  auto* ex = app.add_subcommand("explain", "Rank features by mean absolute Shapley value");
  add_common(ex, ex_c);
  ex->add_option("--model", ex_model, "Model JSON")->required();
  ex->add_option("--data", ex_data, "Rows to explain (matrix CSV)")->required();
  ex->add_option("--background", ex_background, "Background rows (matrix CSV)");
  ex->add_option("--top", ex_top, "Features in the ranking");
  ex->add_option("--rows", ex_rows, "Rows sampled from --data");
  ex->add_option("--background-rows", ex_bg_rows, "Rows sampled from the background");
  ex->add_option("--budget", ex_budget, "Permutations per row in sampled mode");
  ex->add_option("-o,--out", ex_out, "Output directory");
  ex->callback([&] {
    stage = "explain";
    action = [&] {
      PipelineConfig cfg = ex_c.load();
      if (ex_top) cfg.explain.top = *ex_top;
      if (ex_rows) cfg.explain.rows = *ex_rows;
      if (ex_bg_rows) cfg.explain.background = *ex_bg_rows;
      if (ex_budget) cfg.explain.budget = *ex_budget;
      if (cfg.explain.top < 0 || cfg.explain.rows < 1 || cfg.explain.background < 1 ||
          cfg.explain.budget < 1) {
        throw ConfigError("--top, --rows, --background-rows and --budget must be positive");
      }
      require_file(ex_model, "model");
      require_file(ex_data, "data");
      if (ex_background) require_file(*ex_background, "background");
      explain_stage(ex_model, ex_data, ex_background, cfg.explain, explain_seed(cfg.seed),
                    cfg.threads, ex_out);
    };
  });

  // run
  Common run_c;
  std::optional<fs::path> run_out;
  auto* run = app.add_subcommand("run", "Run every stage from one config");
  add_common(run, run_c);
  run->add_option("-o,--out", run_out, "Output directory (overrides config)");
  run->callback([&] {
    stage = "run";
    action = [&] {
      if (!run_c.config) throw ConfigError("--config is required");
      PipelineConfig cfg = run_c.load();
      if (run_out) cfg.output_dir = *run_out;
      if (run_c.seed && cfg.generator) cfg.generator->seed = *run_c.seed;
      run_pipeline(cfg, &std::cerr);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    action();
  } catch (const ConfigError& e) {
    std::cerr << "rentlab " << stage << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "rentlab " << stage << ": " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
