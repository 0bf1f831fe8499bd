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

#include "rentlab/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rentlab/common.hpp"
#include "rentlab/select_explain.hpp"
#include "rentlab/text_util.hpp"

namespace rentlab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

std::vector<ModelConfig> PipelineConfig::default_models() {
  std::vector<ModelConfig> out;
  HyperParams lasso;
  lasso.alpha = 0.1;
  out.push_back({"Lasso", ModelFamily::kLasso, lasso, {}});
  HyperParams ridge;
  ridge.alpha = 1.0;
  out.push_back({"Ridge", ModelFamily::kRidge, ridge, {}});
  HyperParams elastic;
  elastic.alpha = 0.1;
  elastic.l1_ratio = 0.5;
  out.push_back({"Elastic", ModelFamily::kElasticNet, elastic, {}});
  HyperParams forest;
  forest.n_trees = 100;
  forest.max_depth = 12;
  out.push_back({"Random Forest", ModelFamily::kForest, forest, {}});
  HyperParams gbm;
  gbm.n_rounds = 200;
  gbm.max_depth = 4;
  gbm.learning_rate = 0.1;
  out.push_back({"XG-Boost", ModelFamily::kGbm, gbm, {}});
  return out;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Date parse_date_field(const nlohmann::json& v, const std::string& what) {
  if (!v.is_string()) throw ConfigError(what + " must be a YYYY-MM-DD string");
  const auto d = Date::parse(v.get<std::string>());
  if (!d) throw ConfigError(what + ": invalid date '" + v.get<std::string>() + "'");
  return *d;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("models entries must be objects");
  reject_unknown(j, {"family", "name", "params", "grid"}, "models");
  ModelConfig m;
  m.family = parse_family(j.at("family").get<std::string>());
  m.name = j.value("name", display_name(m.family));
  if (j.contains("params")) m.params = hyperparams_from_json(j.at("params"));
  if (j.contains("grid")) m.grid = param_grid_from_json(j.at("grid"));
  m.params.validate();
  return m;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig cfg;
  try {
    reject_unknown(j,
                   {"schema_version", "seed", "inputs", "generator", "wrangle", "features",
                    "sentiment", "selection", "models", "eval", "explain", "output_dir",
                    "threads"},
                   "config");
    if (!j.contains("schema_version")) throw ConfigError("config: schema_version is required");
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != kPipelineSchemaVersion) {
      throw ConfigError("config: unsupported schema_version " +
                        std::to_string(cfg.schema_version) + " (expected " +
                        std::to_string(kPipelineSchemaVersion) + ")");
    }
    if (!j.contains("seed")) throw ConfigError("config: seed is required");
    cfg.seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      reject_unknown(in, {"listings", "calendar", "reviews"}, "inputs");
      cfg.inputs = InputPaths{resolve(base_dir, in.at("listings").get<std::string>()),
                              resolve(base_dir, in.at("calendar").get<std::string>()),
                              resolve(base_dir, in.at("reviews").get<std::string>())};
    }
    if (j.contains("generator")) {
      GenConfig g;
      g.seed = cfg.seed;
      cfg.generator = gen_config_from_json(j.at("generator"), g);
    }
    if (cfg.inputs.has_value() == cfg.generator.has_value()) {
      throw ConfigError("config: give exactly one of 'inputs' or 'generator'");
    }
    if (j.contains("wrangle")) {
      const auto& w = j.at("wrangle");
      reject_unknown(w, {"iqr_multiplier", "knn_k", "knn_warn_km", "gap"}, "wrangle");
      cfg.wrangle.iqr_multiplier = w.value("iqr_multiplier", cfg.wrangle.iqr_multiplier);
      cfg.wrangle.knn_k = w.value("knn_k", cfg.wrangle.knn_k);
      cfg.wrangle.knn_warn_km = w.value("knn_warn_km", cfg.wrangle.knn_warn_km);
      if (w.contains("gap") && !w.at("gap").is_null()) {
        cfg.wrangle.gap = GapSpec{parse_date_field(w.at("gap").at("start"), "wrangle.gap.start"),
                                  parse_date_field(w.at("gap").at("end"), "wrangle.gap.end")};
      }
      if (cfg.wrangle.iqr_multiplier < 0.0) throw ConfigError("wrangle.iqr_multiplier must be >= 0");
      if (cfg.wrangle.knn_k < 1) throw ConfigError("wrangle.knn_k must be >= 1");
    }
    if (j.contains("features")) {
      const auto& f = j.at("features");
      reject_unknown(f, {"poi_file", "amenity_k", "standardize"}, "features");
      if (f.contains("poi_file") && !f.at("poi_file").is_null()) {
        cfg.features.poi_file = resolve(base_dir, f.at("poi_file").get<std::string>());
      }
      cfg.features.amenity_k = f.value("amenity_k", cfg.features.amenity_k);
      cfg.features.standardize = f.value("standardize", cfg.features.standardize);
      if (cfg.features.amenity_k < 0) throw ConfigError("features.amenity_k must be >= 0");
    }
    if (!j.contains("sentiment") || !j.at("sentiment").contains("lexicon")) {
      throw ConfigError("config: sentiment.lexicon is required");
    }
    {
      const auto& s = j.at("sentiment");
      reject_unknown(s, {"lexicon", "contractions", "emoji"}, "sentiment");
      cfg.sentiment.lexicon = resolve(base_dir, s.at("lexicon").get<std::string>());
      if (s.contains("contractions")) {
        cfg.sentiment.contractions = resolve(base_dir, s.at("contractions").get<std::string>());
      }
      if (s.contains("emoji")) cfg.sentiment.emoji = resolve(base_dir, s.at("emoji").get<std::string>());
    }
    if (j.contains("selection")) {
      const auto& s = j.at("selection");
      reject_unknown(s, {"mode", "k", "max_features", "min_rel_improvement"}, "selection");
      const std::string mode = s.value("mode", std::string("none"));
      if (mode == "none") cfg.selection.mode = SelectionMode::kNone;
      else if (mode == "kbest") cfg.selection.mode = SelectionMode::kKBest;
      else if (mode == "forward") cfg.selection.mode = SelectionMode::kForward;
      else throw ConfigError("selection.mode must be none, kbest or forward");
      cfg.selection.k = s.value("k", cfg.selection.k);
      cfg.selection.max_features = s.value("max_features", cfg.selection.max_features);
      cfg.selection.min_rel_improvement =
          s.value("min_rel_improvement", cfg.selection.min_rel_improvement);
      if (cfg.selection.k < 1 || cfg.selection.max_features < 1) {
        throw ConfigError("selection.k and selection.max_features must be >= 1");
      }
    }
    if (j.contains("models")) {
      cfg.models.clear();
      for (const auto& m : j.at("models")) cfg.models.push_back(model_config_from_json(m));
      if (cfg.models.empty()) throw ConfigError("config: models list is empty");
      std::set<std::string> files;
      for (const auto& m : cfg.models) {
        if (!files.insert(model_file_name(m)).second) {
          throw ConfigError("config: duplicate model name '" + m.name + "'");
        }
      }
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      reject_unknown(e, {"train_fraction", "cv_folds", "search_samples"}, "eval");
      cfg.eval.train_fraction = e.value("train_fraction", cfg.eval.train_fraction);
      cfg.eval.cv_folds = e.value("cv_folds", cfg.eval.cv_folds);
      cfg.eval.search_samples = e.value("search_samples", cfg.eval.search_samples);
      if (!(cfg.eval.train_fraction > 0.0 && cfg.eval.train_fraction < 1.0)) {
        throw ConfigError("eval.train_fraction must be in (0, 1)");
      }
      if (cfg.eval.cv_folds < 2) throw ConfigError("eval.cv_folds must be >= 2");
      if (cfg.eval.search_samples < 1) throw ConfigError("eval.search_samples must be >= 1");
    }
    if (j.contains("explain")) {
      const auto& e = j.at("explain");
      reject_unknown(e, {"model", "background", "rows", "budget", "top"}, "explain");
      cfg.explain.model = e.value("model", cfg.explain.model);
      cfg.explain.background = e.value("background", cfg.explain.background);
      cfg.explain.rows = e.value("rows", cfg.explain.rows);
      cfg.explain.budget = e.value("budget", cfg.explain.budget);
      cfg.explain.top = e.value("top", cfg.explain.top);
      if (cfg.explain.background < 1 || cfg.explain.rows < 1 || cfg.explain.budget < 1 ||
          cfg.explain.top < 0) {
        throw ConfigError("explain: background, rows and budget must be >= 1");
      }
    }
    cfg.output_dir = resolve(base_dir, j.value("output_dir", std::string("rentlab_out")));
    cfg.threads = j.value("threads", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(j, path.parent_path());
}

void check_paths(const PipelineConfig& cfg) {
  auto need = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " file not found: " + p.string());
  };
  if (cfg.inputs) {
    need(cfg.inputs->listings, "listings");
    need(cfg.inputs->calendar, "calendar");
    need(cfg.inputs->reviews, "reviews");
  }
  need(cfg.sentiment.lexicon, "lexicon");
  if (cfg.sentiment.contractions) need(*cfg.sentiment.contractions, "contractions");
  if (cfg.sentiment.emoji) need(*cfg.sentiment.emoji, "emoji");
  if (cfg.features.poi_file) need(*cfg.features.poi_file, "poi");
}

std::uint64_t split_seed(std::uint64_t seed) { return derive_seed(seed, 11); }
std::uint64_t selection_seed(std::uint64_t seed) { return derive_seed(seed, 12); }
std::uint64_t model_seed(std::uint64_t seed) { return derive_seed(seed, 13); }
std::uint64_t explain_seed(std::uint64_t seed) { return derive_seed(seed, 14); }

const Schema& clean_listings_schema() {
  static const Schema kSchema = [] {
    Schema s = listings_schema();
    s.name = "clean_listings";
    for (auto& f : s.fields) {
      if (f.kind == FieldKind::kInteger && f.name != "id" && f.name != "host_id") {
        f.kind = FieldKind::kNumeric;
      }
    }
    return s;
  }();
  return kSchema;
}

const Schema& scored_reviews_schema() {
  static const Schema kSchema = [] {
    Schema s = reviews_schema();
    s.name = "scored_reviews";
    for (const char* name : {"pos", "neg", "neu", "compound"}) {
      s.fields.push_back({name, FieldKind::kNumeric, true});
    }
    s.fields.push_back({"label", FieldKind::kText, true});
    return s;
  }();
  return kSchema;
}

// ---------------------------------------------------------------------------
// In-memory stages
// ---------------------------------------------------------------------------

WrangleResult wrangle_tables(const Table& listings, const Table& calendar,
                             const WrangleParams& params) {
  WrangleResult out;
  WrangleReport& rep = out.report;

  const std::vector<std::string> listing_key{"id"};
  Table l = drop_duplicates(listings, listing_key);
  rep.add("drop_duplicates", "id", listings.n_rows() - l.n_rows());
  for (const char* col : {"bedrooms", "beds", "bathrooms"}) {
    if (!l.has(col) || l.column(col).missing_count() == 0) continue;
    if (l.column(col).type() == ColumnType::kInteger) {
      l.set(col, Column(l.column(col).to_doubles()));
    }
    KnnImputation knn = knn_impute_geo(l, col, "latitude", "longitude", params.knn_k,
                                       params.knn_warn_km, &rep);
    l = std::move(knn.table);
  }
  if (l.has("review_scores_rating") && l.column("review_scores_rating").missing_count() > 0) {
    l = impute_global_median(l, "review_scores_rating", &rep);
  }
  out.listings = std::move(l);

  const std::vector<std::string> cal_key{"listing_id", "date"};
  Table c = drop_duplicates(calendar, cal_key);
  rep.add("drop_duplicates", "listing_id+date", calendar.n_rows() - c.n_rows());
  if (params.gap) c = fill_calendar_gap(c, *params.gap, &rep);
  {
    const Column& price = c.column("price");
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < c.n_rows(); ++r) {
      if (!price.is_missing(r)) keep.push_back(r);
    }
    const std::size_t dropped = c.n_rows() - keep.size();
    c = c.take(keep);
    rep.add("drop_missing", "price", dropped);
  }
  c = remove_outliers(c, "price", params.iqr_multiplier, &rep);
  out.calendar = std::move(c);
  return out;
}

namespace {

bool nonempty_comment(const Table& t, std::size_t r) {
  if (!t.has("comments")) return true;
  const Column& c = t.column("comments");
  if (c.is_missing(r)) return false;
  return !trim(c.format(r)).empty();
}

}  // namespace

Featurized featurize_tables(const Table& listings, const Table& calendar,
                            const Table* scored_reviews, const FeatureParams& params) {
  Featurized out;
  WrangleReport& rep = out.report;
  Table l = listings;

  if (scored_reviews != nullptr) {
    const Table& rv = *scored_reviews;
    std::unordered_map<std::string, std::pair<double, std::size_t>> by_listing;
    const Column& lid = rv.column("listing_id");
    const Cells<double> comp = rv.column("compound").to_doubles();
    for (std::size_t r = 0; r < rv.n_rows(); ++r) {
      if (lid.is_missing(r) || !comp[r] || !nonempty_comment(rv, r)) continue;
      auto& acc = by_listing[lid.format(r)];
      acc.first += *comp[r];
      ++acc.second;
    }
    Cells<double> compound(l.n_rows());
    std::size_t with_reviews = 0;
    const Column& id = l.column("id");
    for (std::size_t r = 0; r < l.n_rows(); ++r) {
      const auto it = by_listing.find(id.format(r));
      if (it != by_listing.end()) {
        compound[r] = it->second.first / static_cast<double>(it->second.second);
        ++with_reviews;
      }
    }
    l.set("compound", Column(std::move(compound)));
    rep.add("aggregate_sentiment", "compound", with_reviews);
    const std::size_t missing = l.column("compound").missing_count();
    if (missing > 0 && l.has("host_id")) {
      l = fill_missing_sentiment(l);
      rep.add("fill_missing_sentiment", "compound", missing);
    }
  }

  const PoiSet pois = params.poi_file ? PoiSet::load_csv(*params.poi_file) : PoiSet::austin_default();
  {
    PoiDistanceResult pr = poi_distance_features(l, pois);
    l = std::move(pr.table);
    if (!pr.bad_rows.empty()) {
      std::vector<char> bad(l.n_rows(), 0);
      for (std::size_t r : pr.bad_rows) bad[r] = 1;
      std::vector<std::size_t> keep;
      for (std::size_t r = 0; r < l.n_rows(); ++r) {
        if (!bad[r]) keep.push_back(r);
      }
      l = l.take(keep);
    }
    rep.add("poi_distances", "latitude+longitude", pr.bad_rows.size(),
            pr.bad_rows.empty() ? "" : "dropped_invalid_coordinates");
  }
  if (l.has("amenities") && params.amenity_k > 0) {
    const auto top = top_k_amenities(l, params.amenity_k);
    l = binarize_amenities(l, top);
    rep.add("binarize_amenities", "amenities", top.size());
  }
  if (l.has("room_type") && l.column("room_type").type() == ColumnType::kText) {
    l = one_hot(l, "room_type");
    for (const auto& name : l.names()) {
      if (name.rfind("room_type_", 0) == 0) {
        // The dummies sum to one; the first category is the reference level.
        l.drop(name);
        rep.add("drop_reference_category", name, 0);
        break;
      }
    }
  }

  // One row per calendar night of a known listing.
  std::unordered_map<std::string, std::size_t> listing_row;
  const Column& id = l.column("id");
  for (std::size_t r = 0; r < l.n_rows(); ++r) {
    if (!id.is_missing(r)) listing_row.emplace(id.format(r), r);
  }
  const Column& cal_listing = calendar.column("listing_id");
  const Column& cal_price = calendar.column("price");
  std::vector<std::size_t> lrows;
  std::vector<std::size_t> crows;
  for (std::size_t r = 0; r < calendar.n_rows(); ++r) {
    if (cal_listing.is_missing(r) || cal_price.is_missing(r)) continue;
    const auto it = listing_row.find(cal_listing.format(r));
    if (it == listing_row.end()) continue;
    lrows.push_back(it->second);
    crows.push_back(r);
  }
  rep.add("join_calendar", "listing_id", calendar.n_rows() - crows.size(), "unmatched_or_unpriced");
  if (crows.empty()) throw EmptyInputError("featurize: no calendar rows match a listing");
  Table merged = l.take(lrows);
  if (merged.has("price")) merged.drop("price");
  merged.add("price", Column(calendar.column("price").take(crows).to_doubles()));
  if (merged.has("date")) merged.drop("date");
  merged.add("date", calendar.column("date").take(crows));
  merged = expand_date(merged, "date");

  static const std::set<std::string> kExcluded{"id", "host_id", "listing_id", "price", "year"};
  std::vector<std::string> features;
  for (const auto& [name, col] : merged.columns()) {
    if (kExcluded.count(name) || !col.is_numeric_like()) continue;
    features.push_back(name);
  }
  for (const auto& f : features) {
    if (merged.column(f).missing_count() == 0) continue;
    merged.set(f, Column(merged.column(f).to_doubles()));
    merged = impute_global_median(merged, f, &rep);
  }
  FeatureMatrix m = assemble_matrix(merged, "price", features);
  std::vector<std::string> keep;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto& name = m.feature_names[static_cast<std::size_t>(j)];
    if (m.x.col(j).maxCoeff() > m.x.col(j).minCoeff()) {
      keep.push_back(name);
    } else {
      rep.add("drop_constant", name, 0);
    }
  }
  m = m.select(keep);
  if (params.standardize) m = standardize(m);
  out.matrix = std::move(m);
  return out;
}

SelectionResult select_features(const FeatureMatrix& m, const SelectionParams& params,
                                double train_fraction, std::uint64_t seed) {
  SelectionResult out;
  const FeatureMatrix train = train_test_split(m, train_fraction, split_seed(seed)).train;
  std::ostringstream csv;
  switch (params.mode) {
    case SelectionMode::kNone:
      out.features = m.feature_names;
      csv << "feature\n";
      for (const auto& f : out.features) csv << csv_escape(f) << '\n';
      break;
    case SelectionMode::kKBest: {
      const auto scores = f_scores(train);
      out.features = select_k_best(scores, params.k).features;
      write_scores_csv(scores, csv);
      break;
    }
    case SelectionMode::kForward: {
      ForwardOptions opt;
      opt.max_features = params.max_features;
      opt.min_rel_improvement = params.min_rel_improvement;
      opt.seed = selection_seed(seed);
      const ForwardSelection fs = forward_select(train, opt);
      out.features = fs.features;
      csv << "step,feature,validation_mse\n";
      csv << "0,," << format_double(fs.validation_mse.front()) << '\n';
      for (std::size_t i = 0; i < fs.features.size(); ++i) {
        csv << i + 1 << ',' << csv_escape(fs.features[i]) << ','
            << format_double(fs.validation_mse[i + 1]) << '\n';
      }
      break;
    }
  }
  if (out.features.empty()) throw EmptyInputError("select: no features selected");
  out.scores_csv = csv.str();
  return out;
}

// ---------------------------------------------------------------------------
// File stages
// ---------------------------------------------------------------------------

namespace {

std::string table_csv(const Table& t) {
  std::ostringstream os;
  write_csv(t, os);
  return os.str();
}

std::string matrix_csv(const FeatureMatrix& m) {
  std::ostringstream os;
  write_matrix_csv(m, os);
  return os.str();
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

FeatureMatrix load_selected(const fs::path& features, const std::optional<fs::path>& selected) {
  FeatureMatrix m = read_matrix_csv(features);
  if (selected) {
    const auto names = read_lines(*selected);
    if (names.empty()) throw EmptyInputError("selected feature list is empty");
    m = m.select(names);
  }
  return m;
}

TextCleaner load_cleaner(const SentimentAssets& assets) {
  TextCleaner cleaner = TextCleaner::builtin();
  if (assets.contractions) cleaner.contractions = load_text_map(*assets.contractions);
  if (assets.emoji) cleaner.emoji = load_text_map(*assets.emoji);
  return cleaner;
}

}  // namespace

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string model_file_name(const ModelConfig& m) {
  std::string name = m.name.empty() ? std::string(to_string(m.family)) : m.name;
  for (auto& ch : name) {
    const auto u = static_cast<unsigned char>(ch);
    ch = std::isalnum(u) ? static_cast<char>(std::tolower(u)) : '_';
  }
  return name + ".json";
}

void generate_stage(const GenConfig& cfg, const fs::path& out_dir) {
  write_generated(generate(cfg), out_dir);
}

void wrangle_stage(const fs::path& listings, const fs::path& calendar, const WrangleParams& params,
                   const fs::path& out_dir) {
  const LoadResult l = read_csv(listings, listings_schema());
  const LoadResult c = read_csv(calendar, calendar_schema());
  WrangleResult w = wrangle_tables(l.table, c.table, params);
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "listings.csv", table_csv(w.listings));
  write_file_atomic(out_dir / "calendar.csv", table_csv(w.calendar));
  WrangleReport report;
  report.add("load", "listings", l.report.rows,
             "coerced=" + std::to_string(l.report.coerced_cells));
  report.add("load", "calendar", c.report.rows,
             "coerced=" + std::to_string(c.report.coerced_cells));
  for (auto& e : w.report.entries) report.entries.push_back(std::move(e));
  write_file_atomic(out_dir / "wrangle_report.csv", report.to_csv());
}

std::size_t sentiment_stage(const fs::path& reviews, const SentimentAssets& assets,
                            const fs::path& out) {
  const Lexicon lex = Lexicon::load(assets.lexicon);
  const TextCleaner cleaner = load_cleaner(assets);
  const LoadResult r = read_csv(reviews, reviews_schema());
  ReviewScoring scored = score_reviews(r.table, lex, cleaner);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_file_atomic(out, table_csv(scored.table));
  return scored.dropped_non_english;
}

void featurize_stage(const fs::path& listings, const fs::path& calendar,
                     const std::optional<fs::path>& scored_reviews, const FeatureParams& params,
                     const fs::path& out_dir) {
  const Table l = read_csv(listings, clean_listings_schema()).table;
  const Table c = read_csv(calendar, calendar_schema()).table;
  std::optional<Table> rv;
  if (scored_reviews) rv = read_csv(*scored_reviews, scored_reviews_schema()).table;
  const Featurized f = featurize_tables(l, c, rv ? &*rv : nullptr, params);
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "features.csv", matrix_csv(f.matrix));
  nlohmann::json scaling{{"feature_names", f.matrix.feature_names},
                         {"standardized", f.matrix.scaling.has_value()}};
  if (f.matrix.scaling) {
    scaling["means"] = f.matrix.scaling->means;
    scaling["stds"] = f.matrix.scaling->stds;
  }
  write_file_atomic(out_dir / "scaling.json", json_text(scaling));
  write_file_atomic(out_dir / "feature_report.csv", f.report.to_csv());
}

void select_stage(const fs::path& features, const SelectionParams& params, double train_fraction,
                  std::uint64_t seed, const fs::path& out_dir) {
  const FeatureMatrix m = read_matrix_csv(features);
  const SelectionResult s = select_features(m, params, train_fraction, seed);
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "selection.csv", s.scores_csv);
  std::string list;
  for (const auto& f : s.features) list += f + "\n";
  write_file_atomic(out_dir / "selected_features.txt", list);
}

void train_stage(const fs::path& features, const std::optional<fs::path>& selected,
                 const ModelConfig& model, const EvalParams& eval, std::uint64_t seed,
                 int threads, const fs::path& out) {
  const FeatureMatrix m = load_selected(features, selected);
  const TrainTest tt = train_test_split(m, eval.train_fraction, split_seed(seed));
  HyperParams hp = model.params;
  if (!model.grid.empty()) {
    hp = random_search(tt.train, model.family, model.grid, eval.search_samples, eval.cv_folds,
                       model_seed(seed), model.params, threads)
             .best;
  }
  const Model fitted = fit_model(model.family, tt.train, hp, model_seed(seed), threads);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_file_atomic(out, json_text(to_json(fitted)));
}

void evaluate_stage(const fs::path& features, const std::optional<fs::path>& selected,
                    const std::vector<ModelConfig>& models, const EvalParams& eval,
                    std::uint64_t seed, int threads, const fs::path& out_dir) {
  const FeatureMatrix m = load_selected(features, selected);
  const TrainTest tt = train_test_split(m, eval.train_fraction, split_seed(seed));
  const Comparison cmp = compare_models(tt.train, tt.test, models, model_seed(seed),
                                        eval.search_samples, eval.cv_folds, threads);
  fs::create_directories(out_dir / "models");
  write_file_atomic(out_dir / "train.csv", matrix_csv(tt.train));
  write_file_atomic(out_dir / "test.csv", matrix_csv(tt.test));
  for (std::size_t i = 0; i < models.size(); ++i) {
    write_file_atomic(out_dir / "models" / model_file_name(models[i]),
                      json_text(to_json(cmp.models[i])));
  }
  std::ostringstream table;
  write_report_table_csv(cmp.reports, table);
  write_file_atomic(out_dir / "eval_report.csv", table.str());
  write_file_atomic(out_dir / "eval_report.json",
                    json_text(nlohmann::json{{"n_train", tt.train.rows()},
                                             {"n_test", tt.test.rows()},
                                             {"reports", to_json(cmp.reports)}}));
}

void explain_stage(const fs::path& model_path, const fs::path& data,
                   const std::optional<fs::path>& background, const ExplainParams& params,
                   std::uint64_t seed, int threads, const fs::path& out_dir) {
  std::ifstream in(model_path);
  if (!in) throw IoError("cannot open model '" + model_path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("model '" + model_path.string() + "' is not valid JSON: " + e.what());
  }
  const Model model = model_from_json(j);
  const FeatureMatrix rows_all = read_matrix_csv(data).select(model.feature_names);
  const FeatureMatrix bg_all =
      background ? read_matrix_csv(*background).select(model.feature_names) : rows_all;
  if (rows_all.rows() == 0 || bg_all.rows() == 0) throw EmptyInputError("explain: no rows");

  auto sample = [](const FeatureMatrix& m, int count, std::uint64_t s) {
    Rng rng(s);
    const auto perm = random_permutation(static_cast<std::size_t>(m.rows()), rng);
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < perm.size() && static_cast<int>(i) < count; ++i) {
      idx.push_back(static_cast<Eigen::Index>(perm[i]));
    }
    std::sort(idx.begin(), idx.end());
    return m.take_rows(idx);
  };
  const FeatureMatrix bg = sample(bg_all, params.background, derive_seed(seed, 1));
  const FeatureMatrix rows = sample(rows_all, params.rows, derive_seed(seed, 2));
  const ShapRanking ranking =
      shap_ranking(model.fitted, rows, bg.x, params.budget, derive_seed(seed, 3), threads);

  fs::create_directories(out_dir);
  std::ostringstream csv;
  write_ranking_csv(ranking.mean_abs, "mean_abs_shap", csv, static_cast<std::size_t>(params.top));
  write_file_atomic(out_dir / "shap_ranking.csv", csv.str());
  nlohmann::json values = nlohmann::json::array();
  for (const auto& e : ranking.rows) values.push_back(to_json(e, model.feature_names));
  write_file_atomic(out_dir / "shap_values.json", json_text(values));

  const std::vector<Tree>* trees = nullptr;
  if (const auto* f = std::get_if<ForestModel>(&model.fitted)) trees = &f->trees;
  if (const auto* b = std::get_if<BoostedModel>(&model.fitted)) trees = &b->trees;
  std::vector<Tree> single;
  if (const auto* t = std::get_if<Tree>(&model.fitted)) {
    single.push_back(*t);
    trees = &single;
  }
  if (trees != nullptr) {
    std::ostringstream imp;
    write_ranking_csv(impurity_importance(*trees, model.feature_names), "importance", imp,
                      static_cast<std::size_t>(params.top));
    write_file_atomic(out_dir / "impurity_importance.csv", imp.str());
  }
}

void run_pipeline(const PipelineConfig& cfg, std::ostream* log) {
  check_paths(cfg);
  auto step = [&](const char* name, auto&& fn) {
    if (log) *log << "[rentlab] " << name << '\n';
    try {
      fn();
    } catch (const std::exception& e) {
      if (log) *log << "[rentlab] " << name << " failed: " << e.what() << '\n';
      throw;
    }
  };
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  InputPaths inputs;
  if (cfg.generator) {
    step("gen", [&] { generate_stage(*cfg.generator, out / "raw"); });
    inputs = {out / "raw" / "listings.csv", out / "raw" / "calendar.csv", out / "raw" / "reviews.csv"};
  } else {
    inputs = *cfg.inputs;
  }
  const ModelConfig* target = nullptr;
  for (const auto& m : cfg.models) {
    if (m.name == cfg.explain.model || to_string(m.family) == cfg.explain.model) {
      target = &m;
      break;
    }
  }
  if (target == nullptr) {
    throw ConfigError("explain.model '" + cfg.explain.model + "' matches no configured model");
  }
  step("wrangle", [&] { wrangle_stage(inputs.listings, inputs.calendar, cfg.wrangle, out / "clean"); });
  step("sentiment", [&] { sentiment_stage(inputs.reviews, cfg.sentiment, out / "reviews_scored.csv"); });
  step("featurize", [&] {
    featurize_stage(out / "clean" / "listings.csv", out / "clean" / "calendar.csv",
                    out / "reviews_scored.csv", cfg.features, out);
  });
  step("select", [&] {
    select_stage(out / "features.csv", cfg.selection, cfg.eval.train_fraction, cfg.seed, out);
  });
  step("evaluate", [&] {
    evaluate_stage(out / "features.csv", out / "selected_features.txt", cfg.models, cfg.eval,
                   cfg.seed, cfg.threads, out);
  });
  step("explain", [&] {
    explain_stage(out / "models" / model_file_name(*target), out / "test.csv", out / "train.csv",
                  cfg.explain, explain_seed(cfg.seed), cfg.threads, out);
  });
}

}  // namespace rentlab
