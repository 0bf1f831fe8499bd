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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string err;
};

class CliTest : public testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(testing::TempDir()) /
           ("rentlab_cli_" + std::string(testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const nlohmann::json cfg = {
        {"schema_version", 1},
        {"seed", 9},
        {"generator", {{"n_listings", 20}, {"end", "2022-07-15"}}},
        {"sentiment", {{"lexicon", std::string(RENTLAB_DATA_DIR) + "/lexicon.tsv"}}},
        {"selection", {{"mode", "kbest"}, {"k", 12}}},
        {"models", {{{"family", "ridge"}, {"params", {{"alpha", 0.5}}}},
                    {{"family", "forest"}, {"params", {{"n_trees", 5}, {"max_depth", 4}}}}}},
        {"eval", {{"search_samples", 1}, {"cv_folds", 3}}},
        {"explain", {{"model", "forest"}, {"rows", 4}, {"background", 4}, {"budget", 8}}},
        {"output_dir", "out"},
    };
    std::ofstream(dir_ / "config.json") << cfg.dump(2);
  }

  Result cli(const std::string& args) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" + RENTLAB_CLI + "' " + args +
                            " > stdout.txt 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read(err);
    return r;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  static std::string header(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
  EXPECT_EQ(cli("explain --model m.json").code, 2);
}

TEST_F(CliTest, MissingLexiconNamesThePath) {
  ASSERT_EQ(cli("gen --seed 1 --listings 5 -o raw").code, 0);
  const Result r = cli("sentiment raw/reviews.csv --lexicon no_such_lexicon.tsv");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no_such_lexicon.tsv"), std::string::npos) << r.err;
}

TEST_F(CliTest, GenWritesThreeTables) {
  ASSERT_EQ(cli("gen --seed 7 --listings 50 -o raw").code, 0);
  for (const char* f : {"listings.csv", "calendar.csv", "reviews.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "raw" / f)) << f;
  }
  std::ifstream in(dir_ / "raw" / "listings.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_GE(rows, 50);
}

TEST_F(CliTest, SentimentAppendsScoreColumns) {
  ASSERT_EQ(cli("gen --seed 7 --listings 10 -o raw").code, 0);
  const std::string lexicon = std::string(RENTLAB_DATA_DIR) + "/lexicon.tsv";
  ASSERT_EQ(cli("sentiment raw/reviews.csv --lexicon '" + lexicon + "' -o scored.csv").code, 0);
  const std::string before = header(dir_ / "raw" / "reviews.csv");
  const std::string after = header(dir_ / "scored.csv");
  EXPECT_EQ(after, before + ",pos,neg,neu,compound,label");
}

TEST_F(CliTest, StagesMatchRunAndRunsAreRepeatable) {
  ASSERT_EQ(cli("run --config config.json --threads 1").code, 0);
  const std::string c = "--config config.json --threads 1";
  ASSERT_EQ(cli("gen " + c + " -o s/raw").code, 0);
  ASSERT_EQ(cli("wrangle " + c + " --listings s/raw/listings.csv --calendar s/raw/calendar.csv -o s/clean").code, 0);
  ASSERT_EQ(cli("sentiment " + c + " s/raw/reviews.csv -o s/reviews_scored.csv").code, 0);
  ASSERT_EQ(cli("featurize " + c + " --listings s/clean/listings.csv --calendar s/clean/calendar.csv --reviews s/reviews_scored.csv -o s").code, 0);
  ASSERT_EQ(cli("select " + c + " --features s/features.csv -o s").code, 0);
  ASSERT_EQ(cli("evaluate " + c + " --features s/features.csv --selected s/selected_features.txt -o s").code, 0);
  EXPECT_EQ(read(dir_ / "s" / "eval_report.csv"), read(dir_ / "out" / "eval_report.csv"));
  EXPECT_EQ(read(dir_ / "s" / "selected_features.txt"), read(dir_ / "out" / "selected_features.txt"));

  ASSERT_EQ(cli("explain " + c + " --model s/models/random_forest.json --data s/test.csv --background s/train.csv --top 20 -o s").code, 0);
  EXPECT_EQ(read(dir_ / "s" / "shap_ranking.csv"), read(dir_ / "out" / "shap_ranking.csv"));
  std::ifstream in(dir_ / "s" / "shap_ranking.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_GT(rows, 0);
  EXPECT_LE(rows, 20);

  const std::string first = read(dir_ / "out" / "eval_report.json");
  ASSERT_EQ(cli("run --config config.json --threads 2 -o again").code, 0);
  EXPECT_EQ(read(dir_ / "again" / "eval_report.json"), first);
  EXPECT_EQ(read(dir_ / "again" / "shap_ranking.csv"), read(dir_ / "out" / "shap_ranking.csv"));
}

}  // namespace
