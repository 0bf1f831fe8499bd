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

// Lexicon and rule based review sentiment.
//
// Each token found in the lexicon contributes its valence, adjusted by:
//   - boosters/dampeners among the three preceding tokens (+-0.293, scaled by
//     0.95 and 0.9 at distance two and three, sign follows the valence),
//   - a negation among the three preceding tokens (valence * -0.74),
//   - ALL-CAPS emphasis when the text is mixed case (|valence| + 0.733).
// Exclamation marks (up to four) add 0.292 each to the magnitude of the sum s,
// and compound = s / sqrt(s^2 + 15).

#ifndef RENTLAB_SENTIMENT_HPP_
#define RENTLAB_SENTIMENT_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rentlab/tabular.hpp"

namespace rentlab {

// word -> valence, words lowercase.
class Lexicon {
 public:
  Lexicon() = default;

  // word<TAB>valence per line; blank lines and '#' comments skipped.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::istream& in);

  void set(std::string_view word, double valence);
  std::optional<double> lookup(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::unordered_map<std::string, double> entries_;
};

std::optional<double> lexicon_lookup(std::string_view word, const Lexicon& lex);

// key<TAB>value files (contractions, emoji aliases).
std::unordered_map<std::string, std::string> load_text_map(const std::filesystem::path& path);
std::unordered_map<std::string, std::string> parse_text_map(std::istream& in);

struct TextCleaner {
  std::unordered_map<std::string, std::string> contractions;  // lowercase keys
  std::unordered_map<std::string, std::string> emoji;

  // Small built-in maps; the data/ files are more complete.
  static TextCleaner builtin();
  static TextCleaner load(const std::filesystem::path& contractions_path,
                          const std::filesystem::path& emoji_path);
};

// URLs and HTML tags removed, contractions expanded, emoji replaced by their
// alias, runs of the same punctuation mark collapsed to one, whitespace runs
// collapsed to one space, result trimmed.
std::string clean_text(std::string_view raw, const TextCleaner& cleaner);
std::string clean_text(std::string_view raw);

struct SentimentParams {
  double alpha = 15.0;
  double booster_increment = 0.293;
  double negation_factor = -0.74;
  double caps_increment = 0.733;
  double exclamation_increment = 0.292;
  int max_exclamations = 4;
  int window = 3;
  double positive_threshold = 0.05;
  double negative_threshold = -0.05;
};

struct SentimentScore {
  double pos = 0.0;
  double neg = 0.0;
  double neu = 1.0;
  double compound = 0.0;
};

enum class SentimentLabel { kPositive, kNegative, kNeutral };

std::string_view to_string(SentimentLabel label);

// s / sqrt(s^2 + alpha)
double normalize_compound(double sum, double alpha = 15.0);

std::vector<std::string> tokenize(std::string_view text);

SentimentScore score(std::string_view text, const Lexicon& lex,
                     const SentimentParams& params = {});

SentimentLabel classify(const SentimentScore& s, const SentimentParams& params = {});

// Share of tokens in a small English stop-word set; used to drop non-English
// reviews. Texts with fewer than `min_tokens` tokens are treated as English.
bool looks_english(std::string_view text, double min_ratio = 0.05,
                   std::size_t min_tokens = 5);

struct ReviewScoring {
  Table table;
  std::size_t dropped_non_english = 0;
};

// Cleans and scores the `comments` column; appends pos, neg, neu, compound and
// label columns. Missing or empty comments score as neutral with compound 0.
ReviewScoring score_reviews(const Table& reviews, const Lexicon& lex,
                            const TextCleaner& cleaner = TextCleaner::builtin(),
                            const SentimentParams& params = {});

// Missing compounds, and compounds of rows whose comment is missing or empty,
// are replaced by the mean over the same host's other rows, falling back to
// the global mean of those rows. Requires host_id and compound columns.
Table fill_missing_sentiment(const Table& t);

}  // namespace rentlab

#endif  // RENTLAB_SENTIMENT_HPP_
