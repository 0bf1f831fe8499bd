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

#include "rentlab/sentiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "rentlab/common.hpp"
#include "rentlab/text_util.hpp"

namespace rentlab {

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

Lexicon Lexicon::parse(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw IoError("lexicon line " + std::to_string(line_no) + ": expected word<TAB>valence");
    }
    const std::string_view word = std::string_view(line).substr(0, tab);
    std::string_view rest = std::string_view(line).substr(tab + 1);
    rest = rest.substr(0, rest.find('\t'));
    rest = trim(rest);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (ec != std::errc() || ptr != rest.data() + rest.size() || !std::isfinite(v)) {
      throw IoError("lexicon line " + std::to_string(line_no) + ": bad valence '" +
                    std::string(rest) + "'");
    }
    lex.set(word, v);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon '" + path.string() + "'");
  return parse(in);
}

void Lexicon::set(std::string_view word, double valence) {
  entries_[to_lower(word)] = valence;
}

std::optional<double> Lexicon::lookup(std::string_view word) const {
  const auto it = entries_.find(to_lower(word));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> lexicon_lookup(std::string_view word, const Lexicon& lex) {
  return lex.lookup(word);
}

std::unordered_map<std::string, std::string> parse_text_map(std::istream& in) {
  std::unordered_map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) continue;
    out.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::unordered_map<std::string, std::string> load_text_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_text_map(in);
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

TextCleaner TextCleaner::builtin() {
  TextCleaner c;
  c.contractions = {
      {"ain't", "am not"},     {"aren't", "are not"},     {"can't", "cannot"},
      {"couldn't", "could not"}, {"didn't", "did not"},   {"doesn't", "does not"},
      {"don't", "do not"},     {"hadn't", "had not"},     {"hasn't", "has not"},
      {"haven't", "have not"}, {"i'm", "i am"},           {"i've", "i have"},
      {"i'd", "i would"},      {"i'll", "i will"},        {"isn't", "is not"},
      {"it's", "it is"},       {"let's", "let us"},       {"shouldn't", "should not"},
      {"that's", "that is"},   {"there's", "there is"},   {"they're", "they are"},
      {"wasn't", "was not"},   {"we're", "we are"},       {"we've", "we have"},
      {"weren't", "were not"}, {"won't", "will not"},     {"wouldn't", "would not"},
      {"you're", "you are"},   {"you'll", "you will"},    {"you've", "you have"},
  };
  c.emoji = {
      {"\xF0\x9F\x98\x80", "grinning face"},
      {"\xF0\x9F\x98\x8D", "smiling face with heart-eyes"},
      {"\xF0\x9F\x91\x8D", "thumbs up"},
      {"\xF0\x9F\x91\x8E", "thumbs down"},
      {"\xE2\x9D\xA4\xEF\xB8\x8F", "red heart"},
      {"\xE2\x9D\xA4", "red heart"},
      {"\xF0\x9F\x98\xA1", "pouting face"},
      {"\xF0\x9F\x98\xA2", "crying face"},
  };
  return c;
}

TextCleaner TextCleaner::load(const std::filesystem::path& contractions_path,
                              const std::filesystem::path& emoji_path) {
  TextCleaner c;
  for (auto& [k, v] : load_text_map(contractions_path)) c.contractions.emplace(to_lower(k), v);
  c.emoji = load_text_map(emoji_path);
  return c;
}

namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  return s.size() - pos >= prefix.size() && iequals(s.substr(pos, prefix.size()), prefix);
}

std::string strip_urls_and_tags(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const bool boundary = i == 0 || is_space(in[i - 1]) || in[i - 1] == '(' || in[i - 1] == '>';
    if (boundary && (starts_with_ci(in, i, "http://") || starts_with_ci(in, i, "https://") ||
                     starts_with_ci(in, i, "www."))) {
      while (i < in.size() && !is_space(in[i]) && in[i] != '<') ++i;
      continue;
    }
    if (in[i] == '<' && i + 1 < in.size() &&
        (is_ascii_alpha(in[i + 1]) || in[i + 1] == '/' || in[i + 1] == '!')) {
      const std::size_t close = in.find('>', i + 1);
      if (close != std::string_view::npos) {
        out.push_back(' ');
        i = close + 1;
        continue;
      }
    }
    out.push_back(in[i]);
    ++i;
  }
  return out;
}

std::string replace_emoji(std::string_view in,
                          const std::unordered_map<std::string, std::string>& emoji) {
  if (emoji.empty()) return std::string(in);
  std::size_t max_len = 0;
  for (const auto& [k, v] : emoji) max_len = std::max(max_len, k.size());
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    if (static_cast<unsigned char>(in[i]) < 0x80) {
      out.push_back(in[i++]);
      continue;
    }
    bool matched = false;
    for (std::size_t len = std::min(max_len, in.size() - i); len > 0; --len) {
      const auto it = emoji.find(std::string(in.substr(i, len)));
      if (it != emoji.end()) {
        out += ' ';
        out += it->second;
        out += ' ';
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) out.push_back(in[i++]);
  }
  return out;
}

std::string expand_contractions(std::string_view in,
                                const std::unordered_map<std::string, std::string>& map) {
  std::string out;
  out.reserve(in.size() + 16);
  std::size_t i = 0;
  while (i < in.size()) {
    if (!is_ascii_alpha(in[i])) {
      out.push_back(in[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < in.size() && (is_ascii_alpha(in[j]) || in[j] == '\'')) ++j;
    std::string_view word = in.substr(i, j - i);
    while (!word.empty() && word.back() == '\'') word.remove_suffix(1);
    const auto it = map.find(to_lower(word));
    if (it == map.end()) {
      out.append(word);
    } else {
      std::string rep = it->second;
      const bool all_caps =
          word.size() > 1 && std::all_of(word.begin(), word.end(), [](char c) {
            return !is_ascii_alpha(c) || (c >= 'A' && c <= 'Z');
          });
      if (all_caps) {
        for (char& c : rep) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      } else if (word.front() >= 'A' && word.front() <= 'Z' && !rep.empty()) {
        rep[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(rep[0])));
      }
      out += rep;
    }
    i += word.size();
  }
  return out;
}

std::string normalize_quotes(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    // U+2018 / U+2019 single quotes.
    if (i + 2 < in.size() && in[i] == '\xE2' && in[i + 1] == '\x80' &&
        (in[i + 2] == '\x98' || in[i + 2] == '\x99')) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    out.push_back(in[i]);
  }
  return out;
}

std::string collapse(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char c : in) {
    if (is_space(c)) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      continue;
    }
    if (is_ascii_punct(c) && !out.empty() && out.back() == c) continue;
    out.push_back(c);
  }
  return std::string(trim(out));
}

}  // namespace

std::string clean_text(std::string_view raw, const TextCleaner& cleaner) {
  std::string s = normalize_quotes(raw);
  s = strip_urls_and_tags(s);
  s = replace_emoji(s, cleaner.emoji);
  s = expand_contractions(s, cleaner.contractions);
  return collapse(s);
}

std::string clean_text(std::string_view raw) {
  static const TextCleaner kBuiltin = TextCleaner::builtin();
  return clean_text(raw, kBuiltin);
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

std::string_view to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::kPositive: return "positive";
    case SentimentLabel::kNegative: return "negative";
    case SentimentLabel::kNeutral: return "neutral";
  }
  return "neutral";
}

double normalize_compound(double sum, double alpha) {
  const double c = sum / std::sqrt(sum * sum + alpha);
  return std::clamp(c, -1.0, 1.0);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j == i) break;
    const std::string_view raw = text.substr(i, j - i);
    i = j;
    const bool has_alpha = std::any_of(raw.begin(), raw.end(), [](char c) {
      return is_ascii_alpha(c) || static_cast<unsigned char>(c) >= 0x80;
    });
    if (!has_alpha) {
      // Emoticons such as ":)" or "<3" stay whole.
      if (raw.size() >= 2) out.emplace_back(raw);
      continue;
    }
    // Split at punctuation other than in-word apostrophes and hyphens.
    std::string cur;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const char c = raw[k];
      const bool inner_joiner = (c == '\'' || c == '-') && !cur.empty() && k + 1 < raw.size() &&
                                !is_ascii_punct(raw[k + 1]);
      if (is_ascii_punct(c) && !inner_joiner) {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
  }
  return out;
}

namespace {

bool is_all_caps(std::string_view w) {
  bool any = false;
  for (char c : w) {
    if (is_ascii_alpha(c)) {
      any = true;
      if (c >= 'a' && c <= 'z') return false;
    }
  }
  return any;
}

const std::unordered_map<std::string, double>& booster_table() {
  // Sign: +1 booster, -1 dampener.
  static const std::unordered_map<std::string, double> kTable = {
      {"absolutely", 1},  {"amazingly", 1},   {"awfully", 1},    {"completely", 1},
      {"considerably", 1}, {"decidedly", 1},  {"deeply", 1},     {"enormously", 1},
      {"entirely", 1},    {"especially", 1},  {"exceptionally", 1}, {"extremely", 1},
      {"fabulously", 1},  {"greatly", 1},     {"highly", 1},     {"hugely", 1},
      {"incredibly", 1},  {"intensely", 1},   {"majorly", 1},    {"more", 1},
      {"most", 1},        {"particularly", 1}, {"purely", 1},    {"quite", 1},
      {"really", 1},      {"remarkably", 1},  {"so", 1},         {"substantially", 1},
      {"thoroughly", 1},  {"totally", 1},     {"tremendously", 1}, {"truly", 1},
      {"uber", 1},        {"unbelievably", 1}, {"unusually", 1}, {"utterly", 1},
      {"very", 1},        {"almost", -1},     {"barely", -1},    {"hardly", -1},
      {"kinda", -1},      {"less", -1},       {"little", -1},    {"marginally", -1},
      {"occasionally", -1}, {"partly", -1},   {"scarcely", -1},  {"slightly", -1},
      {"somewhat", -1},   {"sorta", -1},
  };
  return kTable;
}

bool is_negation(std::string_view lower) {
  static const std::unordered_set<std::string> kNegations = {
      "aint",   "arent",   "cannot",  "cant",   "couldnt", "darent", "didnt",
      "doesnt", "dont",    "hadnt",   "hasnt",  "havent",  "isnt",   "mightnt",
      "mustnt", "neither", "neednt",  "never",  "none",    "nope",   "nor",
      "not",    "nothing", "nowhere", "oughtnt", "shant",  "shouldnt", "wasnt",
      "werent", "without", "wont",    "wouldnt", "rarely", "seldom", "despite",
  };
  if (kNegations.count(std::string(lower)) != 0) return true;
  return lower.find("n't") != std::string_view::npos;
}

}  // namespace

SentimentScore score(std::string_view text, const Lexicon& lex,
                     const SentimentParams& params) {
  const std::vector<std::string> tokens = tokenize(text);
  SentimentScore result;
  if (tokens.empty()) return result;

  std::vector<std::string> lower(tokens.size());
  std::size_t caps = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    lower[i] = to_lower(tokens[i]);
    caps += is_all_caps(tokens[i]) ? 1 : 0;
  }
  const bool cap_differential = caps > 0 && caps < tokens.size();
  const auto& boosters = booster_table();

  std::vector<double> valences;
  valences.reserve(tokens.size());
  bool matched = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (boosters.count(lower[i]) != 0) {
      valences.push_back(0.0);
      continue;
    }
    const auto base = lex.lookup(lower[i]);
    if (!base || *base == 0.0) {
      valences.push_back(0.0);
      matched = matched || base.has_value();
      continue;
    }
    matched = true;
    double v = *base;
    if (cap_differential && is_all_caps(tokens[i])) {
      v += v > 0 ? params.caps_increment : -params.caps_increment;
    }
    const double sign = v > 0 ? 1.0 : -1.0;
    for (int d = 1; d <= params.window && static_cast<std::size_t>(d) <= i; ++d) {
      const std::size_t j = i - static_cast<std::size_t>(d);
      const auto b = boosters.find(lower[j]);
      if (b == boosters.end() || lex.lookup(lower[j])) continue;
      double scalar = b->second * params.booster_increment;
      if (cap_differential && is_all_caps(tokens[j])) {
        scalar += b->second * params.caps_increment;
      }
      if (d == 2) scalar *= 0.95;
      if (d == 3) scalar *= 0.9;
      v += sign * scalar;
    }
    for (int d = 1; d <= params.window && static_cast<std::size_t>(d) <= i; ++d) {
      if (is_negation(lower[i - static_cast<std::size_t>(d)])) v *= params.negation_factor;
    }
    valences.push_back(v);
  }

  double sum = 0.0;
  for (double v : valences) sum += v;

  const auto bangs = std::min<std::ptrdiff_t>(std::count(text.begin(), text.end(), '!'),
                                              params.max_exclamations);
  const double emphasis = static_cast<double>(bangs) * params.exclamation_increment;
  if (sum > 0.0) {
    sum += emphasis;
  } else if (sum < 0.0) {
    sum -= emphasis;
  }
  result.compound = normalize_compound(sum, params.alpha);

  double pos = 0.0, neg = 0.0, neu = 0.0;
  for (double v : valences) {
    if (v > 0.0) {
      pos += v + 1.0;
    } else if (v < 0.0) {
      neg += v - 1.0;
    } else {
      neu += 1.0;
    }
  }
  if (pos > std::abs(neg)) {
    pos += emphasis;
  } else if (pos < std::abs(neg)) {
    neg -= emphasis;
  }
  const double total = pos + std::abs(neg) + neu;
  if (!matched || total == 0.0) {
    result.pos = result.neg = 0.0;
    result.neu = 1.0;
    return result;
  }
  result.pos = pos / total;
  result.neg = std::abs(neg) / total;
  result.neu = neu / total;
  return result;
}

SentimentLabel classify(const SentimentScore& s, const SentimentParams& params) {
  if (s.compound >= params.positive_threshold) return SentimentLabel::kPositive;
  if (s.compound <= params.negative_threshold) return SentimentLabel::kNegative;
  return SentimentLabel::kNeutral;
}

bool looks_english(std::string_view text, double min_ratio, std::size_t min_tokens) {
  static const std::unordered_set<std::string> kStopWords = {
      "the",  "and",  "to",   "was",  "is",    "it",    "of",   "for",  "we",
      "with", "this", "that", "very", "my",    "our",   "you",  "they", "were",
      "have", "had",  "would", "are", "be",    "in",    "on",   "at",   "not",
      "but",  "i",    "there", "he",  "she",   "his",   "her",  "from", "all",
      "will",  "great", "stay", "place", "host", "an",   "as",   "so",
  };
  const auto tokens = tokenize(text);
  if (tokens.size() < min_tokens) return true;
  std::size_t hits = 0;
  for (const auto& t : tokens) hits += kStopWords.count(to_lower(t));
  return static_cast<double>(hits) / static_cast<double>(tokens.size()) >= min_ratio;
}

ReviewScoring score_reviews(const Table& reviews, const Lexicon& lex,
                            const TextCleaner& cleaner, const SentimentParams& params) {
  const auto& comments = reviews.column("comments").text();
  std::vector<std::size_t> keep;
  std::vector<SentimentScore> scores;
  ReviewScoring result;
  for (std::size_t r = 0; r < reviews.n_rows(); ++r) {
    std::string cleaned;
    if (comments[r]) cleaned = clean_text(*comments[r], cleaner);
    if (!cleaned.empty() && !looks_english(cleaned)) {
      ++result.dropped_non_english;
      continue;
    }
    keep.push_back(r);
    scores.push_back(score(cleaned, lex, params));
  }
  Table out = reviews.take(keep);
  Cells<double> pos, neg, neu, compound;
  Cells<std::string> label;
  for (const auto& s : scores) {
    pos.emplace_back(s.pos);
    neg.emplace_back(s.neg);
    neu.emplace_back(s.neu);
    compound.emplace_back(s.compound);
    label.emplace_back(std::string(to_string(classify(s, params))));
  }
  out.set("pos", Column(std::move(pos)));
  out.set("neg", Column(std::move(neg)));
  out.set("neu", Column(std::move(neu)));
  out.set("compound", Column(std::move(compound)));
  out.set("label", Column(std::move(label)));
  result.table = std::move(out);
  return result;
}

Table fill_missing_sentiment(const Table& t) {
  const Column& host = t.column("host_id");
  const Cells<double> compound = t.column("compound").to_doubles();
  const Cells<std::string>* comments =
      t.has("comments") && t.column("comments").type() == ColumnType::kText
          ? &t.column("comments").text()
          : nullptr;
  auto eligible = [&](std::size_t r) {
    if (!compound[r]) return true;
    return comments != nullptr && (!(*comments)[r] || trim(*(*comments)[r]).empty());
  };

  std::unordered_map<std::string, std::pair<double, std::size_t>> by_host;
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    if (eligible(r)) continue;
    total += *compound[r];
    ++n;
    if (!host.is_missing(r)) {
      auto& acc = by_host[host.format(r)];
      acc.first += *compound[r];
      ++acc.second;
    }
  }
  Cells<double> filled = compound;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    if (!eligible(r)) continue;
    std::optional<double> v;
    if (!host.is_missing(r)) {
      const auto it = by_host.find(host.format(r));
      if (it != by_host.end() && it->second.second > 0) {
        v = it->second.first / static_cast<double>(it->second.second);
      }
    }
    if (!v && n > 0) v = total / static_cast<double>(n);
    if (v) filled[r] = v;
  }
  Table out = t;
  if (out.has("label") && out.column("label").type() == ColumnType::kText) {
    auto& labels = out.column("label").text();
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      if (eligible(r) && filled[r]) {
        SentimentScore s;
        s.compound = *filled[r];
        labels[r] = std::string(to_string(classify(s)));
      }
    }
  }
  out.set("compound", Column(std::move(filled)));
  return out;
}

}  // namespace rentlab
