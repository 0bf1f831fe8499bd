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

#include "rentlab/tabular.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "rentlab/common.hpp"
#include "rentlab/text_util.hpp"

namespace rentlab {

int thread_count() {
  if (const char* env = std::getenv("RENTLAB_THREADS")) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec == std::errc() && n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(
      std::max(1, threads > 0 ? threads : thread_count()));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Date
// ---------------------------------------------------------------------------

// Civil-from-days and days-from-civil after H. Hinnant's public-domain
// algorithms.
std::int64_t Date::to_days() const {
  const std::int64_t y = year - (month <= 2 ? 1 : 0);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t mp = (month + 9) % 12;
  const std::int64_t doy = (153 * mp + 2) / 5 + day - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

Date Date::from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const int d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  const int m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  const std::int64_t y = yoe + era * 400 + (m <= 2 ? 1 : 0);
  return Date{static_cast<int>(y), m, d};
}

int Date::weekday() const {
  // 1970-01-01 was a Thursday (3 with Monday = 0).
  const std::int64_t d = to_days();
  return static_cast<int>(((d % 7) + 7 + 3) % 7);
}

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_number(text.substr(0, 4), y) || !parse_number(text.substr(5, 2), m) ||
      !parse_number(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
  return Date{y, m, d};
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

// ---------------------------------------------------------------------------
// Column
// ---------------------------------------------------------------------------

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::kNumeric: return "numeric";
    case ColumnType::kInteger: return "integer";
    case ColumnType::kText: return "text";
    case ColumnType::kBoolean: return "boolean";
    case ColumnType::kDate: return "date";
  }
  return "unknown";
}

Column Column::empty_of(ColumnType type, std::size_t n) {
  switch (type) {
    case ColumnType::kNumeric: return Column(Cells<double>(n));
    case ColumnType::kInteger: return Column(Cells<std::int64_t>(n));
    case ColumnType::kText: return Column(Cells<std::string>(n));
    case ColumnType::kBoolean: return Column(Cells<bool>(n));
    case ColumnType::kDate: return Column(Cells<Date>(n));
  }
  return Column();
}

std::size_t Column::size() const {
  return std::visit([](const auto& v) { return v.size(); }, storage_);
}

bool Column::is_missing(std::size_t row) const {
  return std::visit([row](const auto& v) { return !v[row].has_value(); },
                    storage_);
}

std::size_t Column::missing_count() const {
  return std::visit(
      [](const auto& v) {
        return static_cast<std::size_t>(std::count_if(
            v.begin(), v.end(), [](const auto& c) { return !c.has_value(); }));
      },
      storage_);
}

namespace {

template <typename T>
const Cells<T>& typed(const Column::Storage& s, ColumnType want) {
  if (const auto* p = std::get_if<Cells<T>>(&s)) return *p;
  throw TypeError("expected " + std::string(to_string(want)) + " column, got " +
                  std::string(to_string(static_cast<ColumnType>(s.index()))));
}

}  // namespace

const Cells<double>& Column::numeric() const {
  return typed<double>(storage_, ColumnType::kNumeric);
}
const Cells<std::int64_t>& Column::integer() const {
  return typed<std::int64_t>(storage_, ColumnType::kInteger);
}
const Cells<std::string>& Column::text() const {
  return typed<std::string>(storage_, ColumnType::kText);
}
const Cells<bool>& Column::boolean() const {
  return typed<bool>(storage_, ColumnType::kBoolean);
}
const Cells<Date>& Column::date() const {
  return typed<Date>(storage_, ColumnType::kDate);
}
Cells<double>& Column::numeric() {
  return const_cast<Cells<double>&>(std::as_const(*this).numeric());
}
Cells<std::int64_t>& Column::integer() {
  return const_cast<Cells<std::int64_t>&>(std::as_const(*this).integer());
}
Cells<std::string>& Column::text() {
  return const_cast<Cells<std::string>&>(std::as_const(*this).text());
}
Cells<bool>& Column::boolean() {
  return const_cast<Cells<bool>&>(std::as_const(*this).boolean());
}
Cells<Date>& Column::date() {
  return const_cast<Cells<Date>&>(std::as_const(*this).date());
}

bool Column::is_numeric_like() const {
  const ColumnType t = type();
  return t == ColumnType::kNumeric || t == ColumnType::kInteger ||
         t == ColumnType::kBoolean;
}

std::optional<double> Column::as_double(std::size_t row) const {
  switch (type()) {
    case ColumnType::kNumeric:
      return numeric()[row];
    case ColumnType::kInteger:
      if (const auto& c = integer()[row]) return static_cast<double>(*c);
      return std::nullopt;
    case ColumnType::kBoolean:
      if (const auto& c = boolean()[row]) return *c ? 1.0 : 0.0;
      return std::nullopt;
    default:
      throw TypeError("column of type " + std::string(to_string(type())) +
                      " has no numeric view");
  }
}

Cells<double> Column::to_doubles() const {
  Cells<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = as_double(i);
  return out;
}

std::string Column::format(std::size_t row) const {
  return std::visit(
      [row](const auto& v) -> std::string {
        const auto& c = v[row];
        if (!c) return {};
        using T = std::decay_t<decltype(*c)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(*c);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(*c);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *c ? "t" : "f";
        } else if constexpr (std::is_same_v<T, Date>) {
          return c->to_string();
        } else {
          return *c;
        }
      },
      storage_);
}

Column Column::take(std::span<const std::size_t> rows) const {
  return std::visit(
      [rows](const auto& v) {
        std::decay_t<decltype(v)> out;
        out.reserve(rows.size());
        for (std::size_t r : rows) out.push_back(v[r]);
        return Column(std::move(out));
      },
      storage_);
}

void Column::append_from(const Column& other, std::size_t row) {
  std::visit(
      [&](auto& v) {
        using V = std::decay_t<decltype(v)>;
        const auto* src = std::get_if<V>(&other.storage_);
        if (src == nullptr) throw TypeError("column type mismatch on append");
        v.push_back((*src)[row]);
      },
      storage_);
}

void Column::append_missing() {
  std::visit([](auto& v) { v.emplace_back(); }, storage_);
}

// ---------------------------------------------------------------------------
// Table
// ---------------------------------------------------------------------------

std::size_t Table::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].first == name) return i;
  }
  return columns_.size();
}

bool Table::has(std::string_view name) const {
  return index_of(name) < columns_.size();
}

const Column& Table::column(std::string_view name) const {
  const std::size_t i = index_of(name);
  if (i == columns_.size()) {
    throw SchemaError("unknown column '" + std::string(name) + "'");
  }
  return columns_[i].second;
}

Column& Table::column(std::string_view name) {
  return const_cast<Column&>(std::as_const(*this).column(name));
}

std::vector<std::string> Table::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& [name, col] : columns_) out.push_back(name);
  return out;
}

void Table::add(std::string name, Column col) {
  if (has(name)) throw SchemaError("duplicate column '" + name + "'");
  if (columns_.empty() && n_rows_ == 0) n_rows_ = col.size();
  if (col.size() != n_rows_) {
    throw SchemaError("column '" + name + "' has " + std::to_string(col.size()) +
                      " rows, table has " + std::to_string(n_rows_));
  }
  columns_.emplace_back(std::move(name), std::move(col));
}

void Table::set(std::string name, Column col) {
  const std::size_t i = index_of(name);
  if (i == columns_.size()) {
    add(std::move(name), std::move(col));
    return;
  }
  if (col.size() != n_rows_) {
    throw SchemaError("column '" + name + "' length mismatch");
  }
  columns_[i].second = std::move(col);
}

void Table::drop(std::string_view name) {
  const std::size_t i = index_of(name);
  if (i == columns_.size()) {
    throw SchemaError("unknown column '" + std::string(name) + "'");
  }
  columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(i));
}

Table Table::take(std::span<const std::size_t> rows) const {
  Table out(rows.size());
  for (const auto& [name, col] : columns_) out.add(name, col.take(rows));
  return out;
}

void Table::append(const Table& other) {
  if (other.n_cols() != n_cols()) {
    throw SchemaError("append: column count mismatch");
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const Column& src = other.column(columns_[c].first);
    for (std::size_t r = 0; r < other.n_rows(); ++r) {
      columns_[c].second.append_from(src, r);
    }
  }
  n_rows_ += other.n_rows();
}

// ---------------------------------------------------------------------------
// Schemas
// ---------------------------------------------------------------------------

const FieldSpec* Schema::find(std::string_view column) const {
  for (const auto& f : fields) {
    if (iequals(f.name, column)) return &f;
  }
  return nullptr;
}

const Schema& listings_schema() {
  using K = FieldKind;
  static const Schema kSchema{
      "listings",
      {
          {"id", K::kInteger, true},
          {"host_id", K::kInteger, false},
          {"host_since", K::kDate, false},
          {"host_is_superhost", K::kBoolean, false},
          {"host_listings_count", K::kInteger, false},
          {"host_total_listings_count", K::kInteger, false},
          {"neighbourhood_cleansed", K::kText, false},
          {"latitude", K::kNumeric, true},
          {"longitude", K::kNumeric, true},
          {"property_type", K::kText, false},
          {"room_type", K::kText, false},
          {"accommodates", K::kInteger, false},
          {"bathrooms", K::kNumeric, false},
          {"bedrooms", K::kInteger, false},
          {"beds", K::kInteger, false},
          {"amenities", K::kText, false},
          {"price", K::kCurrency, false},
          {"minimum_nights", K::kInteger, false},
          {"maximum_nights", K::kInteger, false},
          {"availability_30", K::kInteger, false},
          {"availability_60", K::kInteger, false},
          {"availability_90", K::kInteger, false},
          {"availability_365", K::kInteger, false},
          {"number_of_reviews", K::kInteger, false},
          {"number_of_reviews_ltm", K::kInteger, false},
          {"number_of_reviews_l30d", K::kInteger, false},
          {"review_scores_rating", K::kNumeric, false},
          {"review_scores_accuracy", K::kNumeric, false},
          {"review_scores_cleanliness", K::kNumeric, false},
          {"review_scores_checkin", K::kNumeric, false},
          {"review_scores_communication", K::kNumeric, false},
          {"review_scores_location", K::kNumeric, false},
          {"review_scores_value", K::kNumeric, false},
          {"instant_bookable", K::kBoolean, false},
          {"reviews_per_month", K::kNumeric, false},
      },
      true};
  return kSchema;
}

const Schema& calendar_schema() {
  using K = FieldKind;
  static const Schema kSchema{"calendar",
                              {
                                  {"listing_id", K::kInteger, true},
                                  {"date", K::kDate, true},
                                  {"available", K::kBoolean, false},
                                  {"price", K::kCurrency, true},
                                  {"adjusted_price", K::kCurrency, false},
                                  {"minimum_nights", K::kInteger, false},
                                  {"maximum_nights", K::kInteger, false},
                                  {"month", K::kInteger, false},
                              },
                              true};
  return kSchema;
}

const Schema& reviews_schema() {
  using K = FieldKind;
  static const Schema kSchema{"reviews",
                              {
                                  {"listing_id", K::kInteger, true},
                                  {"id", K::kInteger, false},
                                  {"date", K::kDate, false},
                                  {"reviewer_id", K::kInteger, false},
                                  {"reviewer_name", K::kText, false},
                                  {"comments", K::kText, true},
                              },
                              true};
  return kSchema;
}

const Schema& builtin_schema(std::string_view name) {
  if (name == "listings") return listings_schema();
  if (name == "calendar") return calendar_schema();
  if (name == "reviews") return reviews_schema();
  throw ArgumentError("unknown schema '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get(ch);
      break;
    } else {
      field.push_back(ch);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::optional<double> parse_currency(std::string_view cell) {
  std::string cleaned;
  cleaned.reserve(cell.size());
  for (char c : trim(cell)) {
    if (c != '$' && c != ',') cleaned.push_back(c);
  }
  double v = 0.0;
  if (!parse_number(std::string_view(cleaned), v) || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

Column clean_currency(const Column& text_column) {
  const auto& cells = text_column.text();
  Cells<double> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i]) out[i] = parse_currency(*cells[i]);
  }
  return Column(std::move(out));
}

namespace {

bool is_null_token(std::string_view s) {
  return s.empty() || iequals(s, "nan") || iequals(s, "na") || iequals(s, "null");
}

// Parses one cell. Returns false if the cell was non-empty but unparseable.
bool parse_cell(Column& col, FieldKind kind, std::string_view raw) {
  const std::string_view s = trim(raw);
  switch (kind) {
    case FieldKind::kText: {
      auto& v = col.text();
      if (raw.empty()) {
        v.emplace_back();
      } else {
        v.emplace_back(std::string(raw));
      }
      return true;
    }
    case FieldKind::kNumeric: {
      auto& v = col.numeric();
      double d = 0.0;
      if (is_null_token(s)) {
        v.emplace_back();
        return true;
      }
      if (parse_number(s, d) && std::isfinite(d)) {
        v.emplace_back(d);
        return true;
      }
      v.emplace_back();
      return false;
    }
    case FieldKind::kCurrency: {
      auto& v = col.numeric();
      if (is_null_token(s)) {
        v.emplace_back();
        return true;
      }
      v.push_back(parse_currency(s));
      return v.back().has_value();
    }
    case FieldKind::kInteger: {
      auto& v = col.integer();
      if (is_null_token(s)) {
        v.emplace_back();
        return true;
      }
      std::int64_t i = 0;
      if (parse_number(s, i)) {
        v.emplace_back(i);
        return true;
      }
      double d = 0.0;
      if (parse_number(s, d) && std::isfinite(d) && d == std::floor(d) &&
          std::abs(d) < 9.0e15) {
        v.emplace_back(static_cast<std::int64_t>(d));
        return true;
      }
      v.emplace_back();
      return false;
    }
    case FieldKind::kBoolean: {
      auto& v = col.boolean();
      if (s.empty()) {
        v.emplace_back();
        return true;
      }
      if (iequals(s, "t") || iequals(s, "true") || s == "1" || iequals(s, "yes")) {
        v.emplace_back(true);
        return true;
      }
      if (iequals(s, "f") || iequals(s, "false") || s == "0" || iequals(s, "no")) {
        v.emplace_back(false);
        return true;
      }
      v.emplace_back();
      return false;
    }
    case FieldKind::kDate: {
      auto& v = col.date();
      if (is_null_token(s)) {
        v.emplace_back();
        return true;
      }
      v.push_back(Date::parse(s));
      return v.back().has_value();
    }
  }
  return false;
}

ColumnType column_type_for(FieldKind kind) {
  switch (kind) {
    case FieldKind::kNumeric:
    case FieldKind::kCurrency: return ColumnType::kNumeric;
    case FieldKind::kInteger: return ColumnType::kInteger;
    case FieldKind::kText: return ColumnType::kText;
    case FieldKind::kBoolean: return ColumnType::kBoolean;
    case FieldKind::kDate: return ColumnType::kDate;
  }
  return ColumnType::kText;
}

}  // namespace

LoadResult read_csv(std::istream& in, const Schema& schema) {
  std::vector<std::string> header;
  if (!read_csv_record(in, header)) {
    throw IoError("CSV input for schema '" + schema.name + "' has no header row");
  }
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) {
    header[0].erase(0, 3);
  }
  for (const auto& f : schema.fields) {
    if (!f.required) continue;
    const bool present = std::any_of(header.begin(), header.end(),
                                     [&](const auto& h) { return iequals(trim(h), f.name); });
    if (!present) {
      throw SchemaError("schema '" + schema.name + "': missing required column '" +
                        f.name + "'");
    }
  }

  struct Slot {
    std::string name;
    FieldKind kind;
    Column column;
    std::size_t coerced = 0;
  };
  std::vector<std::optional<Slot>> slots(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h(trim(header[i]));
    const FieldSpec* spec = schema.find(h);
    if (spec != nullptr) {
      slots[i] = Slot{spec->name, spec->kind,
                      Column::empty_of(column_type_for(spec->kind), 0)};
    } else if (schema.keep_unknown && !h.empty()) {
      slots[i] = Slot{h, FieldKind::kText, Column::empty_of(ColumnType::kText, 0)};
    }
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (slots[i] && slots[j] && slots[i]->name == slots[j]->name) {
        throw SchemaError("duplicate column '" + slots[i]->name + "' in header");
      }
    }
  }

  LoadResult result;
  std::vector<std::string> fields;
  std::size_t rows = 0;
  while (read_csv_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty() && header.size() > 1) continue;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!slots[i]) continue;
      const std::string_view raw =
          i < fields.size() ? std::string_view(fields[i]) : std::string_view();
      if (!parse_cell(slots[i]->column, slots[i]->kind, raw)) ++slots[i]->coerced;
    }
    ++rows;
  }
  if (in.bad()) throw IoError("read error while parsing CSV");

  Table table(rows);
  for (auto& slot : slots) {
    if (!slot) continue;
    result.report.coerced_cells += slot->coerced;
    if (slot->coerced > 0) {
      result.report.coerced_by_column.emplace_back(slot->name, slot->coerced);
    }
    result.report.missing_cells += slot->column.missing_count();
    table.add(slot->name, std::move(slot->column));
  }
  result.report.rows = rows;
  result.table = std::move(table);
  return result;
}

LoadResult read_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_csv(in, schema);
}

Table read_csv_untyped(std::istream& in) {
  Schema schema{"untyped", {}, true};
  return read_csv(in, schema).table;
}

void write_csv(const Table& table, std::ostream& out) {
  const auto& cols = table.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c > 0) out << ',';
    out << csv_escape(cols[c].first);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c > 0) out << ',';
      out << csv_escape(cols[c].second.format(r));
    }
    out << '\n';
  }
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ostringstream buf;
  write_csv(table, buf);
  write_file_atomic(path, buf.str());
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename onto '" + path.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// drop_duplicates
// ---------------------------------------------------------------------------

Table drop_duplicates(const Table& table, std::span<const std::string> keys) {
  std::vector<const Column*> key_cols;
  for (const auto& k : keys) key_cols.push_back(&table.column(k));

  std::map<std::vector<std::string>, std::size_t> seen;
  std::vector<std::size_t> keep;
  keep.reserve(table.n_rows());
  std::vector<std::string> key;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    key.clear();
    for (const Column* c : key_cols) {
      // Missing cells compare equal to each other but never to "".
      key.push_back(c->is_missing(r) ? std::string("\x01") : "=" + c->format(r));
    }
    if (seen.emplace(key, r).second) keep.push_back(r);
  }
  return table.take(keep);
}

}  // namespace rentlab
