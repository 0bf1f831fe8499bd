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

// Column-typed tables with explicit per-cell missing markers, CSV ingestion
// against named schemas, and basic value cleaning.

#ifndef RENTLAB_TABULAR_HPP_
#define RENTLAB_TABULAR_HPP_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace rentlab {

// Proleptic Gregorian calendar date.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  // Days since 1970-01-01.
  std::int64_t to_days() const;
  static Date from_days(std::int64_t days);
  // 0 = Monday .. 6 = Sunday.
  int weekday() const;
  Date plus_days(std::int64_t n) const { return from_days(to_days() + n); }

  // Strict YYYY-MM-DD; rejects impossible dates.
  static std::optional<Date> parse(std::string_view text);
  std::string to_string() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

template <typename T>
using Cells = std::vector<std::optional<T>>;

enum class ColumnType { kNumeric, kInteger, kText, kBoolean, kDate };

std::string_view to_string(ColumnType type);

// One typed column. A cell is either a value or std::nullopt (missing).
class Column {
 public:
  using Storage = std::variant<Cells<double>, Cells<std::int64_t>,
                               Cells<std::string>, Cells<bool>, Cells<Date>>;

  Column() : storage_(Cells<double>{}) {}
  explicit Column(Cells<double> v) : storage_(std::move(v)) {}
  explicit Column(Cells<std::int64_t> v) : storage_(std::move(v)) {}
  explicit Column(Cells<std::string> v) : storage_(std::move(v)) {}
  explicit Column(Cells<bool> v) : storage_(std::move(v)) {}
  explicit Column(Cells<Date> v) : storage_(std::move(v)) {}

  static Column empty_of(ColumnType type, std::size_t n);

  ColumnType type() const { return static_cast<ColumnType>(storage_.index()); }
  std::size_t size() const;
  bool is_missing(std::size_t row) const;
  std::size_t missing_count() const;

  // Typed views; throw TypeError on mismatch.
  const Cells<double>& numeric() const;
  const Cells<std::int64_t>& integer() const;
  const Cells<std::string>& text() const;
  const Cells<bool>& boolean() const;
  const Cells<Date>& date() const;
  Cells<double>& numeric();
  Cells<std::int64_t>& integer();
  Cells<std::string>& text();
  Cells<bool>& boolean();
  Cells<Date>& date();

  // Numeric view over numeric, integer and boolean columns.
  bool is_numeric_like() const;
  std::optional<double> as_double(std::size_t row) const;
  Cells<double> to_doubles() const;

  // Display form of a cell; empty for missing.
  std::string format(std::size_t row) const;

  Column take(std::span<const std::size_t> rows) const;
  void append_from(const Column& other, std::size_t row);
  void append_missing();

  const Storage& storage() const { return storage_; }

  friend bool operator==(const Column&, const Column&) = default;

 private:
  Storage storage_;
};

// Ordered set of uniquely named, equal-length columns.
class Table {
 public:
  Table() = default;
  explicit Table(std::size_t n_rows) : n_rows_(n_rows) {}

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }

  bool has(std::string_view name) const;
  const Column& column(std::string_view name) const;
  Column& column(std::string_view name);
  std::vector<std::string> names() const;
  const std::vector<std::pair<std::string, Column>>& columns() const {
    return columns_;
  }

  // Appends; throws SchemaError on a duplicate name or length mismatch.
  void add(std::string name, Column col);
  // Adds or replaces in place.
  void set(std::string name, Column col);
  void drop(std::string_view name);

  Table take(std::span<const std::size_t> rows) const;
  // Rows of `other` appended; column sets and types must match.
  void append(const Table& other);

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::size_t index_of(std::string_view name) const;

  std::vector<std::pair<std::string, Column>> columns_;
  std::size_t n_rows_ = 0;
};

// Cell parsing rules for schema columns. kCurrency parses like clean_currency
// and produces a numeric column.
enum class FieldKind { kNumeric, kInteger, kText, kBoolean, kDate, kCurrency };

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::kText;
  bool required = false;
};

struct Schema {
  std::string name;
  std::vector<FieldSpec> fields;
  // Header columns not named in `fields` are loaded as text when true.
  bool keep_unknown = true;

  const FieldSpec* find(std::string_view column) const;
};

// Built-in schemas for the three datasets.
const Schema& listings_schema();
const Schema& calendar_schema();
const Schema& reviews_schema();
// Lookup by name: "listings", "calendar", "reviews". Throws ArgumentError.
const Schema& builtin_schema(std::string_view name);

struct LoadReport {
  std::size_t rows = 0;
  // Cells that were non-empty but failed to parse; now missing.
  std::size_t coerced_cells = 0;
  // Cells missing after load (empty or coerced).
  std::size_t missing_cells = 0;
  std::vector<std::pair<std::string, std::size_t>> coerced_by_column;
};

struct LoadResult {
  Table table;
  LoadReport report;
};

LoadResult read_csv(std::istream& in, const Schema& schema);
LoadResult read_csv(const std::filesystem::path& path, const Schema& schema);

// All columns inferred as text; used for generic round trips.
Table read_csv_untyped(std::istream& in);

void write_csv(const Table& table, std::ostream& out);
void write_csv(const Table& table, const std::filesystem::path& path);

// RFC-4180 record splitting. Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields);
std::string csv_escape(std::string_view field);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Strips "$" and "," then parses a decimal; anything else is missing.
std::optional<double> parse_currency(std::string_view cell);
Column clean_currency(const Column& text_column);

// Keeps the first occurrence of each key tuple, stable order.
Table drop_duplicates(const Table& table, std::span<const std::string> keys);

// Writes `content` to `path` via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace rentlab

#endif  // RENTLAB_TABULAR_HPP_
