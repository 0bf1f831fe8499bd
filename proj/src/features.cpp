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

#include "rentlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rentlab/common.hpp"
#include "rentlab/text_util.hpp"

namespace rentlab {

// ---------------------------------------------------------------------------
// POIs
// ---------------------------------------------------------------------------

PoiSet::PoiSet(std::vector<Poi> pois) : pois_(std::move(pois)) {
  std::set<std::string> names;
  for (const auto& p : pois_) {
    if (p.name.empty()) throw ArgumentError("POI with empty name");
    if (!names.insert(p.name).second) {
      throw ArgumentError("duplicate POI name '" + p.name + "'");
    }
    if (!p.point.valid()) throw ArgumentError("POI '" + p.name + "' has invalid coordinates");
  }
}

PoiSet PoiSet::austin_default() {
  return PoiSet({
      {"zilker", {30.2670, -97.7729}},
      {"congress_bridge", {30.2614, -97.7451}},
      {"barton_springs", {30.2640, -97.7713}},
      {"mex_arte", {30.2671, -97.7428}},
      {"umlauf", {30.2641, -97.7668}},
      {"bullock", {30.2803, -97.7391}},
      {"t_cap", {30.2747, -97.7404}},
      {"ut_tower", {30.2861, -97.7394}},
      {"museum_weird", {30.2672, -97.7393}},
      {"mount_bonnell", {30.3209, -97.7734}},
      {"lbj_library", {30.2858, -97.7292}},
      {"rainey_street", {30.2590, -97.7386}},
      {"wildflower_center", {30.1856, -97.8733}},
  });
}

PoiSet PoiSet::load_csv(std::istream& in) {
  Schema schema{"poi",
                {{"name", FieldKind::kText, true},
                 {"lat", FieldKind::kNumeric, true},
                 {"lon", FieldKind::kNumeric, true}},
                false};
  const Table t = read_csv(in, schema).table;
  const auto& names = t.column("name").text();
  const auto& lat = t.column("lat").numeric();
  const auto& lon = t.column("lon").numeric();
  std::vector<Poi> pois;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    if (!names[r] || !lat[r] || !lon[r]) {
      throw ArgumentError("POI file row " + std::to_string(r + 1) + " is incomplete");
    }
    pois.push_back({std::string(trim(*names[r])), {*lat[r], *lon[r]}});
  }
  return PoiSet(std::move(pois));
}

PoiSet PoiSet::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open POI file '" + path.string() + "'");
  return load_csv(in);
}

const Poi* PoiSet::find(std::string_view name) const {
  for (const auto& p : pois_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

PoiDistanceResult poi_distance_features(const Table& t, const PoiSet& pois,
                                        std::string_view lat, std::string_view lon) {
  const Column& lat_col = t.column(lat);
  const Column& lon_col = t.column(lon);
  PoiDistanceResult result{t, {}};
  std::vector<std::optional<GeoPoint>> points(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const auto a = lat_col.as_double(r);
    const auto b = lon_col.as_double(r);
    if (a && b && GeoPoint{*a, *b}.valid()) {
      points[r] = GeoPoint{*a, *b};
    } else {
      result.bad_rows.push_back(r);
    }
  }
  for (const auto& poi : pois.pois()) {
    Cells<double> dist(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      if (points[r]) dist[r] = haversine_km(*points[r], poi.point);
    }
    result.table.set(poi_column_name(poi.name), Column(std::move(dist)));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Amenities
// ---------------------------------------------------------------------------

std::vector<std::string> parse_amenities(std::string_view cell, char delimiter) {
  std::vector<std::string> out;
  const std::string_view s = trim(cell);
  if (s.empty()) return out;
  if (s.front() == '[') {
    const auto parsed = nlohmann::json::parse(s, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_array()) {
      for (const auto& item : parsed) {
        if (!item.is_string()) continue;
        std::string v(trim(item.get<std::string>()));
        if (!v.empty()) out.push_back(std::move(v));
      }
      return out;
    }
    // Not valid JSON: fall back to a comma list inside the brackets.
    std::string_view inner = s.substr(1, s.size() - (s.back() == ']' ? 2 : 1));
    for (auto& part : split(inner, ',')) {
      std::string_view p = trim(part);
      if (p.size() >= 2 && p.front() == '"' && p.back() == '"') {
        p = p.substr(1, p.size() - 2);
      }
      if (!p.empty()) out.emplace_back(p);
    }
    return out;
  }
  for (auto& part : split(s, delimiter)) {
    const std::string_view p = trim(part);
    if (!p.empty()) out.emplace_back(p);
  }
  return out;
}

std::vector<std::string> top_k_amenities(const Table& t, int k, std::string_view col,
                                         char delimiter) {
  if (k <= 0) throw ArgumentError("top_k_amenities: k must be positive");
  const auto& cells = t.column(col).text();
  std::map<std::string, std::size_t> counts;
  for (const auto& cell : cells) {
    if (!cell) continue;
    // A listing counts once per amenity.
    std::set<std::string> uniq;
    for (auto& a : parse_amenities(*cell, delimiter)) uniq.insert(std::move(a));
    for (const auto& a : uniq) ++counts[a];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i) {
    out.push_back(ranked[i].first);
  }
  return out;
}

Table binarize_amenities(const Table& t, std::span<const std::string> amenities,
                         std::string_view col, char delimiter) {
  const auto& cells = t.column(col).text();
  std::vector<std::set<std::string>> parsed(t.n_rows());
  Cells<std::int64_t> count(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    std::vector<std::string> items;
    if (cells[r]) items = parse_amenities(*cells[r], delimiter);
    count[r] = static_cast<std::int64_t>(items.size());
    parsed[r].insert(items.begin(), items.end());
  }
  Table out = t;
  for (const auto& a : amenities) {
    Cells<std::int64_t> flag(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) flag[r] = parsed[r].count(a) ? 1 : 0;
    out.set(a, Column(std::move(flag)));
  }
  out.set("amenity_count", Column(std::move(count)));
  return out;
}

// ---------------------------------------------------------------------------
// Dates and categories
// ---------------------------------------------------------------------------

Table expand_date(const Table& t, std::string_view date_col) {
  const auto& dates = t.column(date_col).date();
  Cells<std::int64_t> year(t.n_rows()), month(t.n_rows()), dow(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    if (!dates[r]) continue;
    year[r] = dates[r]->year;
    month[r] = dates[r]->month;
    dow[r] = dates[r]->weekday();
  }
  Table out = t;
  out.set("year", Column(std::move(year)));
  out.set("month", Column(std::move(month)));
  out.set("day_of_week", Column(std::move(dow)));
  return out;
}

Table one_hot(const Table& t, std::string_view col) {
  const auto& cells = t.column(col).text();
  std::set<std::string> categories;
  for (const auto& c : cells) {
    if (c) categories.insert(*c);
  }
  Table out = t;
  out.drop(col);
  for (const auto& cat : categories) {
    Cells<std::int64_t> flag(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      flag[r] = (cells[r] && *cells[r] == cat) ? 1 : 0;
    }
    out.set(std::string(col) + "_" + cat, Column(std::move(flag)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// FeatureMatrix
// ---------------------------------------------------------------------------

FeatureMatrix FeatureMatrix::take_rows(std::span<const Eigen::Index> rows) const {
  FeatureMatrix out;
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.scaling = scaling;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.x.row(r) = x.row(rows[i]);
    out.y(r) = y(rows[i]);
  }
  return out;
}

std::optional<Eigen::Index> FeatureMatrix::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (feature_names[j] == name) return static_cast<Eigen::Index>(j);
  }
  return std::nullopt;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::string> names) const {
  FeatureMatrix out;
  out.target_name = target_name;
  out.y = y;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(names.size()));
  std::optional<Scaling> sub;
  if (scaling) sub.emplace();
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto idx = index_of(names[j]);
    if (!idx) throw SchemaError("feature '" + names[j] + "' not in matrix");
    out.x.col(static_cast<Eigen::Index>(j)) = x.col(*idx);
    out.feature_names.push_back(names[j]);
    if (sub) {
      const auto k = static_cast<std::size_t>(*idx);
      sub->means.push_back(scaling->means[k]);
      sub->stds.push_back(scaling->stds[k]);
      sub->zero_variance.push_back(scaling->zero_variance[k]);
    }
  }
  out.scaling = std::move(sub);
  return out;
}

FeatureMatrix standardize(const FeatureMatrix& m) {
  Scaling s;
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double mean = n > 0 ? m.x.col(j).mean() : 0.0;
    const double var =
        n > 0 ? (m.x.col(j).array() - mean).square().sum() / static_cast<double>(n) : 0.0;
    const double sd = std::sqrt(var);
    // Relative guard so columns constant up to rounding count as constant.
    const bool zero = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    s.means.push_back(mean);
    s.stds.push_back(zero ? 0.0 : sd);
    s.zero_variance.push_back(zero);
  }
  return apply_scaling(m, s);
}

FeatureMatrix apply_scaling(const FeatureMatrix& m, const Scaling& s) {
  if (s.means.size() != static_cast<std::size_t>(m.cols())) {
    throw ArgumentError("apply_scaling: parameter count does not match columns");
  }
  FeatureMatrix out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (s.zero_variance[k]) {
      out.x.col(j).setZero();
    } else {
      out.x.col(j) = (m.x.col(j).array() - s.means[k]) / s.stds[k];
    }
  }
  out.scaling = s;
  return out;
}

FeatureMatrix inverse_scaling(const FeatureMatrix& m) {
  if (!m.scaling) return m;
  const Scaling& s = *m.scaling;
  FeatureMatrix out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (s.zero_variance[k]) {
      out.x.col(j).setConstant(s.means[k]);
    } else {
      out.x.col(j) = m.x.col(j).array() * s.stds[k] + s.means[k];
    }
  }
  out.scaling.reset();
  return out;
}

FeatureMatrix assemble_matrix(const Table& t, std::string_view target,
                              std::span<const std::string> feature_cols) {
  std::set<std::string> seen;
  for (const auto& name : feature_cols) {
    if (!seen.insert(name).second) {
      throw SchemaError("assemble_matrix: duplicate feature '" + name + "'");
    }
  }
  const auto n = static_cast<Eigen::Index>(t.n_rows());
  FeatureMatrix m;
  m.target_name = std::string(target);
  m.x.resize(n, static_cast<Eigen::Index>(feature_cols.size()));
  m.y.resize(n);
  std::vector<std::string> problems;
  std::size_t n_problems = 0;
  auto note = [&](std::string_view col, std::size_t r) {
    if (problems.size() < 20) {
      problems.push_back(std::string(col) + "@row" + std::to_string(r));
    }
    ++n_problems;
  };
  auto fill = [&](const Column& c, std::string_view name, auto&& sink) {
    if (!c.is_numeric_like()) {
      throw TypeError("assemble_matrix: column '" + std::string(name) +
                      "' is " + std::string(to_string(c.type())));
    }
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const auto v = c.as_double(r);
      if (!v) {
        note(name, r);
      } else {
        sink(static_cast<Eigen::Index>(r), *v);
      }
    }
  };
  fill(t.column(target), target, [&](Eigen::Index r, double v) { m.y(r) = v; });
  for (std::size_t j = 0; j < feature_cols.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    fill(t.column(feature_cols[j]), feature_cols[j],
         [&](Eigen::Index r, double v) { m.x(r, jj) = v; });
    m.feature_names.push_back(feature_cols[j]);
  }
  if (n_problems > 0) {
    std::string msg = "assemble_matrix: " + std::to_string(n_problems) + " missing cell(s): ";
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i > 0) msg += ", ";
      msg += problems[i];
    }
    if (n_problems > problems.size()) msg += ", ...";
    throw AssemblyError(msg);
  }
  return m;
}

void write_matrix_csv(const FeatureMatrix& m, std::ostream& out) {
  for (const auto& name : m.feature_names) out << csv_escape(name) << ',';
  out << csv_escape(m.target_name) << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << format_double(m.x(r, j)) << ',';
    out << format_double(m.y(r)) << '\n';
  }
}

void write_matrix_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ostringstream buf;
  write_matrix_csv(m, buf);
  write_file_atomic(path, buf.str());
}

FeatureMatrix read_matrix_csv(std::istream& in) {
  std::vector<std::string> header;
  if (!read_csv_record(in, header) || header.empty()) {
    throw IoError("matrix CSV has no header");
  }
  std::vector<std::vector<double>> rows;
  std::vector<std::string> fields;
  std::size_t line = 1;
  while (read_csv_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != header.size()) {
      throw IoError("matrix CSV line " + std::to_string(line) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(header.size()));
    }
    std::vector<double> row;
    for (const auto& f : fields) {
      const auto v = parse_currency(f);
      if (!v) throw IoError("matrix CSV line " + std::to_string(line) + ": bad number '" + f + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  FeatureMatrix m;
  const auto p = static_cast<Eigen::Index>(header.size() - 1);
  m.feature_names.assign(header.begin(), header.end() - 1);
  m.target_name = header.back();
  m.x.resize(static_cast<Eigen::Index>(rows.size()), p);
  m.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    for (Eigen::Index j = 0; j < p; ++j) m.x(rr, j) = rows[r][static_cast<std::size_t>(j)];
    m.y(rr) = rows[r].back();
  }
  return m;
}

FeatureMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open matrix file '" + path.string() + "'");
  return read_matrix_csv(in);
}

}  // namespace rentlab
