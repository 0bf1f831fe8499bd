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

#include "rentlab/wrangle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "rentlab/common.hpp"
#include "rentlab/geo.hpp"

namespace rentlab {

void WrangleReport::add(std::string operation, std::string column,
                        std::size_t rows, std::string flags) {
  entries.push_back({std::move(operation), std::move(column), rows, std::move(flags)});
}

std::string WrangleReport::to_csv() const {
  std::ostringstream out;
  out << "operation,column,rows_affected,flags\n";
  for (const auto& e : entries) {
    out << csv_escape(e.operation) << ',' << csv_escape(e.column) << ','
        << e.rows_affected << ',' << csv_escape(e.flags) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Quantiles and fences
// ---------------------------------------------------------------------------

namespace {

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::vector<double> present_sorted(std::span<const std::optional<double>> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    if (v && !std::isnan(*v)) out.push_back(*v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_q(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile level must be in [0, 1]");
}

Fences fences_from_sorted(const std::vector<double>& sorted, double multiplier) {
  if (!(multiplier >= 0.0)) throw ArgumentError("IQR multiplier must be >= 0");
  if (sorted.empty()) throw EmptyInputError("iqr_fences: no non-missing values");
  Fences f;
  f.q1 = sorted_quantile(sorted, 0.25);
  f.q3 = sorted_quantile(sorted, 0.75);
  const double iqr = f.q3 - f.q1;
  f.multiplier = multiplier;
  f.lower = f.q1 - multiplier * iqr;
  f.upper = f.q3 + multiplier * iqr;
  return f;
}

}  // namespace

double quantile(std::span<const std::optional<double>> values, double q) {
  check_q(q);
  const std::vector<double> sorted = present_sorted(values);
  if (sorted.empty()) throw EmptyInputError("quantile: no non-missing values");
  return sorted_quantile(sorted, q);
}

double quantile(std::span<const double> values, double q) {
  check_q(q);
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (double v : values) {
    if (!std::isnan(v)) sorted.push_back(v);
  }
  if (sorted.empty()) throw EmptyInputError("quantile: no non-missing values");
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, q);
}

Fences iqr_fences(std::span<const std::optional<double>> values, double multiplier) {
  return fences_from_sorted(present_sorted(values), multiplier);
}

Fences iqr_fences(std::span<const double> values, double multiplier) {
  std::vector<double> sorted(values.begin(), values.end());
  std::erase_if(sorted, [](double v) { return std::isnan(v); });
  std::sort(sorted.begin(), sorted.end());
  return fences_from_sorted(sorted, multiplier);
}

Table remove_outliers(const Table& t, std::string_view col, double multiplier,
                      WrangleReport* report) {
  const Column& c = t.column(col);
  if (!c.is_numeric_like()) {
    throw TypeError("remove_outliers: column '" + std::string(col) + "' is not numeric");
  }
  const Cells<double> values = c.to_doubles();
  return remove_outliers(t, col, iqr_fences(values, multiplier), report);
}

Table remove_outliers(const Table& t, std::string_view col, const Fences& fences,
                      WrangleReport* report) {
  const Column& c = t.column(col);
  if (!c.is_numeric_like()) {
    throw TypeError("remove_outliers: column '" + std::string(col) + "' is not numeric");
  }
  std::vector<std::size_t> keep;
  keep.reserve(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const auto v = c.as_double(r);
    if (!v || fences.contains(*v)) keep.push_back(r);
  }
  if (report != nullptr) {
    std::ostringstream flags;
    flags << "lower=" << format_double(fences.lower)
          << ";upper=" << format_double(fences.upper)
          << ";multiplier=" << format_double(fences.multiplier);
    report->add("remove_outliers", std::string(col), t.n_rows() - keep.size(),
                flags.str());
  }
  return t.take(keep);
}

// ---------------------------------------------------------------------------
// Imputation
// ---------------------------------------------------------------------------

namespace {

Cells<double>& numeric_target(Table& t, std::string_view target, const char* op) {
  Column& c = t.column(target);
  if (c.type() == ColumnType::kInteger || c.type() == ColumnType::kBoolean) {
    c = Column(c.to_doubles());
  }
  if (c.type() != ColumnType::kNumeric) {
    throw TypeError(std::string(op) + ": column '" + std::string(target) +
                    "' is not numeric");
  }
  return c.numeric();
}

}  // namespace

Table impute_group_mean(const Table& t, std::string_view target,
                        std::string_view group, WrangleReport* report) {
  Table out = t;
  const Column& g = t.column(group);
  Cells<double>& y = numeric_target(out, target, "impute_group_mean");

  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::unordered_map<std::string, Acc> acc;
  for (std::size_t r = 0; r < out.n_rows(); ++r) {
    if (g.is_missing(r) || !y[r]) continue;
    Acc& a = acc[g.format(r)];
    a.sum += *y[r];
    ++a.n;
  }
  std::size_t filled = 0;
  for (std::size_t r = 0; r < out.n_rows(); ++r) {
    if (y[r] || g.is_missing(r)) continue;
    const auto it = acc.find(g.format(r));
    if (it == acc.end() || it->second.n == 0) continue;
    y[r] = it->second.sum / static_cast<double>(it->second.n);
    ++filled;
  }
  if (report != nullptr) {
    report->add("impute_group_mean", std::string(target), filled,
                "group=" + std::string(group));
  }
  return out;
}

Table impute_global_median(const Table& t, std::string_view target,
                           WrangleReport* report) {
  Table out = t;
  Cells<double>& y = numeric_target(out, target, "impute_global_median");
  const double med = quantile(std::span<const std::optional<double>>(y), 0.5);
  std::size_t filled = 0;
  for (auto& cell : y) {
    if (!cell) {
      cell = med;
      ++filled;
    }
  }
  if (report != nullptr) {
    report->add("impute_global_median", std::string(target), filled,
                "median=" + format_double(med));
  }
  return out;
}

KnnImputation knn_impute_geo(const Table& t, std::string_view target,
                             std::string_view lat, std::string_view lon, int k,
                             double warn_radius_km, WrangleReport* report) {
  if (k < 1) throw ArgumentError("knn_impute_geo: k must be >= 1");
  KnnImputation result{t, {}, false};
  Cells<double>& y = numeric_target(result.table, target, "knn_impute_geo");
  const Column& lat_col = t.column(lat);
  const Column& lon_col = t.column(lon);

  auto point = [&](std::size_t r) -> std::optional<GeoPoint> {
    const auto a = lat_col.as_double(r);
    const auto b = lon_col.as_double(r);
    if (!a || !b) return std::nullopt;
    return GeoPoint{*a, *b};
  };

  std::vector<std::size_t> donors;
  std::vector<GeoPoint> donor_points;
  std::vector<double> donor_values;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    if (!y[r]) continue;
    const auto p = point(r);
    if (!p) continue;
    donors.push_back(r);
    donor_points.push_back(*p);
    donor_values.push_back(*y[r]);
  }
  std::vector<std::size_t> targets;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    if (!y[r]) targets.push_back(r);
  }
  if (!targets.empty() && donors.empty()) {
    throw EmptyInputError("knn_impute_geo: no donors with a non-missing '" +
                          std::string(target) + "'");
  }
  const std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(k), donors.size());
  result.short_of_donors = !targets.empty() && donors.size() < static_cast<std::size_t>(k);

  std::vector<std::pair<double, std::size_t>> dist(donors.size());
  std::size_t skipped = 0;
  std::size_t far = 0;
  // Donor values are read from the pre-imputation snapshot so the result does
  // not depend on fill order.
  for (std::size_t r : targets) {
    const auto p = point(r);
    if (!p) {
      ++skipped;
      continue;
    }
    for (std::size_t d = 0; d < donors.size(); ++d) {
      dist[d] = {haversine_km(*p, donor_points[d]), d};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(use),
                      dist.end());
    double sum = 0.0;
    double max_km = 0.0;
    for (std::size_t i = 0; i < use; ++i) {
      sum += donor_values[dist[i].second];
      max_km = std::max(max_km, dist[i].first);
    }
    const double value = sum / static_cast<double>(use);
    y[r] = value;
    const bool beyond = max_km > warn_radius_km;
    far += beyond ? 1 : 0;
    result.cells.push_back({r, value, use, max_km, beyond});
  }
  if (report != nullptr) {
    std::ostringstream flags;
    flags << "k=" << k;
    if (result.short_of_donors) flags << ";short_of_donors=" << donors.size();
    if (far > 0) flags << ";beyond_" << format_double(warn_radius_km) << "km=" << far;
    if (skipped > 0) flags << ";no_coordinates=" << skipped;
    report->add("knn_impute_geo", std::string(target), result.cells.size(), flags.str());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Calendar gap
// ---------------------------------------------------------------------------

Table fill_calendar_gap(const Table& cal, const GapSpec& gap, WrangleReport* report) {
  if (gap.end < gap.start) throw ArgumentError("fill_calendar_gap: gap end before start");
  if (cal.n_rows() == 0) throw EmptyInputError("fill_calendar_gap: empty calendar");
  const auto& ids = cal.column("listing_id").integer();
  const auto& dates = cal.column("date").date();
  const Cells<double> prices = cal.column("price").to_doubles();

  struct History {
    double dow_sum[7] = {};
    std::size_t dow_n[7] = {};
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::int64_t, History> history;
  // (listing, day) of rows already holding a price inside the gap.
  std::map<std::pair<std::int64_t, std::int64_t>, bool> priced_in_gap;
  const std::int64_t g0 = gap.start.to_days();
  const std::int64_t g1 = gap.end.to_days();
  for (std::size_t r = 0; r < cal.n_rows(); ++r) {
    if (!ids[r]) continue;
    History& h = history[*ids[r]];
    if (!prices[r] || !dates[r]) continue;
    const int dow = dates[r]->weekday();
    h.dow_sum[dow] += *prices[r];
    ++h.dow_n[dow];
    h.sum += *prices[r];
    ++h.n;
    const std::int64_t day = dates[r]->to_days();
    if (day >= g0 && day <= g1) priced_in_gap[{*ids[r], day}] = true;
  }

  // Keep all rows except unpriced ones inside the gap, which get replaced.
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < cal.n_rows(); ++r) {
    if (!prices[r] && ids[r] && dates[r]) {
      const std::int64_t day = dates[r]->to_days();
      if (day >= g0 && day <= g1 && history[*ids[r]].n > 0) continue;
    }
    keep.push_back(r);
  }
  Table out = cal.take(keep);
  if (out.column("price").type() != ColumnType::kNumeric) {
    out.set("price", Column(out.column("price").to_doubles()));
  }

  std::vector<std::pair<std::string, Column>> extra;
  for (const auto& [name, col] : out.columns()) {
    extra.emplace_back(name, Column::empty_of(col.type(), 0));
  }
  std::size_t added = 0;
  std::size_t skipped_listings = 0;
  std::size_t fallback = 0;
  for (const auto& [id, h] : history) {
    if (h.n == 0) {
      ++skipped_listings;
      continue;
    }
    for (std::int64_t day = g0; day <= g1; ++day) {
      if (priced_in_gap.count({id, day}) != 0) continue;
      const Date d = Date::from_days(day);
      const int dow = d.weekday();
      double price;
      if (h.dow_n[dow] > 0) {
        price = h.dow_sum[dow] / static_cast<double>(h.dow_n[dow]);
      } else {
        price = h.sum / static_cast<double>(h.n);
        ++fallback;
      }
      for (auto& [name, col] : extra) {
        if (name == "listing_id") {
          col.integer().emplace_back(id);
        } else if (name == "date") {
          col.date().emplace_back(d);
        } else if (name == "price") {
          col.numeric().emplace_back(price);
        } else if (name == "month" && col.type() == ColumnType::kInteger) {
          col.integer().emplace_back(d.month);
        } else {
          col.append_missing();
        }
      }
      ++added;
    }
  }
  Table new_rows(added);
  for (auto& [name, col] : extra) new_rows.add(name, std::move(col));
  Table grown = std::move(out);
  grown.append(new_rows);

  std::vector<std::size_t> order(grown.n_rows());
  std::iota(order.begin(), order.end(), 0);
  const auto& gid = grown.column("listing_id").integer();
  const auto& gdate = grown.column("date").date();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = std::make_pair(gid[a].value_or(INT64_MIN),
                                   gdate[a] ? gdate[a]->to_days() : INT64_MIN);
    const auto kb = std::make_pair(gid[b].value_or(INT64_MIN),
                                   gdate[b] ? gdate[b]->to_days() : INT64_MIN);
    return ka < kb;
  });
  if (report != nullptr) {
    std::ostringstream flags;
    flags << "gap=" << gap.start.to_string() << ".." << gap.end.to_string();
    if (fallback > 0) flags << ";overall_mean_fallback=" << fallback;
    if (skipped_listings > 0) flags << ";listings_without_history=" << skipped_listings;
    report->add("fill_calendar_gap", "price", added, flags.str());
  }
  return grown.take(order);
}

}  // namespace rentlab
