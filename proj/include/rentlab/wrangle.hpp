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

// Outlier removal, missing-value imputation and calendar gap backfill.

#ifndef RENTLAB_WRANGLE_HPP_
#define RENTLAB_WRANGLE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rentlab/tabular.hpp"

namespace rentlab {

inline constexpr double kDefaultIqrMultiplier = 0.5;
inline constexpr int kDefaultKnnNeighbors = 10;
inline constexpr double kDefaultKnnWarnRadiusKm = 10.0;

// One line of the wrangle report CSV.
struct WrangleEntry {
  std::string operation;
  std::string column;
  std::size_t rows_affected = 0;
  std::string flags;
};

struct WrangleReport {
  std::vector<WrangleEntry> entries;

  void add(std::string operation, std::string column, std::size_t rows,
           std::string flags = {});
  // Header: operation,column,rows_affected,flags
  std::string to_csv() const;
};

// Interpolated quantile at position (n-1)*q over the sorted non-missing values.
// Throws EmptyInputError if nothing is left, ArgumentError if q is outside [0,1].
double quantile(std::span<const double> values, double q);
double quantile(std::span<const std::optional<double>> values, double q);

struct Fences {
  double lower = 0.0;
  double upper = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double multiplier = kDefaultIqrMultiplier;

  bool contains(double v) const { return lower <= v && v <= upper; }
};

Fences iqr_fences(std::span<const std::optional<double>> values,
                  double multiplier = kDefaultIqrMultiplier);
Fences iqr_fences(std::span<const double> values,
                  double multiplier = kDefaultIqrMultiplier);

// Drops rows whose value lies outside fences computed once on `col`.
// Rows with a missing value are kept.
Table remove_outliers(const Table& t, std::string_view col,
                      double multiplier = kDefaultIqrMultiplier,
                      WrangleReport* report = nullptr);
// Same, against fixed fences.
Table remove_outliers(const Table& t, std::string_view col, const Fences& fences,
                      WrangleReport* report = nullptr);

// Missing `target` cells take the mean of their group's non-missing values.
Table impute_group_mean(const Table& t, std::string_view target,
                        std::string_view group, WrangleReport* report = nullptr);

// Remaining missing `target` cells take the column median.
Table impute_global_median(const Table& t, std::string_view target,
                           WrangleReport* report = nullptr);

struct KnnImputedCell {
  std::size_t row = 0;
  double value = 0.0;
  std::size_t donors_used = 0;
  double max_donor_km = 0.0;
  bool beyond_warn_radius = false;
};

struct KnnImputation {
  Table table;
  std::vector<KnnImputedCell> cells;
  // Fewer than k donors existed; all of them were used.
  bool short_of_donors = false;
};

// Missing `target` cells take the mean target of the k nearest rows by
// great-circle distance among rows with a non-missing target. Distance ties
// are broken by row order. Throws EmptyInputError if there are no donors.
KnnImputation knn_impute_geo(const Table& t, std::string_view target,
                             std::string_view lat, std::string_view lon,
                             int k = kDefaultKnnNeighbors,
                             double warn_radius_km = kDefaultKnnWarnRadiusKm,
                             WrangleReport* report = nullptr);

struct GapSpec {
  Date start;
  Date end;  // inclusive
};

// Backfills every (listing, date) in the gap with the listing's mean price for
// that weekday; weekdays without history use the listing's overall mean, and
// listings without any priced history are skipped. Existing priced rows are
// kept as they are. Output has columns listing_id, date, price (other input
// columns carried with missing cells for new rows) sorted by (listing_id, date).
Table fill_calendar_gap(const Table& cal, const GapSpec& gap,
                        WrangleReport* report = nullptr);

}  // namespace rentlab

#endif  // RENTLAB_WRANGLE_HPP_
