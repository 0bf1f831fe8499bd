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

// Feature engineering: point-of-interest distances, amenity indicators, date
// expansion, one-hot encoding, scaling and design-matrix assembly.

#ifndef RENTLAB_FEATURES_HPP_
#define RENTLAB_FEATURES_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rentlab/geo.hpp"
#include "rentlab/tabular.hpp"

namespace rentlab {

struct Poi {
  std::string name;
  GeoPoint point;
};

class PoiSet {
 public:
  PoiSet() = default;
  // Throws ArgumentError on duplicate names or invalid coordinates.
  explicit PoiSet(std::vector<Poi> pois);

  // The 13 default Austin attractions. Coordinates are configuration.
  static PoiSet austin_default();
  // CSV with header name,lat,lon.
  static PoiSet load_csv(const std::filesystem::path& path);
  static PoiSet load_csv(std::istream& in);

  const std::vector<Poi>& pois() const { return pois_; }
  std::size_t size() const { return pois_.size(); }
  const Poi* find(std::string_view name) const;

 private:
  std::vector<Poi> pois_;
};

inline std::string poi_column_name(std::string_view poi) {
  return "dist_" + std::string(poi) + "_km";
}

struct PoiDistanceResult {
  Table table;
  // Rows whose coordinates were missing or invalid; their cells are missing.
  std::vector<std::size_t> bad_rows;
};

// Appends dist_<poi>_km for every POI.
PoiDistanceResult poi_distance_features(const Table& t, const PoiSet& pois,
                                        std::string_view lat = "latitude",
                                        std::string_view lon = "longitude");

// Parses one amenities cell: a JSON-style string array ("[\"Wifi\", \"TV\"]")
// or a `delimiter`-separated list. Entries are trimmed; empties dropped.
std::vector<std::string> parse_amenities(std::string_view cell, char delimiter = ';');

// The k most frequent amenities, ties broken alphabetically.
std::vector<std::string> top_k_amenities(const Table& t, int k = 30,
                                         std::string_view col = "amenities",
                                         char delimiter = ';');

// One 0/1 integer column per listed amenity plus amenity_count (the parsed
// list length per row, counting every amenity).
Table binarize_amenities(const Table& t, std::span<const std::string> amenities,
                         std::string_view col = "amenities", char delimiter = ';');

// Appends (or replaces) integer columns year, month, day_of_week (0=Monday).
Table expand_date(const Table& t, std::string_view date_col);

// Replaces a text column with one 0/1 column per category, named
// <col>_<category>, categories in ascending order. Missing cells give all
// zeros.
Table one_hot(const Table& t, std::string_view col);

struct Scaling {
  std::vector<double> means;
  std::vector<double> stds;
  // Columns with zero standard deviation; transformed to all zeros.
  std::vector<bool> zero_variance;
};

// Dense design matrix with named columns and the price target.
struct FeatureMatrix {
  Eigen::MatrixXd x;
  std::vector<std::string> feature_names;
  Eigen::VectorXd y;
  std::string target_name = "price";
  std::optional<Scaling> scaling;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }

  FeatureMatrix take_rows(std::span<const Eigen::Index> rows) const;
  // Columns in the given order; throws SchemaError for unknown names.
  FeatureMatrix select(std::span<const std::string> names) const;
  std::optional<Eigen::Index> index_of(std::string_view name) const;
};

// Population standardization; parameters recorded in the result.
FeatureMatrix standardize(const FeatureMatrix& m);
// Applies stored parameters (e.g. from the training split) to new rows.
FeatureMatrix apply_scaling(const FeatureMatrix& m, const Scaling& s);
FeatureMatrix inverse_scaling(const FeatureMatrix& m);

// Builds the matrix from numeric, integer and boolean columns. Throws
// AssemblyError listing the offending cells if any is missing.
FeatureMatrix assemble_matrix(const Table& t, std::string_view target,
                              std::span<const std::string> feature_cols);

// CSV: header = feature names then target, one row per sample.
void write_matrix_csv(const FeatureMatrix& m, std::ostream& out);
void write_matrix_csv(const FeatureMatrix& m, const std::filesystem::path& path);
// The last column is the target.
FeatureMatrix read_matrix_csv(std::istream& in);
FeatureMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace rentlab

#endif  // RENTLAB_FEATURES_HPP_
