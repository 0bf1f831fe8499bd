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

// Synthetic listings, calendar and reviews with a known price function.
//
// Nightly price of listing l on date d:
//   base(d) + sum_j coef_j * (f_j(l) - mean_j)
//           + interaction * bedrooms(l) * exp(-dist_center(l) / radial_scale_km)
//           + radial_premium * exp(-dist_center(l) / radial_scale_km)
//           + noise
// base(d) is the weekday or weekend (Friday, Saturday) median, raised by
// peak_uplift in peak months. Features f_j are named as the pipeline names
// its matrix columns (bedrooms, dist_<poi>_km, room_type_<value>, amenity
// names, ...) and mean_j is their mean over the generated listings.

#ifndef RENTLAB_SYNTHGEN_HPP_
#define RENTLAB_SYNTHGEN_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rentlab/features.hpp"
#include "rentlab/geo.hpp"
#include "rentlab/tabular.hpp"
#include "rentlab/wrangle.hpp"

namespace rentlab {

struct GenConfig {
  int n_listings = 200;
  Date start{2022, 6, 9};
  Date end{2023, 6, 8};
  std::uint64_t seed = 0;

  double weekday_median = 155.0;
  double weekend_median = 180.0;
  double q1 = 100.0;
  double q3_weekday = 260.0;
  double q3_weekend = 290.0;
  std::vector<int> peak_months{3, 10};
  double peak_uplift = 0.15;
  double noise_std = 15.0;
  std::map<std::string, double> true_coefficients = default_coefficients();
  double interaction = 25.0;
  double radial_premium = 60.0;
  double radial_scale_km = 3.0;
  GeoPoint center{30.2672, -97.7431};

  // Data quality knobs.
  double outlier_fraction = 0.01;
  double missing_fraction = 0.0;
  double duplicate_fraction = 0.0;
  std::optional<GapSpec> gap;
  int max_reviews_per_listing = 6;
  double positive_review_share = 0.7;
  double non_english_fraction = 0.0;

  // Throws ArgumentError.
  void validate() const;
  static std::map<std::string, double> default_coefficients();
};

GenConfig gen_config_from_json(const nlohmann::json& j, GenConfig base = {});
nlohmann::json to_json(const GenConfig& cfg);

struct ListingTruth {
  std::int64_t id = 0;
  std::map<std::string, double> features;  // only those with a coefficient
  double bedrooms = 0.0;
  double center_km = 0.0;
};

struct GroundTruth {
  std::vector<ListingTruth> listings;
  std::map<std::string, double> feature_means;
  // (listing_id, date) of planted outlier prices.
  std::vector<std::pair<std::int64_t, Date>> outliers;
  // Per review row: +1 positive template, -1 negative, 0 non-English.
  std::vector<int> review_sign;
  // Calendar rows whose price cell was blanked.
  std::size_t missing_prices = 0;
};

struct GeneratedData {
  Table listings;
  Table calendar;  // price and adjusted_price as "$" text, like the source data
  Table reviews;
  GroundTruth truth;
};

GeneratedData generate(const GenConfig& cfg);

// Noiseless price of a listing on a date.
double ground_truth(const GenConfig& cfg, const GroundTruth& truth, const ListingTruth& listing,
                    Date date);
double ground_truth(const GenConfig& cfg, const GroundTruth& truth, std::int64_t listing_id,
                    Date date);

// Writes listings.csv, calendar.csv and reviews.csv into `dir`.
void write_generated(const GeneratedData& data, const std::filesystem::path& dir);

// Sparse linear regression problem: y = sum of `informative` randomly placed
// columns times their coefficients, plus Gaussian noise.
struct SparseProblem {
  FeatureMatrix matrix;
  std::vector<std::string> informative;
  std::vector<double> coefficients;  // per column, zero for noise columns
};

SparseProblem generate_sparse_linear(int n, int p, int informative, double noise_std,
                                     std::uint64_t seed);

}  // namespace rentlab

#endif  // RENTLAB_SYNTHGEN_HPP_
