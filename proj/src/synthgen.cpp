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

#include "rentlab/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "rentlab/common.hpp"

namespace rentlab {

namespace {

constexpr std::array<const char*, 45> kAmenityPool = {
    "Wifi",          "Kitchen",        "Air conditioning",     "Heating",
    "Essentials",    "Smoke alarm",    "Hangers",              "Pool",
    "Hair dryer",    "Iron",           "Washer",               "Dryer",
    "TV",            "Coffee maker",   "Microwave",            "Refrigerator",
    "Hot water",     "Shampoo",        "Bed linens",           "Dishwasher",
    "Self check-in", "Oven",           "Stove",                "Dedicated workspace",
    "Free parking on premises",        "Carbon monoxide alarm", "Fire extinguisher",
    "First aid kit", "Extra pillows and blankets",             "Patio or balcony",
    "Ceiling fan",   "Lockbox",        "Private entrance",     "Hot tub",
    "Backyard",      "BBQ grill",      "Outdoor furniture",    "Long term stays allowed",
    "Luggage dropoff allowed",         "Room-darkening shades", "Pets allowed",
    "Gym",           "Crib",           "High chair",           "EV charger",
};

constexpr std::array<const char*, 3> kRoomTypes = {"Entire home/apt", "Private room",
                                                   "Shared room"};

constexpr std::array<const char*, 8> kPositiveTemplates = {
    "Great stay, the host was friendly and the place was clean.",
    "We loved the location and the apartment was beautiful.",
    "Amazing house with comfortable beds and a wonderful view.",
    "Perfect spot for our trip, highly recommend!",
    "The host was helpful and the neighborhood felt safe and fun.",
    "Lovely home, spotless kitchen and a nice patio.",
    "Awesome place, super cozy and the check in was easy.",
    "Excellent value, everything was perfect and the host was kind.",
};

constexpr std::array<const char*, 8> kNegativeTemplates = {
    "The room was dirty and the host was rude.",
    "Terrible experience, the bathroom was filthy and broken.",
    "Awful stay with a noisy street and a horrible smell.",
    "The place was disappointing and the bed was uncomfortable.",
    "We had a bad time, the apartment was ugly and unsafe.",
    "Worst listing ever, the host ignored our complaints.",
    "Gross carpets, broken shower and a nasty odor everywhere.",
    "The stay was a disaster, dirty sheets and a hostile host.",
};

constexpr std::array<const char*, 6> kForeignTemplates = {
    "La casa era muy bonita y el anfitrión fue muy amable con nosotros.",
    "Todo estaba limpio, la ubicación es excelente y volveremos pronto.",
    "Le logement était très propre et le quartier est calme et agréable.",
    "Nous avons passé un séjour merveilleux, merci pour tout.",
    "Die Wohnung war sehr sauber und der Gastgeber war freundlich.",
    "Wir hatten einen schönen Aufenthalt in einer ruhigen Gegend.",
};

constexpr std::array<const char*, 6> kFirstNames = {"Alex", "Sam", "Jordan",
                                                     "Taylor", "Casey", "Riley"};

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); }

bool bernoulli(Rng& rng, double p) { return uniform_unit(rng) < p; }

std::string money(double v) { return "$" + format_double(v); }

bool is_weekend(Date d) {
  const int w = d.weekday();
  return w == 4 || w == 5;
}

// Candidate feature values of one listing, named as the pipeline names its
// matrix columns.
std::map<std::string, double> candidate_features(
    const std::map<std::string, double>& listing_values, const std::string& room_type,
    const std::vector<std::string>& amenities, GeoPoint location) {
  std::map<std::string, double> f = listing_values;
  for (const char* rt : kRoomTypes) {
    f["room_type_" + std::string(rt)] = room_type == rt ? 1.0 : 0.0;
  }
  for (const char* a : kAmenityPool) f[a] = 0.0;
  for (const auto& a : amenities) f[a] = 1.0;
  f["amenity_count"] = static_cast<double>(amenities.size());
  static const PoiSet kPois = PoiSet::austin_default();
  for (const auto& poi : kPois.pois()) {
    f[poi_column_name(poi.name)] = haversine_km(location, poi.point);
  }
  return f;
}

}  // namespace

std::map<std::string, double> GenConfig::default_coefficients() {
  return {
      {"bedrooms", 35.0},
      {"accommodates", 8.0},
      {"bathrooms", 20.0},
      {"host_is_superhost", 12.0},
      {"review_scores_rating", 25.0},
      {"room_type_Private room", -55.0},
      {"room_type_Shared room", -80.0},
      {"dist_congress_bridge_km", -4.0},
      {"Pool", 18.0},
  };
}

void GenConfig::validate() const {
  auto fail = [](const std::string& what) { throw ArgumentError("generator config: " + what); };
  if (n_listings < 1) fail("n_listings must be >= 1");
  if (end < start) fail("end date precedes start date");
  if (!(q1 > 0.0)) fail("q1 must be positive");
  if (!(q1 < weekday_median && weekday_median < q3_weekday)) {
    fail("need q1 < weekday_median < q3_weekday");
  }
  if (!(q1 < weekend_median && weekend_median < q3_weekend)) {
    fail("need q1 < weekend_median < q3_weekend");
  }
  if (!(peak_uplift >= 0.0)) fail("peak_uplift must be >= 0");
  if (!(noise_std >= 0.0)) fail("noise_std must be >= 0");
  if (!(radial_scale_km > 0.0)) fail("radial_scale_km must be > 0");
  for (int m : peak_months) {
    if (m < 1 || m > 12) fail("peak month " + std::to_string(m) + " out of range");
  }
  for (double frac : {outlier_fraction, missing_fraction, duplicate_fraction, non_english_fraction}) {
    if (!(frac >= 0.0 && frac < 1.0)) fail("fractions must be in [0, 1)");
  }
  if (!(positive_review_share >= 0.0 && positive_review_share <= 1.0)) {
    fail("positive_review_share must be in [0, 1]");
  }
  if (max_reviews_per_listing < 0) fail("max_reviews_per_listing must be >= 0");
  if (!center.valid()) fail("center coordinates invalid");
  if (gap && gap->end < gap->start) fail("gap end precedes gap start");
}

GenConfig gen_config_from_json(const nlohmann::json& j, GenConfig cfg) {
  if (!j.is_object()) throw ArgumentError("generator config must be a JSON object");
  auto date = [](const nlohmann::json& v, const char* key) {
    const auto d = Date::parse(v.get<std::string>());
    if (!d) throw ArgumentError(std::string("generator config: bad date for '") + key + "'");
    return *d;
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_listings") cfg.n_listings = v.get<int>();
      else if (key == "start") cfg.start = date(v, "start");
      else if (key == "end") cfg.end = date(v, "end");
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "weekday_median") cfg.weekday_median = v.get<double>();
      else if (key == "weekend_median") cfg.weekend_median = v.get<double>();
      else if (key == "q1") cfg.q1 = v.get<double>();
      else if (key == "q3_weekday") cfg.q3_weekday = v.get<double>();
      else if (key == "q3_weekend") cfg.q3_weekend = v.get<double>();
      else if (key == "peak_months") cfg.peak_months = v.get<std::vector<int>>();
      else if (key == "peak_uplift") cfg.peak_uplift = v.get<double>();
      else if (key == "noise_std") cfg.noise_std = v.get<double>();
      else if (key == "true_coefficients") cfg.true_coefficients = v.get<std::map<std::string, double>>();
      else if (key == "interaction") cfg.interaction = v.get<double>();
      else if (key == "radial_premium") cfg.radial_premium = v.get<double>();
      else if (key == "radial_scale_km") cfg.radial_scale_km = v.get<double>();
      else if (key == "center") cfg.center = {v.at(0).get<double>(), v.at(1).get<double>()};
      else if (key == "outlier_fraction") cfg.outlier_fraction = v.get<double>();
      else if (key == "missing_fraction") cfg.missing_fraction = v.get<double>();
      else if (key == "duplicate_fraction") cfg.duplicate_fraction = v.get<double>();
      else if (key == "gap") {
        if (v.is_null()) {
          cfg.gap.reset();
        } else {
          cfg.gap = GapSpec{date(v.at("start"), "gap.start"), date(v.at("end"), "gap.end")};
        }
      } else if (key == "max_reviews_per_listing") cfg.max_reviews_per_listing = v.get<int>();
      else if (key == "positive_review_share") cfg.positive_review_share = v.get<double>();
      else if (key == "non_english_fraction") cfg.non_english_fraction = v.get<double>();
      else throw ArgumentError("generator config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("generator config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const GenConfig& cfg) {
  nlohmann::json j{{"n_listings", cfg.n_listings},
                   {"start", cfg.start.to_string()},
                   {"end", cfg.end.to_string()},
                   {"seed", cfg.seed},
                   {"weekday_median", cfg.weekday_median},
                   {"weekend_median", cfg.weekend_median},
                   {"q1", cfg.q1},
                   {"q3_weekday", cfg.q3_weekday},
                   {"q3_weekend", cfg.q3_weekend},
                   {"peak_months", cfg.peak_months},
                   {"peak_uplift", cfg.peak_uplift},
                   {"noise_std", cfg.noise_std},
                   {"true_coefficients", cfg.true_coefficients},
                   {"interaction", cfg.interaction},
                   {"radial_premium", cfg.radial_premium},
                   {"radial_scale_km", cfg.radial_scale_km},
                   {"center", {cfg.center.lat, cfg.center.lon}},
                   {"outlier_fraction", cfg.outlier_fraction},
                   {"missing_fraction", cfg.missing_fraction},
                   {"duplicate_fraction", cfg.duplicate_fraction},
                   {"max_reviews_per_listing", cfg.max_reviews_per_listing},
                   {"positive_review_share", cfg.positive_review_share},
                   {"non_english_fraction", cfg.non_english_fraction}};
  if (cfg.gap) {
    j["gap"] = {{"start", cfg.gap->start.to_string()}, {"end", cfg.gap->end.to_string()}};
  }
  return j;
}

double ground_truth(const GenConfig& cfg, const GroundTruth& truth, const ListingTruth& listing,
                    Date date) {
  double price = is_weekend(date) ? cfg.weekend_median : cfg.weekday_median;
  if (std::find(cfg.peak_months.begin(), cfg.peak_months.end(), date.month) !=
      cfg.peak_months.end()) {
    price *= 1.0 + cfg.peak_uplift;
  }
  for (const auto& [name, coef] : cfg.true_coefficients) {
    price += coef * (listing.features.at(name) - truth.feature_means.at(name));
  }
  const double proximity = std::exp(-listing.center_km / cfg.radial_scale_km);
  price += cfg.interaction * listing.bedrooms * proximity + cfg.radial_premium * proximity;
  return price;
}

double ground_truth(const GenConfig& cfg, const GroundTruth& truth, std::int64_t listing_id,
                    Date date) {
  for (const auto& l : truth.listings) {
    if (l.id == listing_id) return ground_truth(cfg, truth, l, date);
  }
  throw ArgumentError("ground_truth: unknown listing " + std::to_string(listing_id));
}

GeneratedData generate(const GenConfig& cfg) {
  cfg.validate();
  GeneratedData out;
  GroundTruth& truth = out.truth;
  const auto n = static_cast<std::size_t>(cfg.n_listings);

  // Listings.
  Rng rng(derive_seed(cfg.seed, 1));
  Cells<std::int64_t> id, host_id, accommodates, bedrooms, beds, min_nights, max_nights,
      availability, n_reviews, host_listings;
  Cells<double> lat, lon, bathrooms, rating;
  Cells<bool> superhost, instant;
  Cells<std::string> room_type, property_type, amenities_text, neighbourhood, listing_price;
  Cells<Date> host_since;
  std::vector<std::map<std::string, double>> all_features;
  const std::size_t n_hosts = std::max<std::size_t>(1, (n * 2) / 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto lid = static_cast<std::int64_t>(1000 + i);
    const auto hid = static_cast<std::int64_t>(500 + uniform_index(rng, n_hosts));
    // Listings cluster around the center with a long tail outward.
    const double radius = std::min(20.0, -2.5 * std::log(1.0 - uniform_unit(rng)));
    const double angle = uniform(rng, 0.0, 6.283185307179586);
    const double dlat = radius * std::cos(angle) / 111.195;
    const double dlon = radius * std::sin(angle) /
                        (111.195 * std::cos(cfg.center.lat * 3.141592653589793 / 180.0));
    const GeoPoint loc{cfg.center.lat + dlat, cfg.center.lon + dlon};

    const double u_room = uniform_unit(rng);
    const std::string rt = u_room < 0.72 ? kRoomTypes[0] : (u_room < 0.95 ? kRoomTypes[1] : kRoomTypes[2]);
    const std::int64_t n_bed =
        rt == kRoomTypes[0] ? 1 + static_cast<std::int64_t>(uniform_index(rng, 5)) : 1;
    const std::int64_t n_beds = n_bed + static_cast<std::int64_t>(uniform_index(rng, 2));
    const std::int64_t n_acc = 2 * n_bed + static_cast<std::int64_t>(uniform_index(rng, 3));
    const double n_bath = 1.0 + 0.5 * static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(n_bed + 1)));
    const bool is_super = bernoulli(rng, 0.3);
    const double score = std::round(uniform(rng, 3.5, 5.0) * 100.0) / 100.0;
    const auto reviews_count = static_cast<std::int64_t>(uniform_index(rng, 300));
    const std::array<std::int64_t, 5> nights{1, 2, 3, 7, 30};
    const std::int64_t min_n = nights[uniform_index(rng, nights.size())];
    const bool is_instant = bernoulli(rng, 0.5);

    std::vector<std::string> amen;
    for (std::size_t a = 0; a < kAmenityPool.size(); ++a) {
      const double p = 0.95 - 0.85 * static_cast<double>(a) / static_cast<double>(kAmenityPool.size() - 1);
      if (bernoulli(rng, p)) amen.emplace_back(kAmenityPool[a]);
    }
    nlohmann::json amen_json = amen;

    id.emplace_back(lid);
    host_id.emplace_back(hid);
    lat.emplace_back(loc.lat);
    lon.emplace_back(loc.lon);
    room_type.emplace_back(rt);
    property_type.emplace_back(rt == kRoomTypes[0] ? (n_bed >= 3 ? "Entire home" : "Entire rental unit")
                                                   : "Private room in home");
    bedrooms.emplace_back(n_bed);
    beds.emplace_back(n_beds);
    accommodates.emplace_back(n_acc);
    bathrooms.emplace_back(n_bath);
    superhost.emplace_back(is_super);
    rating.emplace_back(score);
    n_reviews.emplace_back(reviews_count);
    min_nights.emplace_back(min_n);
    max_nights.emplace_back(365);
    availability.emplace_back(static_cast<std::int64_t>(uniform_index(rng, 366)));
    instant.emplace_back(is_instant);
    amenities_text.emplace_back(amen_json.dump());
    neighbourhood.emplace_back("787" + std::to_string(1 + uniform_index(rng, 50)));
    host_since.emplace_back(Date{2010, 1, 1}.plus_days(static_cast<std::int64_t>(uniform_index(rng, 4000))));
    host_listings.emplace_back(1);

    const std::map<std::string, double> values{
        {"bedrooms", static_cast<double>(n_bed)},
        {"beds", static_cast<double>(n_beds)},
        {"accommodates", static_cast<double>(n_acc)},
        {"bathrooms", n_bath},
        {"host_is_superhost", is_super ? 1.0 : 0.0},
        {"review_scores_rating", score},
        {"number_of_reviews", static_cast<double>(reviews_count)},
        {"minimum_nights", static_cast<double>(min_n)},
        {"instant_bookable", is_instant ? 1.0 : 0.0},
        {"latitude", loc.lat},
        {"longitude", loc.lon},
    };
    all_features.push_back(candidate_features(values, rt, amen, loc));

    ListingTruth lt;
    lt.id = lid;
    lt.bedrooms = static_cast<double>(n_bed);
    lt.center_km = haversine_km(loc, cfg.center);
    truth.listings.push_back(std::move(lt));
  }
  // Host listing counts.
  std::map<std::int64_t, std::int64_t> per_host;
  for (const auto& h : host_id) ++per_host[*h];
  for (std::size_t i = 0; i < n; ++i) host_listings[i] = per_host[*host_id[i]];

  for (const auto& [name, coef] : cfg.true_coefficients) {
    if (!all_features.front().count(name)) {
      throw ArgumentError("generator config: no generated feature named '" + name + "'");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      truth.listings[i].features[name] = all_features[i].at(name);
      sum += all_features[i].at(name);
    }
    truth.feature_means[name] = sum / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    listing_price.emplace_back(money(ground_truth(cfg, truth, truth.listings[i], cfg.start)));
  }

  // Calendar.
  Rng cal_rng(derive_seed(cfg.seed, 2));
  const std::int64_t n_days = cfg.end.to_days() - cfg.start.to_days() + 1;
  std::vector<std::int64_t> c_listing;
  std::vector<Date> c_date;
  std::vector<double> c_price;
  std::vector<bool> c_available;
  std::vector<std::int64_t> c_min;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::int64_t d = 0; d < n_days; ++d) {
      const Date date = cfg.start.plus_days(d);
      const double noise = cfg.noise_std > 0.0 ? cfg.noise_std * standard_normal(cal_rng) : 0.0;
      const bool available = bernoulli(cal_rng, 0.6);
      if (cfg.gap && date >= cfg.gap->start && date <= cfg.gap->end) continue;
      c_listing.push_back(truth.listings[i].id);
      c_date.push_back(date);
      c_price.push_back(ground_truth(cfg, truth, truth.listings[i], date) + noise);
      c_available.push_back(available);
      c_min.push_back(*min_nights[i]);
    }
  }
  const std::size_t n_cal = c_price.size();

  Rng quality(derive_seed(cfg.seed, 4));
  std::vector<char> missing(n_cal, 0);
  if (cfg.missing_fraction > 0.0) {
    for (std::size_t r = 0; r < n_cal; ++r) missing[r] = bernoulli(quality, cfg.missing_fraction);
  }
  if (cfg.outlier_fraction > 0.0 && n_cal > 0) {
    std::vector<double> clean;
    for (std::size_t r = 0; r < n_cal; ++r) {
      if (!missing[r]) clean.push_back(c_price[r]);
    }
    if (!clean.empty()) {
      const double q1 = quantile(clean, 0.25);
      const double q3 = quantile(clean, 0.75);
      const double top = std::max(q3, cfg.q3_weekend);
      const double spread = std::max(q3 - q1, cfg.q3_weekend - cfg.q1);
      const auto n_out = static_cast<std::size_t>(std::llround(cfg.outlier_fraction * static_cast<double>(n_cal)));
      const auto order = random_permutation(n_cal, quality);
      std::size_t planted = 0;
      for (std::size_t k = 0; k < order.size() && planted < n_out; ++k) {
        const std::size_t r = order[k];
        if (missing[r]) continue;
        c_price[r] = top + uniform(quality, 8.0, 15.0) * spread;
        truth.outliers.emplace_back(c_listing[r], c_date[r]);
        ++planted;
      }
      std::sort(truth.outliers.begin(), truth.outliers.end());
    }
  }
  std::vector<std::size_t> rows(n_cal);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (cfg.duplicate_fraction > 0.0) {
    const auto n_dup = static_cast<std::size_t>(std::llround(cfg.duplicate_fraction * static_cast<double>(n_cal)));
    for (std::size_t k = 0; k < n_dup; ++k) rows.push_back(uniform_index(quality, n_cal));
  }
  {
    Cells<std::int64_t> lid, mn, mx;
    Cells<Date> dt;
    Cells<bool> av;
    Cells<std::string> pr, adj;
    for (std::size_t r : rows) {
      lid.emplace_back(c_listing[r]);
      dt.emplace_back(c_date[r]);
      av.emplace_back(static_cast<bool>(c_available[r]));
      if (missing[r]) {
        pr.emplace_back(std::nullopt);
        adj.emplace_back(std::nullopt);
      } else {
        pr.emplace_back(money(c_price[r]));
        adj.emplace_back(money(c_price[r]));
      }
      mn.emplace_back(c_min[r]);
      mx.emplace_back(365);
    }
    truth.missing_prices = static_cast<std::size_t>(std::count(missing.begin(), missing.end(), 1));
    Table cal(rows.size());
    cal.add("listing_id", Column(std::move(lid)));
    cal.add("date", Column(std::move(dt)));
    cal.add("available", Column(std::move(av)));
    cal.add("price", Column(std::move(pr)));
    cal.add("adjusted_price", Column(std::move(adj)));
    cal.add("minimum_nights", Column(std::move(mn)));
    cal.add("maximum_nights", Column(std::move(mx)));
    out.calendar = std::move(cal);
  }

  // Missing listing cells (the ground truth keeps the real values).
  if (cfg.missing_fraction > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (bernoulli(quality, cfg.missing_fraction)) bedrooms[i].reset();
      if (bernoulli(quality, cfg.missing_fraction)) beds[i].reset();
      if (bernoulli(quality, cfg.missing_fraction)) bathrooms[i].reset();
      if (bernoulli(quality, cfg.missing_fraction)) rating[i].reset();
    }
  }
  Table listings(n);
  listings.add("id", Column(std::move(id)));
  listings.add("host_id", Column(std::move(host_id)));
  listings.add("host_since", Column(std::move(host_since)));
  listings.add("host_is_superhost", Column(std::move(superhost)));
  listings.add("host_listings_count", Column(std::move(host_listings)));
  listings.add("neighbourhood_cleansed", Column(std::move(neighbourhood)));
  listings.add("latitude", Column(std::move(lat)));
  listings.add("longitude", Column(std::move(lon)));
  listings.add("property_type", Column(std::move(property_type)));
  listings.add("room_type", Column(std::move(room_type)));
  listings.add("accommodates", Column(std::move(accommodates)));
  listings.add("bathrooms", Column(std::move(bathrooms)));
  listings.add("bedrooms", Column(std::move(bedrooms)));
  listings.add("beds", Column(std::move(beds)));
  listings.add("amenities", Column(std::move(amenities_text)));
  listings.add("price", Column(std::move(listing_price)));
  listings.add("minimum_nights", Column(std::move(min_nights)));
  listings.add("maximum_nights", Column(std::move(max_nights)));
  listings.add("availability_365", Column(std::move(availability)));
  listings.add("number_of_reviews", Column(std::move(n_reviews)));
  listings.add("review_scores_rating", Column(std::move(rating)));
  listings.add("instant_bookable", Column(std::move(instant)));
  out.listings = std::move(listings);

  // Reviews.
  Rng rev_rng(derive_seed(cfg.seed, 3));
  Cells<std::int64_t> r_listing, r_id, r_reviewer;
  Cells<Date> r_date;
  Cells<std::string> r_name, r_comments;
  std::int64_t next_review = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto count = uniform_index(rev_rng, static_cast<std::uint64_t>(cfg.max_reviews_per_listing) + 1);
    for (std::uint64_t k = 0; k < count; ++k) {
      std::string text;
      int sign = 0;
      if (bernoulli(rev_rng, cfg.non_english_fraction)) {
        text = kForeignTemplates[uniform_index(rev_rng, kForeignTemplates.size())];
      } else if (bernoulli(rev_rng, cfg.positive_review_share)) {
        text = kPositiveTemplates[uniform_index(rev_rng, kPositiveTemplates.size())];
        sign = 1;
      } else {
        text = kNegativeTemplates[uniform_index(rev_rng, kNegativeTemplates.size())];
        sign = -1;
      }
      r_listing.emplace_back(truth.listings[i].id);
      r_id.emplace_back(next_review++);
      r_date.emplace_back(cfg.start.plus_days(static_cast<std::int64_t>(
          uniform_index(rev_rng, static_cast<std::uint64_t>(n_days)))));
      r_reviewer.emplace_back(static_cast<std::int64_t>(10000 + uniform_index(rev_rng, 90000)));
      r_name.emplace_back(kFirstNames[uniform_index(rev_rng, kFirstNames.size())]);
      if (bernoulli(rev_rng, cfg.missing_fraction)) {
        r_comments.emplace_back(std::nullopt);
        sign = 0;
      } else {
        r_comments.emplace_back(text);
      }
      truth.review_sign.push_back(sign);
    }
  }
  Table reviews(r_id.size());
  reviews.add("listing_id", Column(std::move(r_listing)));
  reviews.add("id", Column(std::move(r_id)));
  reviews.add("date", Column(std::move(r_date)));
  reviews.add("reviewer_id", Column(std::move(r_reviewer)));
  reviews.add("reviewer_name", Column(std::move(r_name)));
  reviews.add("comments", Column(std::move(r_comments)));
  out.reviews = std::move(reviews);
  return out;
}

void write_generated(const GeneratedData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const Table& t, const char* name) {
    std::ostringstream os;
    write_csv(t, os);
    write_file_atomic(dir / name, os.str());
  };
  put(data.listings, "listings.csv");
  put(data.calendar, "calendar.csv");
  put(data.reviews, "reviews.csv");
}

SparseProblem generate_sparse_linear(int n, int p, int informative, double noise_std,
                                     std::uint64_t seed) {
  if (n < 2 || p < 1 || informative < 0 || informative > p) {
    throw ArgumentError("generate_sparse_linear: bad dimensions");
  }
  if (!(noise_std >= 0.0)) throw ArgumentError("generate_sparse_linear: noise_std must be >= 0");
  Rng rng(derive_seed(seed, 0x5a4e));
  SparseProblem out;
  FeatureMatrix& m = out.matrix;
  m.x.resize(n, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) m.x(r, c) = standard_normal(rng);
  }
  for (int c = 0; c < p; ++c) m.feature_names.push_back("x" + std::to_string(c));
  out.coefficients.assign(static_cast<std::size_t>(p), 0.0);
  const auto order = random_permutation(static_cast<std::size_t>(p), rng);
  constexpr std::array<double, 4> kMagnitudes{3.0, 2.0, 1.5, 1.0};
  std::vector<std::size_t> chosen(order.begin(), order.begin() + informative);
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const double sign = bernoulli(rng, 0.5) ? 1.0 : -1.0;
    out.coefficients[chosen[k]] = sign * kMagnitudes[k % kMagnitudes.size()];
    out.informative.push_back(m.feature_names[chosen[k]]);
  }
  const Eigen::Map<const Eigen::VectorXd> beta(out.coefficients.data(), p);
  m.y = m.x * beta;
  for (Eigen::Index r = 0; r < n; ++r) m.y(r) += noise_std * standard_normal(rng);
  return out;
}

}  // namespace rentlab
