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

#ifndef RENTLAB_COMMON_HPP_
#define RENTLAB_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rentlab {

// Error hierarchy. Every failure raised by the library derives from Error so
// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or mis-typed column, unknown key.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Operation requires at least one (non-missing) value.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class TypeError : public Error {
 public:
  using Error::Error;
};

// Remaining missing cells when building a design matrix.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

// Singular normal equations.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

// Metric undefined for the given input (e.g. R² on constant targets).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// SplitMix64 finalizer. Used to derive independent seeds for per-tree,
// per-trial and per-instance random streams from one user seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

// Uniform integer in [0, n). Written out instead of using
// std::uniform_int_distribution so streams are identical across standard
// library implementations.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal variate by the Box-Muller transform (one of the pair).
inline double standard_normal(Rng& rng) {
  double u1 = uniform_unit(rng);
  while (u1 <= 0.0) u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Fisher-Yates shuffle of 0..n-1.
inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

// Worker count from RENTLAB_THREADS; defaults to hardware concurrency.
// Results never depend on this value.
int thread_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers (0: thread_count()).
// The first exception is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace rentlab

#endif  // RENTLAB_COMMON_HPP_
