// Copyright 2026 The kxfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KXFER_KMEANS_HPP_
#define KXFER_KMEANS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "kxfer/error.hpp"

namespace kxfer {

/// splitmix64. Used instead of <random> distributions so that index files
/// are identical across standard library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return SplitMix64(seed ^ (salt * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL)).next();
}

struct KMeansParams {
  std::size_t k = 16;
  std::size_t max_iters = 25;
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<float> centroids;  // k x dim
  std::vector<std::uint32_t> assignment;
  std::size_t k = 0;
  std::size_t iterations = 0;
  /// Clustering objective after every assignment step: the summed
  /// similarity (spherical) or negated squared error (Euclidean).
  std::vector<double> potential;
};

namespace detail {

inline double dot_fd(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

inline double sq_dist(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return acc;
}

/// k-means++ seeding. `gap(i, c)` is the distance from point i to the
/// centroid row c; seeding probability is proportional to squared gap.
template <typename Gap, typename Eligible>
std::vector<std::size_t> plus_plus_seeds(std::size_t n, std::size_t k, SplitMix64& rng,
                                         Gap gap, Eligible eligible) {
  std::vector<std::size_t> seeds;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (eligible(i)) pool.push_back(i);
  }
  if (pool.empty()) return seeds;
  seeds.push_back(pool[rng.below(pool.size())]);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < k) {
    double total = 0.0;
    for (std::size_t i : pool) {
      nearest[i] = std::min(nearest[i], gap(i, seeds.back()));
      total += nearest[i] * nearest[i];
    }
    std::size_t pick = pool.front();
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (std::size_t i : pool) {
        pick = i;
        r -= nearest[i] * nearest[i];
        if (r < 0.0 && nearest[i] > 0.0) break;
      }
      // r may stay >= 0 through rounding; fall back to the last positive weight
      if (nearest[pick] == 0.0) {
        for (auto it = pool.rbegin(); it != pool.rend(); ++it) {
          if (nearest[*it] > 0.0) { pick = *it; break; }
        }
      }
    } else {
      // every point already coincides with a seed
      break;
    }
    seeds.push_back(pick);
  }
  return seeds;
}

}  // namespace detail

/// Spherical k-means under cosine similarity. Assignment maximises the
/// cosine to a centroid (ties to the lower index); the centroid update is
/// the normalised mean of the assigned unit vectors. Zero vectors score 0
/// against every centroid.
///
/// `data` is row-major n x dim. Centroids are unit vectors.
inline KMeansResult spherical_kmeans(std::span<const float> data, std::size_t dim,
                                     const KMeansParams& params) {
  if (dim == 0) fail(ErrorKind::kDimension, "k-means dimension is zero");
  const std::size_t n = data.size() / dim;
  if (n == 0) fail(ErrorKind::kEmptyLibrary, "k-means on zero points");
  const std::size_t k = std::max<std::size_t>(1, std::min(params.k, n));

  std::vector<float> unit(n * dim, 0.0f);
  std::vector<bool> nonzero(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const float* x = &data[i * dim];
    const double len = std::sqrt(detail::dot_fd(x, x, dim));
    if (len < 1e-12) continue;
    nonzero[i] = true;
    for (std::size_t d = 0; d < dim; ++d) unit[i * dim + d] = static_cast<float>(x[d] / len);
  }

  SplitMix64 rng(params.seed);
  KMeansResult res;
  res.k = k;
  res.centroids.assign(k * dim, 0.0f);
  const auto seeds = detail::plus_plus_seeds(
      n, k, rng,
      [&](std::size_t i, std::size_t s) {
        return 1.0 - detail::dot_fd(&unit[i * dim], &unit[s * dim], dim);
      },
      [&](std::size_t i) { return static_cast<bool>(nonzero[i]); });
  for (std::size_t j = 0; j < k; ++j) {
    if (j < seeds.size()) {
      std::copy_n(&unit[seeds[j] * dim], dim, &res.centroids[j * dim]);
    } else {
      // fewer distinct directions than clusters: spare centroids stay
      // unused basis vectors until a re-seed claims them
      res.centroids[j * dim + (j % dim)] = 1.0f;
    }
  }

  res.assignment.assign(n, 0);
  std::vector<double> score(n, 0.0);
  auto assign = [&] {
    double potential = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_s = -std::numeric_limits<double>::infinity();
      if (nonzero[i]) {
        for (std::size_t j = 0; j < k; ++j) {
          const double s = detail::dot_fd(&unit[i * dim], &res.centroids[j * dim], dim);
          if (s > best_s) { best_s = s; best = static_cast<std::uint32_t>(j); }
        }
      } else {
        best_s = 0.0;
      }
      res.assignment[i] = best;
      score[i] = best_s;
      potential += best_s;
    }
    res.potential.push_back(potential);
  };

  assign();
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  std::vector<bool> taken(n);
  for (std::size_t it = 0; it < params.max_iters; ++it) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = res.assignment[i];
      ++counts[j];
      for (std::size_t d = 0; d < dim; ++d) sums[j * dim + d] += unit[i * dim + d];
    }
    std::fill(taken.begin(), taken.end(), false);
    // Worst-served point not yet used for a re-seed; restricted to one
    // cluster when `cluster` is given.
    auto worst_point = [&](std::ptrdiff_t cluster) {
      std::size_t pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!nonzero[i] || taken[i]) continue;
        if (cluster >= 0 && res.assignment[i] != static_cast<std::uint32_t>(cluster)) continue;
        if (pick == n || score[i] < score[pick]) pick = i;
      }
      return pick;
    };
    double movement = 0.0;
    std::vector<float> next(res.centroids);
    for (std::size_t j = 0; j < k; ++j) {
      double len = 0.0;
      for (std::size_t d = 0; d < dim; ++d) len += sums[j * dim + d] * sums[j * dim + d];
      len = std::sqrt(len);
      std::size_t reseed = n;
      if (counts[j] == 0) {
        reseed = worst_point(-1);
      } else if (len < 1e-12) {
        reseed = worst_point(static_cast<std::ptrdiff_t>(j));
      } else {
        for (std::size_t d = 0; d < dim; ++d) {
          next[j * dim + d] = static_cast<float>(sums[j * dim + d] / len);
        }
      }
      if (reseed != n) {
        taken[reseed] = true;
        std::copy_n(&unit[reseed * dim], dim, &next[j * dim]);
      }
      movement = std::max(movement,
                          1.0 - detail::dot_fd(&res.centroids[j * dim], &next[j * dim], dim));
    }
    res.centroids = std::move(next);
    res.iterations = it + 1;
    assign();
    if (movement < params.tol) break;
  }
  return res;
}

/// Lloyd's k-means under squared Euclidean distance with k-means++ seeds.
/// Empty clusters are re-seeded with the point farthest from its centroid.
inline KMeansResult euclidean_kmeans(std::span<const float> data, std::size_t dim,
                                     const KMeansParams& params) {
  if (dim == 0) fail(ErrorKind::kDimension, "k-means dimension is zero");
  const std::size_t n = data.size() / dim;
  if (n == 0) fail(ErrorKind::kEmptyLibrary, "k-means on zero points");
  const std::size_t k = std::max<std::size_t>(1, std::min(params.k, n));
  SplitMix64 rng(params.seed);
  KMeansResult res;
  res.k = k;
  res.centroids.assign(k * dim, 0.0f);
  const auto seeds = detail::plus_plus_seeds(
      n, k, rng,
      [&](std::size_t i, std::size_t s) {
        return std::sqrt(detail::sq_dist(&data[i * dim], &data[s * dim], dim));
      },
      [](std::size_t) { return true; });
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    std::copy_n(&data[seeds[j] * dim], dim, &res.centroids[j * dim]);
  }
  for (std::size_t j = seeds.size(); j < k; ++j) {
    std::copy_n(&data[seeds.front() * dim], dim, &res.centroids[j * dim]);
  }

  res.assignment.assign(n, 0);
  std::vector<double> err(n, 0.0);
  auto assign = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = detail::sq_dist(&data[i * dim], &res.centroids[j * dim], dim);
        if (d < best_d) { best_d = d; best = static_cast<std::uint32_t>(j); }
      }
      res.assignment[i] = best;
      err[i] = best_d;
      total += best_d;
    }
    res.potential.push_back(-total);
  };

  assign();
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  std::vector<bool> taken(n);
  for (std::size_t it = 0; it < params.max_iters; ++it) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = res.assignment[i];
      ++counts[j];
      for (std::size_t d = 0; d < dim; ++d) sums[j * dim + d] += data[i * dim + d];
    }
    std::fill(taken.begin(), taken.end(), false);
    double movement = 0.0;
    std::vector<float> next(res.centroids);
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (!taken[i] && err[i] > 0.0 && (pick == n || err[i] > err[pick])) pick = i;
        }
        if (pick == n) continue;
        taken[pick] = true;
        std::copy_n(&data[pick * dim], dim, &next[j * dim]);
      } else {
        for (std::size_t d = 0; d < dim; ++d) {
          next[j * dim + d] = static_cast<float>(sums[j * dim + d] / counts[j]);
        }
      }
      movement = std::max(movement,
                          detail::sq_dist(&res.centroids[j * dim], &next[j * dim], dim));
    }
    res.centroids = std::move(next);
    res.iterations = it + 1;
    assign();
    if (movement < params.tol) break;
  }
  return res;
}

}  // namespace kxfer

#endif  // KXFER_KMEANS_HPP_
