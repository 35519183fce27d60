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

#ifndef KXFER_SYNTHETIC_HPP_
#define KXFER_SYNTHETIC_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "kxfer/kmeans.hpp"
#include "kxfer/library.hpp"

// Seeded generators for benchmark libraries and queries. Everything is
// driven by SplitMix64 so results do not depend on the standard library.

namespace kxfer::synthetic {

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = rng_.uniform();
    while (u1 <= 0.0) u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  SplitMix64& rng() { return rng_; }

 private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Wraps raw vectors as a library with placeholder provenance: one image
/// named `image_name`, every record at the origin of a window-sized map.
inline KnowledgeLibrary library_from_vectors(std::string name, std::vector<float> vectors,
                                             std::size_t channels, const PatchSpec& spec,
                                             std::string image_name = "synthetic") {
  const std::size_t n = vectors.size() / spec.dimension(channels);
  std::vector<Provenance> prov(
      n, Provenance{0, 0, 0, static_cast<std::uint32_t>(spec.window_h),
                    static_cast<std::uint32_t>(spec.window_w)});
  return KnowledgeLibrary(std::move(name), spec, channels, std::move(vectors), std::move(prov),
                          {std::move(image_name)}, kNoMerging);
}

/// n i.i.d. standard normal vectors of length dim.
inline std::vector<float> gaussian_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Gaussian g(seed);
  std::vector<float> out(n * dim);
  for (float& v : out) v = static_cast<float>(g());
  return out;
}

inline KnowledgeLibrary random_library(std::size_t n, std::size_t channels, std::uint64_t seed,
                                       const PatchSpec& spec = {2, 2, 2}) {
  return library_from_vectors("random", gaussian_vectors(n, spec.dimension(channels), seed),
                              channels, spec);
}

struct ClusteredSet {
  KnowledgeLibrary library;
  std::vector<std::uint32_t> cluster_of;  // per record
};

/// Unit vectors grouped around `clusters` random directions. Every member
/// lies within half of acos(min_pair_ncc) of its centre, so any two
/// members of one cluster have ncc above min_pair_ncc.
inline ClusteredSet clustered_library(std::size_t n, std::size_t clusters, std::size_t channels,
                                      std::uint64_t seed, double min_pair_ncc = 0.99,
                                      const PatchSpec& spec = {2, 2, 2}) {
  const std::size_t dim = spec.dimension(channels);
  Gaussian g(seed);
  std::vector<double> centres(clusters * dim);
  for (std::size_t c = 0; c < clusters; ++c) {
    double len = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      centres[c * dim + k] = g();
      len += centres[c * dim + k] * centres[c * dim + k];
    }
    len = std::sqrt(len);
    for (std::size_t k = 0; k < dim; ++k) centres[c * dim + k] /= len;
  }
  const double max_angle = std::acos(min_pair_ncc) / 2.0;
  const double min_centre_ncc = std::cos(max_angle);
  // typical member angle about 0.6 * max_angle
  const double sigma = 0.6 * max_angle / std::sqrt(static_cast<double>(dim - 1));
  std::vector<float> vectors(n * dim);
  std::vector<std::uint32_t> cluster_of(n);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % clusters;
    cluster_of[i] = static_cast<std::uint32_t>(c);
    while (true) {
      double len = 0.0;
      double along = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        v[k] = centres[c * dim + k] + sigma * g();
        len += v[k] * v[k];
        along += v[k] * centres[c * dim + k];
      }
      len = std::sqrt(len);
      if (along / len >= min_centre_ncc + 1e-9) {
        for (std::size_t k = 0; k < dim; ++k) vectors[i * dim + k] = static_cast<float>(v[k] / len);
        break;
      }
    }
  }
  return {library_from_vectors("clustered", std::move(vectors), channels, spec),
          std::move(cluster_of)};
}

/// Queries near library members: a uniformly chosen member (unit
/// normalised) plus isotropic noise of about `noise_angle` radians.
inline std::vector<float> perturbed_queries(const KnowledgeLibrary& lib, std::size_t count,
                                            double noise_angle, std::uint64_t seed) {
  const std::size_t dim = lib.dimension();
  Gaussian g(seed);
  std::vector<float> out(count * dim);
  const double sigma = noise_angle / std::sqrt(static_cast<double>(dim));
  for (std::size_t q = 0; q < count; ++q) {
    const auto v = lib.vector(g.rng().below(lib.size()));
    double len = 0.0;
    for (float x : v) len += static_cast<double>(x) * x;
    len = std::sqrt(len);
    if (len < kZeroNorm) len = 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
      out[q * dim + k] = static_cast<float>(v[k] / len + sigma * g());
    }
  }
  return out;
}

}  // namespace kxfer::synthetic

#endif  // KXFER_SYNTHETIC_HPP_
