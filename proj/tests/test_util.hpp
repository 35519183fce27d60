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

// Shared helpers for the unit tests: deterministic generators and small
// independent reference implementations.

#ifndef KXFER_TESTS_TEST_UTIL_HPP_
#define KXFER_TESTS_TEST_UTIL_HPP_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kxfer/kxfer.hpp"

namespace kxfer::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed), normal_(seed ^ 0xabcdefULL) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * rng_.uniform(); }
  std::size_t below(std::size_t n) { return rng_.below(n); }
  double normal() { return normal_(); }

  std::vector<float> normals(std::size_t n) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(normal());
    return v;
  }
  std::vector<float> uniforms(std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(uniform(lo, hi));
    return v;
  }
  FeatureMap noise_map(std::size_t c, std::size_t h, std::size_t w) {
    return FeatureMap(c, h, w, uniforms(c * h * w));
  }

 private:
  SplitMix64 rng_;
  synthetic::Gaussian normal_;
};

// Smooth procedural image in [0, 1]: a few sinusoids per channel.
inline FeatureMap procedural_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Gen g(seed);
  FeatureMap m(3, h, w);
  for (std::size_t c = 0; c < 3; ++c) {
    const double fx = g.uniform(0.05, 0.4), fy = g.uniform(0.05, 0.4);
    const double px = g.uniform(0, 6.28), py = g.uniform(0, 6.28);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double v = 0.5 + 0.25 * std::sin(fx * x + px) + 0.2 * std::cos(fy * y + py) +
                         0.05 * g.uniform(-1, 1);
        m.at(c, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return m;
}

// Plain cosine in double, written independently of kxfer::ncc.
inline double ref_cosine(const float* a, const float* b, std::size_t n) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return ab / (na * nb);
}

// Quadratic de-redundancy oracle: patch i survives iff no earlier survivor
// has cosine > tau with it.
inline std::vector<std::size_t> ref_deredundancy(const std::vector<float>& v, std::size_t dim,
                                                 double tau) {
  const std::size_t n = v.size() / dim;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    bool redundant = false;
    for (std::size_t j : kept) {
      if (ref_cosine(&v[i * dim], &v[j * dim], dim) > tau) {
        redundant = true;
        break;
      }
    }
    if (!redundant) kept.push_back(i);
  }
  return kept;
}

// All windows of all maps in scan order, concatenated.
inline std::vector<float> all_patches(const std::vector<LabeledMap>& maps, const PatchSpec& spec) {
  std::vector<float> out;
  for (const auto& m : maps) {
    for (const auto& p : extract_patches(m.map, spec)) {
      out.insert(out.end(), p.vector.begin(), p.vector.end());
    }
  }
  return out;
}

inline double psnr(const FeatureMap& a, const FeatureMap& b, double peak = 1.0) {
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a.data()[i]) - b.data()[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.size());
  return mse == 0.0 ? INFINITY : 10.0 * std::log10(peak * peak / mse);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("kxfer_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace kxfer::testing

#endif  // KXFER_TESTS_TEST_UTIL_HPP_
