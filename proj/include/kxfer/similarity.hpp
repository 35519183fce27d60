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

#ifndef KXFER_SIMILARITY_HPP_
#define KXFER_SIMILARITY_HPP_

#include <cmath>
#include <span>
#include <string>

#include "kxfer/error.hpp"

namespace kxfer {

/// Vectors whose Euclidean norm falls below this are treated as zero.
inline constexpr double kZeroNorm = 1e-12;

/// <a, b> / (|a| |b|), accumulated in double. No mean removal. A zero-norm
/// operand yields 0 against everything.
template <typename T, typename U>
double ncc(std::span<const T> a, std::span<const U> b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kDimension, "ncc length mismatch: " +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
  }
  if (a.empty()) fail(ErrorKind::kDimension, "ncc of empty vectors");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  const double norm_a = std::sqrt(na);
  const double norm_b = std::sqrt(nb);
  if (norm_a < kZeroNorm || norm_b < kZeroNorm) return 0.0;
  return dot / (norm_a * norm_b);
}

inline double ncc(std::span<const float> a, std::span<const float> b) {
  return ncc<float, float>(a, b);
}

/// 1 - ncc, in [0, 2].
template <typename T, typename U>
double ncc_distance(std::span<const T> a, std::span<const U> b) {
  return 1.0 - ncc<T, U>(a, b);
}

inline double ncc_distance(std::span<const float> a, std::span<const float> b) {
  return ncc_distance<float, float>(a, b);
}

template <typename T>
double dot(std::span<const T> a, std::span<const T> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

template <typename T>
double norm(std::span<const T> a) {
  return std::sqrt(dot<T>(a, a));
}

}  // namespace kxfer

#endif  // KXFER_SIMILARITY_HPP_
