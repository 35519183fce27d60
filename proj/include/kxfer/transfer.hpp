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

#ifndef KXFER_TRANSFER_HPP_
#define KXFER_TRANSFER_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kxfer/bhkm.hpp"
#include "kxfer/error.hpp"
#include "kxfer/library.hpp"
#include "kxfer/match.hpp"
#include "kxfer/parallel.hpp"
#include "kxfer/tensor.hpp"

namespace kxfer {

enum class SwapMode : std::uint8_t { kGeometric = 0, kStatistics = 1 };

/// Pooled statistics treat the whole patch as one vector; per-channel
/// statistics normalise each channel's window separately.
enum class StatsScope : std::uint8_t { kPooled = 0, kPerChannel = 1 };

inline const char* to_string(SwapMode mode) {
  return mode == SwapMode::kGeometric ? "geometric" : "statistics";
}

inline SwapMode parse_swap_mode(const std::string& s) {
  if (s == "geometric") return SwapMode::kGeometric;
  if (s == "statistics") return SwapMode::kStatistics;
  fail(ErrorKind::kParameter, "unknown swap mode '" + s + "'");
}

struct TransferOptions {
  SwapMode mode = SwapMode::kGeometric;
  /// Window must equal the library window; stride is free.
  PatchSpec query_spec{2, 2, 1};
  double epsilon = 1e-5;
  StatsScope stats_scope = StatsScope::kPooled;
  QueryParams query{};
  std::size_t threads = 1;
  /// Keep the swapped patch stream (pre-blend) in the result.
  bool keep_patches = false;
};

struct TranslationResult {
  FeatureMap output;
  /// One per query patch, scan order; query_index is the position.
  std::vector<MatchResult> matches;
  std::vector<std::array<std::uint32_t, 2>> query_origins;  // (y, x)
  SwapMode mode = SwapMode::kGeometric;
  std::vector<Patch> swapped;
};

inline Patch geometric_swap(const Patch& src, std::span<const float> tgt) {
  if (src.vector.size() != tgt.size()) {
    fail(ErrorKind::kDimension, "swap length mismatch: " + std::to_string(src.vector.size()) +
                                    " vs " + std::to_string(tgt.size()));
  }
  return Patch{std::vector<float>(tgt.begin(), tgt.end()), src.origin_y, src.origin_x};
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

template <typename T>
Moments moments(std::span<const T> v) {
  Moments m;
  if (v.empty()) return m;
  for (T x : v) m.mean += static_cast<double>(x);
  m.mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (T x : v) {
    const double d = static_cast<double>(x) - m.mean;
    var += d * d;
  }
  m.stddev = std::sqrt(var / static_cast<double>(v.size()));
  return m;
}

namespace detail {

inline void renormalise(std::span<const float> src, std::span<const float> tgt,
                        double epsilon, std::span<float> out) {
  const Moments s = moments(src);
  const Moments t = moments(tgt);
  const double gain = t.stddev / std::max(s.stddev, epsilon);
  for (std::size_t i = 0; i < src.size(); ++i) {
    out[i] = static_cast<float>((static_cast<double>(src[i]) - s.mean) * gain + t.mean);
  }
}

}  // namespace detail

/// out = (src - mean(src)) / max(std(src), eps) * std(tgt) + mean(tgt)
inline Patch statistics_swap(const Patch& src, std::span<const float> tgt, double epsilon,
                             StatsScope scope = StatsScope::kPooled,
                             std::size_t channels = 1) {
  if (src.vector.size() != tgt.size()) {
    fail(ErrorKind::kDimension, "swap length mismatch: " + std::to_string(src.vector.size()) +
                                    " vs " + std::to_string(tgt.size()));
  }
  if (!(epsilon > 0.0)) fail(ErrorKind::kParameter, "statistics swap epsilon must be > 0");
  Patch out{std::vector<float>(src.vector.size()), src.origin_y, src.origin_x};
  const std::span<const float> s(src.vector);
  if (scope == StatsScope::kPooled) {
    detail::renormalise(s, tgt, epsilon, out.vector);
    return out;
  }
  if (channels == 0 || s.size() % channels != 0) {
    fail(ErrorKind::kDimension, "patch length not divisible by channel count");
  }
  const std::size_t area = s.size() / channels;
  for (std::size_t c = 0; c < channels; ++c) {
    detail::renormalise(s.subspan(c * area, area), tgt.subspan(c * area, area), epsilon,
                        std::span<float>(out.vector).subspan(c * area, area));
  }
  return out;
}

namespace detail {

inline void check_transfer_inputs(const FeatureMap& src, const KnowledgeLibrary& lib,
                                  const TransferOptions& opts) {
  if (lib.empty()) fail(ErrorKind::kEmptyLibrary, "library '" + lib.name() + "' is empty");
  if (src.channels() != lib.channels()) {
    fail(ErrorKind::kDimension, "source has C = " + std::to_string(src.channels()) +
                                    " but library '" + lib.name() + "' has C = " +
                                    std::to_string(lib.channels()));
  }
  if (opts.query_spec.window_h != lib.spec().window_h ||
      opts.query_spec.window_w != lib.spec().window_w) {
    fail(ErrorKind::kDimension, "query window differs from the library window");
  }
  opts.query_spec.validate_for(src);
}

inline Patch apply_swap(const Patch& query, std::span<const float> record,
                        const TransferOptions& opts, std::size_t channels) {
  if (opts.mode == SwapMode::kGeometric) return geometric_swap(query, record);
  return statistics_swap(query, record, opts.epsilon, opts.stats_scope, channels);
}

}  // namespace detail

/// Re-applies recorded matches to the query patches of `src` and blends.
/// translate() produces its output through this same path.
inline FeatureMap replay(const FeatureMap& src, const KnowledgeLibrary& lib,
                         std::span<const MatchResult> matches, const TransferOptions& opts,
                         std::vector<Patch>* swapped_out = nullptr) {
  detail::check_transfer_inputs(src, lib, opts);
  const auto queries = extract_covering_patches(src, opts.query_spec);
  if (matches.size() != queries.size()) {
    fail(ErrorKind::kCorruption, "match count " + std::to_string(matches.size()) +
                                     " != query patch count " + std::to_string(queries.size()));
  }
  std::vector<Patch> swapped(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (matches[i].record_id >= lib.size()) {
      fail(ErrorKind::kCorruption, "match references record " +
                                       std::to_string(matches[i].record_id) +
                                       " beyond library size " + std::to_string(lib.size()));
    }
    swapped[i] = detail::apply_swap(queries[i], lib.vector(matches[i].record_id), opts,
                                    lib.channels());
  }
  FeatureMap out =
      assemble_patches(swapped, opts.query_spec, src.channels(), src.height(), src.width());
  if (swapped_out) *swapped_out = std::move(swapped);
  return out;
}

/// Matches every query window of `src` (stride grid plus edge-flush
/// windows) against the index, swaps in the best knowledge patch and
/// blends the result with overlap averaging.
inline TranslationResult translate(const FeatureMap& src, const KnowledgeLibrary& lib,
                                   const BhkmIndex& index, const TransferOptions& opts) {
  detail::check_transfer_inputs(src, lib, opts);
  index.check_library(lib);
  const auto queries = extract_covering_patches(src, opts.query_spec);
  TranslationResult result;
  result.mode = opts.mode;
  result.matches.resize(queries.size());
  result.query_origins.resize(queries.size());
  parallel_for(queries.size(), opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto found = index.query(queries[i].vector, opts.query, &lib);
      if (found.empty()) fail(ErrorKind::kEmptyLibrary, "index returned no candidates");
      MatchResult m = std::move(found.front());
      m.query_index = i;
      m.library_name = lib.name();
      result.matches[i] = std::move(m);
      result.query_origins[i] = {static_cast<std::uint32_t>(queries[i].origin_y),
                                 static_cast<std::uint32_t>(queries[i].origin_x)};
    }
  });
  std::vector<Patch> swapped;
  result.output = replay(src, lib, result.matches, opts, &swapped);
  if (opts.keep_patches) result.swapped = std::move(swapped);
  return result;
}

/// Translates with the library currently plugged into `gpkl`.
inline TranslationResult translate(const FeatureMap& src, const Gpkl& gpkl,
                                   const BhkmIndex& index, const TransferOptions& opts) {
  return translate(src, gpkl.active_library(), index, opts);
}

}  // namespace kxfer

#endif  // KXFER_TRANSFER_HPP_
