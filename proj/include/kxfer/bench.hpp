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

#ifndef KXFER_BENCH_HPP_
#define KXFER_BENCH_HPP_

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "kxfer/bhkm.hpp"
#include "kxfer/library.hpp"
#include "kxfer/match.hpp"
#include "kxfer/pq.hpp"

namespace kxfer {

struct BenchOptions {
  IndexConfig index;  // tree shape and default query knobs
  std::size_t repeats = 5;
  /// Query windows per image used for the per-image column; the default
  /// is a 64x64 feature map scanned by a 2x2 window at stride 1.
  std::size_t patches_per_image = 63 * 63;
  std::size_t pq_sub_vectors = 4;
  std::size_t pq_codewords = 256;
  bool include_pq = true;
};

struct BenchRow {
  std::string method;
  double time_per_patch_s = 0.0;
  double time_per_image_s = 0.0;
  double recall_at_1 = 0.0;
  /// Median leaf-scan time per query (tree methods only; not in the CSV).
  double leaf_time_per_patch_s = 0.0;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Times every search method over the same queries. Single-threaded.
/// Rows: traverse, hkm (raw full-dimension leaves), 1..B-bhkm, pq. Recall
/// is top-1 agreement with traverse.
inline std::vector<BenchRow> run_bench(const KnowledgeLibrary& lib,
                                       std::span<const float> queries,
                                       const BenchOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const std::size_t dim = lib.dimension();
  const std::size_t q = queries.size() / dim;
  if (q == 0) fail(ErrorKind::kParameter, "bench needs at least one query");
  const std::size_t repeats = std::max<std::size_t>(opts.repeats, 1);
  auto query = [&](std::size_t i) { return queries.subspan(i * dim, dim); };

  std::vector<std::uint32_t> truth(q);
  std::vector<BenchRow> rows;

  auto finish_row = [&](std::string method, const std::vector<double>& totals,
                        const std::vector<double>& leaf_totals,
                        const std::vector<std::uint32_t>& top1) {
    BenchRow row;
    row.method = std::move(method);
    row.time_per_patch_s = detail::median(totals) / static_cast<double>(q);
    row.time_per_image_s = row.time_per_patch_s * static_cast<double>(opts.patches_per_image);
    if (!leaf_totals.empty()) {
      row.leaf_time_per_patch_s = detail::median(leaf_totals) / static_cast<double>(q);
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < q; ++i) hits += top1[i] == truth[i];
    row.recall_at_1 = static_cast<double>(hits) / static_cast<double>(q);
    rows.push_back(std::move(row));
  };

  {
    std::vector<double> totals;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto t0 = Clock::now();
      for (std::size_t i = 0; i < q; ++i) truth[i] = brute_force_query(lib, query(i), 1)[0].record_id;
      totals.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    }
    finish_row("traverse", totals, {}, truth);
  }

  const BhkmIndex base = BhkmIndex::build(lib, [&] {
    IndexConfig c = opts.index;
    c.bands = kRawLeaves;
    return c;
  }());
  auto time_tree = [&](const std::string& name, const BhkmIndex& index) {
    const QueryParams params{opts.index.probes, 1, 0, false};
    std::vector<double> totals;
    std::vector<double> leaf_totals;
    std::vector<std::uint32_t> top1(q);
    for (std::size_t r = 0; r < repeats; ++r) {
      QueryStats stats;
      const auto t0 = Clock::now();
      for (std::size_t i = 0; i < q; ++i) top1[i] = index.query(query(i), params, nullptr, &stats)[0].record_id;
      totals.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      leaf_totals.push_back(stats.leaf_seconds);
    }
    finish_row(name, totals, leaf_totals, top1);
  };
  time_tree("hkm", base);
  for (std::size_t m = 1; m <= base.band_count(); ++m) {
    time_tree(std::to_string(m) + "-bhkm", base.rebanded(lib, m));
  }

  if (opts.include_pq && dim % opts.pq_sub_vectors == 0) {
    const PqIndex pq = PqIndex::build(lib, opts.pq_sub_vectors, opts.pq_codewords, opts.index.seed);
    std::vector<double> totals;
    std::vector<std::uint32_t> top1(q);
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto t0 = Clock::now();
      for (std::size_t i = 0; i < q; ++i) top1[i] = pq.query(query(i), 1)[0].record_id;
      totals.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    }
    finish_row("pq", totals, {}, top1);
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "method,time_per_patch_s,time_per_image_s,recall_at_1\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6e,%.6e,%.6f\n", r.method.c_str(), r.time_per_patch_s,
                  r.time_per_image_s, r.recall_at_1);
    out += buf;
  }
  return out;
}

}  // namespace kxfer

#endif  // KXFER_BENCH_HPP_
