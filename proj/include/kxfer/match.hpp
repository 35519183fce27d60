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

#ifndef KXFER_MATCH_HPP_
#define KXFER_MATCH_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kxfer/library.hpp"
#include "kxfer/similarity.hpp"

namespace kxfer {

struct MatchResult {
  std::size_t query_index = 0;
  std::uint32_t record_id = 0;
  double score = 0.0;
  std::string library_name;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Keeps the best `k` (score, id) pairs under the order: higher score
/// first, then smaller record id.
class TopK {
 public:
  struct Entry {
    double score;
    std::uint32_t id;
  };

  explicit TopK(std::size_t k) : k_(k) { entries_.reserve(k + 1); }

  static bool better(const Entry& a, const Entry& b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
  }

  void push(double score, std::uint32_t id) {
    const Entry e{score, id};
    if (entries_.size() == k_ && !better(e, entries_.back())) return;
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), e, better);
    entries_.insert(pos, e);
    if (entries_.size() > k_) entries_.pop_back();
  }

  const std::vector<Entry>& entries() const { return entries_; }

  void sort() { std::sort(entries_.begin(), entries_.end(), better); }
  std::vector<Entry>& mutable_entries() { return entries_; }

 private:
  std::size_t k_;
  std::vector<Entry> entries_;
};

inline std::vector<MatchResult> to_matches(const std::vector<TopK::Entry>& entries,
                                           const std::string& library_name,
                                           std::size_t query_index = 0) {
  std::vector<MatchResult> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back({query_index, e.id, e.score, library_name});
  return out;
}

/// Exhaustive NCC search ("traverse"); the correctness oracle for every
/// approximate index.
inline std::vector<MatchResult> brute_force_query(const KnowledgeLibrary& lib,
                                                  std::span<const float> patch,
                                                  std::size_t top_k) {
  if (patch.size() != lib.dimension()) {
    fail(ErrorKind::kDimension, "query length " + std::to_string(patch.size()) +
                                    " != library D = " + std::to_string(lib.dimension()));
  }
  TopK best(std::max<std::size_t>(top_k, 1));
  for (std::size_t i = 0; i < lib.size(); ++i) {
    best.push(ncc(patch, lib.vector(i)), static_cast<std::uint32_t>(i));
  }
  return to_matches(best.entries(), lib.name());
}

}  // namespace kxfer

#endif  // KXFER_MATCH_HPP_
