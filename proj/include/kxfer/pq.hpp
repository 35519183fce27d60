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

#ifndef KXFER_PQ_HPP_
#define KXFER_PQ_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kxfer/error.hpp"
#include "kxfer/kmeans.hpp"
#include "kxfer/library.hpp"
#include "kxfer/match.hpp"

namespace kxfer {

/// Product quantizer over a library: each vector is split into equal
/// slices, each slice coded by its nearest Euclidean codeword. Queries use
/// asymmetric distance (raw query slice vs codeword) summed over slices.
class PqIndex {
 public:
  static PqIndex build(const KnowledgeLibrary& lib, std::size_t sub_vectors,
                       std::size_t codewords, std::uint64_t seed,
                       std::size_t max_iters = 25) {
    if (lib.empty()) fail(ErrorKind::kEmptyLibrary, "cannot quantize empty library");
    const std::size_t d = lib.dimension();
    if (sub_vectors == 0 || d % sub_vectors != 0) {
      fail(ErrorKind::kParameter, "sub_vectors " + std::to_string(sub_vectors) +
                                      " does not divide D = " + std::to_string(d));
    }
    if (codewords == 0) fail(ErrorKind::kParameter, "codeword count must be positive");
    PqIndex pq;
    pq.dim_ = d;
    pq.sub_vectors_ = sub_vectors;
    pq.sub_dim_ = d / sub_vectors;
    pq.count_ = lib.size();
    pq.library_name_ = lib.name();
    pq.codes_.assign(lib.size() * sub_vectors, 0);
    std::vector<float> slice(lib.size() * pq.sub_dim_);
    for (std::size_t s = 0; s < sub_vectors; ++s) {
      for (std::size_t i = 0; i < lib.size(); ++i) {
        const auto v = lib.vector(i).subspan(s * pq.sub_dim_, pq.sub_dim_);
        std::copy(v.begin(), v.end(), slice.begin() + static_cast<std::ptrdiff_t>(i * pq.sub_dim_));
      }
      const auto km = euclidean_kmeans(
          slice, pq.sub_dim_, KMeansParams{codewords, max_iters, 1e-12, mix_seed(seed, s + 1)});
      pq.codewords_ = km.k;  // identical for every slice: min(codewords, N)
      pq.codebooks_.insert(pq.codebooks_.end(), km.centroids.begin(), km.centroids.end());
      for (std::size_t i = 0; i < lib.size(); ++i) {
        pq.codes_[i * sub_vectors + s] = km.assignment[i];
      }
    }
    return pq;
  }

  std::size_t sub_vectors() const { return sub_vectors_; }
  std::size_t codewords() const { return codewords_; }
  std::size_t size() const { return count_; }

  std::span<const float> codeword(std::size_t slice, std::size_t code) const {
    return std::span<const float>(codebooks_).subspan((slice * codewords_ + code) * sub_dim_,
                                                      sub_dim_);
  }

  /// Scores are negated quantized squared distances; ties to smaller id.
  std::vector<MatchResult> query(std::span<const float> patch, std::size_t top_k) const {
    if (patch.size() != dim_) {
      fail(ErrorKind::kDimension, "query length " + std::to_string(patch.size()) +
                                      " != PQ D = " + std::to_string(dim_));
    }
    std::vector<double> table(sub_vectors_ * codewords_);
    for (std::size_t s = 0; s < sub_vectors_; ++s) {
      for (std::size_t c = 0; c < codewords_; ++c) {
        const auto cw = codeword(s, c);
        double acc = 0.0;
        for (std::size_t k = 0; k < sub_dim_; ++k) {
          const double diff = static_cast<double>(patch[s * sub_dim_ + k]) - cw[k];
          acc += diff * diff;
        }
        table[s * codewords_ + c] = acc;
      }
    }
    TopK best(std::max<std::size_t>(top_k, 1));
    for (std::size_t i = 0; i < count_; ++i) {
      double dist = 0.0;
      const std::uint32_t* code = &codes_[i * sub_vectors_];
      for (std::size_t s = 0; s < sub_vectors_; ++s) dist += table[s * codewords_ + code[s]];
      best.push(-dist, static_cast<std::uint32_t>(i));
    }
    return to_matches(best.entries(), library_name_);
  }

 private:
  std::size_t dim_ = 0;
  std::size_t sub_vectors_ = 0;
  std::size_t sub_dim_ = 0;
  std::size_t codewords_ = 0;
  std::size_t count_ = 0;
  std::string library_name_;
  std::vector<float> codebooks_;       // sub_vectors x codewords x sub_dim
  std::vector<std::uint32_t> codes_;   // count x sub_vectors
};

inline PqIndex pq_build(const KnowledgeLibrary& lib, std::size_t sub_vectors,
                        std::size_t codewords, std::uint64_t seed) {
  return PqIndex::build(lib, sub_vectors, codewords, seed);
}

inline std::vector<MatchResult> pq_query(const PqIndex& pq, std::span<const float> patch,
                                         std::size_t top_k) {
  return pq.query(patch, top_k);
}

}  // namespace kxfer

#endif  // KXFER_PQ_HPP_
