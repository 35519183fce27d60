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

#ifndef KXFER_BHKM_HPP_
#define KXFER_BHKM_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "kxfer/binary_io.hpp"
#include "kxfer/error.hpp"
#include "kxfer/kmeans.hpp"
#include "kxfer/library.hpp"
#include "kxfer/match.hpp"
#include "kxfer/wavelet.hpp"

namespace kxfer {

/// Bands value selecting plain hierarchical k-means: leaves keep the raw
/// D-dimensional record vectors and no wavelet transform is applied.
inline constexpr std::size_t kRawLeaves = 0;

struct IndexConfig {
  /// Cluster count per level; the tree depth is branching.size().
  std::vector<std::size_t> branching{16, 16};
  /// Wavelet bands kept in leaves, low frequency first, or kRawLeaves.
  std::size_t bands = 2;
  std::size_t probes = 1;
  std::size_t top_k = 1;
  bool rerank = false;
  std::size_t kmeans_max_iters = 25;
  double kmeans_tol = 1e-4;
  std::uint64_t seed = 0;

  std::size_t levels() const { return branching.size(); }
  std::size_t max_branching() const {
    return branching.empty() ? 0 : *std::max_element(branching.begin(), branching.end());
  }

  void validate() const {
    if (branching.empty()) fail(ErrorKind::kParameter, "index needs at least one level");
    for (std::size_t k : branching) {
      if (k == 0) fail(ErrorKind::kParameter, "branching factors must be >= 1");
    }
    if (probes < 1 || probes > max_branching()) {
      fail(ErrorKind::kParameter, "probes must lie in [1, " +
                                      std::to_string(max_branching()) + "]");
    }
    if (top_k < 1) fail(ErrorKind::kParameter, "top_k must be >= 1");
  }
};

/// Per-query knobs; zero `bands` means "all bands stored in the index".
struct QueryParams {
  std::size_t probes = 1;
  std::size_t top_k = 1;
  std::size_t bands = 0;
  bool rerank = false;
};

struct QueryStats {
  double leaf_seconds = 0.0;
  std::size_t leaves_visited = 0;
  std::size_t records_scored = 0;
};

struct IndexNode {
  std::vector<float> centroid;  // unit norm, length D
  std::vector<std::uint32_t> children;
  std::vector<float> child_centroids;  // children.size() x D, copy for scanning
  std::vector<std::uint32_t> records;  // leaf payload
  std::vector<float> leaf_vectors;     // records.size() x leaf width

  bool is_leaf() const { return children.empty(); }
};

/// Hierarchical spherical k-means tree whose leaves match on the first m
/// Haar packet bands of each record.
class BhkmIndex {
 public:
  static BhkmIndex build(const KnowledgeLibrary& lib, const IndexConfig& cfg) {
    cfg.validate();
    if (lib.empty()) fail(ErrorKind::kEmptyLibrary, "cannot index empty library '" + lib.name() + "'");
    BhkmIndex index;
    index.dim_ = lib.dimension();
    index.channels_ = lib.channels();
    index.window_h_ = lib.spec().window_h;
    index.window_w_ = lib.spec().window_w;
    index.branching_ = cfg.branching;
    index.bands_ = cfg.bands;
    index.record_count_ = lib.size();
    index.library_hash_ = kxfer::library_hash(lib);
    index.library_name_ = lib.name();
    index.init_transform();

    std::vector<std::uint32_t> ids(lib.size());
    std::iota(ids.begin(), ids.end(), 0u);
    std::vector<float> root_centroid = mean_direction(lib, ids);
    index.build_node(lib, cfg, ids, 0, cfg.seed, std::move(root_centroid));
    index.finish();
    return index;
  }

  std::size_t dimension() const { return dim_; }
  std::size_t channels() const { return channels_; }
  std::size_t levels() const { return branching_.size(); }
  const std::vector<std::size_t>& branching() const { return branching_; }
  std::size_t bands() const { return bands_; }
  std::size_t record_count() const { return record_count_; }
  std::uint64_t library_hash() const { return library_hash_; }
  const std::string& library_name() const { return library_name_; }
  void set_library_name(std::string name) { library_name_ = std::move(name); }
  const std::vector<IndexNode>& nodes() const { return nodes_; }
  bool raw_leaves() const { return bands_ == kRawLeaves; }
  std::size_t band_count() const { return window_h_ * window_w_; }

  /// Number of scalars per leaf record.
  std::size_t leaf_width() const { return raw_leaves() ? dim_ : bands_ * channels_; }

  /// Record ids per leaf, depth-first order.
  std::vector<std::vector<std::uint32_t>> leaves() const {
    std::vector<std::vector<std::uint32_t>> out;
    for (const auto& node : nodes_) {
      if (node.is_leaf()) out.push_back(node.records);
    }
    return out;
  }

  /// Same tree with leaves re-encoded for `bands` (or kRawLeaves). Used to
  /// compare leaf encodings without re-clustering.
  BhkmIndex rebanded(const KnowledgeLibrary& lib, std::size_t bands) const {
    check_library(lib);
    BhkmIndex copy = *this;
    copy.bands_ = bands;
    copy.init_transform();
    for (std::uint32_t n = 0; n < copy.nodes_.size(); ++n) {
      if (copy.nodes_[n].is_leaf()) copy.fill_leaf(lib, n, copy.nodes_[n].records);
    }
    copy.finish();
    return copy;
  }

  /// Throws unless `lib` is the library this index was built from.
  void check_library(const KnowledgeLibrary& lib) const {
    if (lib.dimension() != dim_ || lib.size() != record_count_ ||
        kxfer::library_hash(lib) != library_hash_) {
      fail(ErrorKind::kCorruption, "index does not belong to library '" + lib.name() +
                                       "' (content hash mismatch)");
    }
  }

  /// Descends `probes` best children per node by centroid similarity, then
  /// ranks records of every reached leaf by ncc on the partial-band
  /// vectors. With `rerank` and a library, the top_k candidates are
  /// rescored with full-vector ncc. Ties go to the smaller record id.
  std::vector<MatchResult> query(std::span<const float> patch, const QueryParams& params,
                                 const KnowledgeLibrary* rerank_source = nullptr,
                                 QueryStats* stats = nullptr) const {
    if (patch.size() != dim_) {
      fail(ErrorKind::kDimension, "query length " + std::to_string(patch.size()) +
                                      " != index D = " + std::to_string(dim_));
    }
    if (nodes_.empty()) return {};
    const std::size_t top_k = std::max<std::size_t>(params.top_k, 1);
    const std::size_t probes = std::max<std::size_t>(params.probes, 1);
    const std::size_t width = query_width(params.bands);
    const std::size_t used_bands = raw_leaves() ? 0 : width / channels_;

    std::vector<double> qv(raw_leaves() ? dim_ : bands_ * channels_);
    if (raw_leaves()) {
      std::copy(patch.begin(), patch.end(), qv.begin());
    } else {
      transform_->forward(patch, std::span<double>(qv), used_bands);
    }
    double qn = 0.0;
    for (std::size_t i = 0; i < width; ++i) qn += qv[i] * qv[i];
    qn = std::sqrt(qn);

    TopK best(top_k);
    descend(0, patch, qv.data(), width, qn, used_bands, probes, best, stats);

    auto& entries = best.mutable_entries();
    if (params.rerank && rerank_source != nullptr) {
      for (auto& e : entries) e.score = ncc(patch, rerank_source->vector(e.id));
      best.sort();
    }
    return to_matches(entries, library_name_);
  }

  std::vector<MatchResult> query(std::span<const float> patch, const IndexConfig& cfg,
                                 const KnowledgeLibrary* rerank_source = nullptr) const {
    return query(patch, QueryParams{cfg.probes, cfg.top_k, 0, cfg.rerank}, rerank_source);
  }

  // Index file (.bhkm), little-endian:
  //   "BHKM" | u16 version | u32 D | u32 C | u32 levels | u32 m
  //   | levels x u32 branching | u32 W_h | u32 W_w | u32 N | u64 library hash
  //   | nodes, depth-first: u8 kind (0 internal, 1 leaf) | D f32 centroid
  //       internal: u32 child count, children follow
  //       leaf: u32 record count | per record u32 id + width f32
  // m = 0 marks raw full-dimension leaves (width D); otherwise width m*C.
  std::string encode() const {
    io::ByteWriter w;
    w.bytes("BHKM");
    w.u16(kVersion);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u32(static_cast<std::uint32_t>(channels_));
    w.u32(static_cast<std::uint32_t>(branching_.size()));
    w.u32(static_cast<std::uint32_t>(bands_));
    for (std::size_t k : branching_) w.u32(static_cast<std::uint32_t>(k));
    w.u32(static_cast<std::uint32_t>(window_h_));
    w.u32(static_cast<std::uint32_t>(window_w_));
    w.u32(static_cast<std::uint32_t>(record_count_));
    w.u64(library_hash_);
    if (!nodes_.empty()) encode_node(w, 0);
    return std::move(w).buffer();
  }

  static BhkmIndex decode(std::string_view bytes, const std::string& what = "bhkm") {
    io::ByteReader r(bytes, what);
    r.expect_magic("BHKM");
    const auto version = r.u16("version");
    if (version != kVersion) r.error("unsupported version " + std::to_string(version));
    BhkmIndex index;
    index.dim_ = r.u32("D");
    index.channels_ = r.u32("C");
    const std::size_t levels = r.u32("levels");
    index.bands_ = r.u32("m");
    if (levels == 0 || levels > 64) r.error("bad level count");
    for (std::size_t i = 0; i < levels; ++i) index.branching_.push_back(r.u32("branching"));
    index.window_h_ = r.u32("W_h");
    index.window_w_ = r.u32("W_w");
    index.record_count_ = r.u32("record count");
    index.library_hash_ = r.u64("library hash");
    if (index.dim_ == 0 || index.channels_ == 0 ||
        index.dim_ != index.window_h_ * index.window_w_ * index.channels_) {
      r.error("inconsistent D, C and window");
    }
    if (index.bands_ > index.band_count()) r.error("band count exceeds window bands");
    index.init_transform();
    if (index.record_count_ > 0) index.decode_node(r, 0);
    r.expect_end();
    std::vector<bool> seen(index.record_count_, false);
    for (const auto& node : index.nodes_) {
      for (std::uint32_t id : node.records) {
        if (id >= index.record_count_ || seen[id]) {
          fail(ErrorKind::kCorruption, what + ": leaf payloads do not partition the records");
        }
        seen[id] = true;
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      fail(ErrorKind::kCorruption, what + ": some records are missing from the leaves");
    }
    index.finish();
    return index;
  }

 private:
  static constexpr std::uint16_t kVersion = 1;

  std::size_t query_width(std::size_t bands) const {
    if (raw_leaves()) {
      if (bands != 0 && bands != band_count()) {
        fail(ErrorKind::kParameter, "raw-leaf index only matches on full vectors");
      }
      return dim_;
    }
    const std::size_t m = bands == 0 ? bands_ : bands;
    if (m < 1 || m > bands_) {
      fail(ErrorKind::kParameter, "query bands " + std::to_string(m) + " outside [1, " +
                                      std::to_string(bands_) + "] stored in the index");
    }
    return m * channels_;
  }

  void init_transform() {
    if (!raw_leaves()) {
      transform_ = std::make_shared<const HaarPacketTransform>(window_h_, window_w_, channels_);
      if (bands_ > transform_->band_count()) {
        fail(ErrorKind::kParameter, "bands " + std::to_string(bands_) + " exceed the " +
                                        std::to_string(transform_->band_count()) +
                                        " bands of the window");
      }
    }
  }

  static std::vector<float> mean_direction(const KnowledgeLibrary& lib,
                                           std::span<const std::uint32_t> ids) {
    const std::size_t d = lib.dimension();
    std::vector<double> sum(d, 0.0);
    for (std::uint32_t id : ids) {
      const auto v = lib.vector(id);
      const double n = norm<float>(v);
      if (n < kZeroNorm) continue;
      for (std::size_t i = 0; i < d; ++i) sum[i] += v[i] / n;
    }
    const double n = norm<double>(sum);
    std::vector<float> c(d, 0.0f);
    if (n < kZeroNorm) {
      c[0] = 1.0f;
    } else {
      for (std::size_t i = 0; i < d; ++i) c[i] = static_cast<float>(sum[i] / n);
    }
    return c;
  }

  std::uint32_t build_node(const KnowledgeLibrary& lib, const IndexConfig& cfg,
                           std::vector<std::uint32_t> ids, std::size_t depth,
                           std::uint64_t node_seed, std::vector<float> centroid) {
    const auto self = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_[self].centroid = std::move(centroid);
    const bool leaf = depth == cfg.levels() || ids.size() < cfg.branching[depth] ||
                      ids.size() <= 1;
    if (leaf) {
      fill_leaf(lib, self, std::move(ids));
      return self;
    }
    const std::size_t d = dim_;
    std::vector<float> data(ids.size() * d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto v = lib.vector(ids[i]);
      std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    const auto km = spherical_kmeans(
        data, d, KMeansParams{cfg.branching[depth], cfg.kmeans_max_iters, cfg.kmeans_tol,
                              node_seed});
    std::vector<std::vector<std::uint32_t>> groups(km.k);
    for (std::size_t i = 0; i < ids.size(); ++i) groups[km.assignment[i]].push_back(ids[i]);
    ids.clear();
    ids.shrink_to_fit();
    for (std::size_t j = 0; j < km.k; ++j) {
      if (groups[j].empty()) continue;
      std::vector<float> c(km.centroids.begin() + static_cast<std::ptrdiff_t>(j * d),
                           km.centroids.begin() + static_cast<std::ptrdiff_t>((j + 1) * d));
      const std::uint32_t child =
          build_node(lib, cfg, std::move(groups[j]), depth + 1, mix_seed(node_seed, j + 1),
                     std::move(c));
      nodes_[self].children.push_back(child);
    }
    return self;
  }

  void fill_leaf(const KnowledgeLibrary& lib, std::uint32_t self,
                 std::vector<std::uint32_t> ids) {
    IndexNode& node = nodes_[self];
    const std::size_t width = leaf_width();
    node.leaf_vectors.resize(ids.size() * width);
    std::vector<double> buf(width);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto v = lib.vector(ids[i]);
      float* out = &node.leaf_vectors[i * width];
      if (raw_leaves()) {
        std::copy(v.begin(), v.end(), out);
      } else {
        transform_->forward(v, std::span<double>(buf), bands_);
        for (std::size_t k = 0; k < width; ++k) out[k] = static_cast<float>(buf[k]);
      }
    }
    node.records = std::move(ids);
  }

  // Derived state rebuilt after build or load: child centroid blocks and
  // prefix norms of every leaf vector (one per band, or one for raw leaves).
  void finish() {
    const std::size_t width = leaf_width();
    const std::size_t segments = raw_leaves() ? 1 : bands_;
    const std::size_t seg_len = width / segments;
    prefix_norms_.assign(nodes_.size(), {});
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      IndexNode& node = nodes_[n];
      node.child_centroids.clear();
      for (std::uint32_t c : node.children) {
        const auto& cc = nodes_[c].centroid;
        node.child_centroids.insert(node.child_centroids.end(), cc.begin(), cc.end());
      }
      auto& norms = prefix_norms_[n];
      norms.resize(node.records.size() * segments);
      for (std::size_t r = 0; r < node.records.size(); ++r) {
        const float* v = &node.leaf_vectors[r * width];
        double acc = 0.0;
        for (std::size_t s = 0; s < segments; ++s) {
          for (std::size_t k = s * seg_len; k < (s + 1) * seg_len; ++k) {
            acc += static_cast<double>(v[k]) * v[k];
          }
          norms[r * segments + s] = std::sqrt(acc);
        }
      }
    }
  }

  void descend(std::uint32_t node_id, std::span<const float> patch, const double* qv,
               std::size_t width, double qn, std::size_t used_bands, std::size_t probes,
               TopK& best, QueryStats* stats) const {
    const IndexNode& node = nodes_[node_id];
    if (node.is_leaf()) {
      scan_leaf(node_id, qv, width, qn, used_bands, best, stats);
      return;
    }
    const std::size_t n = node.children.size();
    if (probes >= n) {
      for (std::size_t j = 0; j < n; ++j) {
        descend(node.children[j], patch, qv, width, qn, used_bands, probes, best, stats);
      }
      return;
    }
    // small fixed-size selection of the best `probes` children
    struct Cand {
      double score;
      std::size_t pos;
    };
    std::vector<Cand> cand(n);
    for (std::size_t j = 0; j < n; ++j) {
      const float* c = &node.child_centroids[j * dim_];
      double s = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) s += static_cast<double>(patch[k]) * c[k];
      cand[j] = {s, j};
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(probes),
                      cand.end(), [](const Cand& a, const Cand& b) {
                        return a.score > b.score || (a.score == b.score && a.pos < b.pos);
                      });
    for (std::size_t j = 0; j < probes; ++j) {
      descend(node.children[cand[j].pos], patch, qv, width, qn, used_bands, probes, best,
              stats);
    }
  }

  void scan_leaf(std::uint32_t node_id, const double* qv, std::size_t width, double qn,
                 std::size_t used_bands, TopK& best, QueryStats* stats) const {
    using Clock = std::chrono::steady_clock;
    const auto start = stats ? Clock::now() : Clock::time_point{};
    const IndexNode& node = nodes_[node_id];
    const std::size_t stride = leaf_width();
    const std::size_t segments = raw_leaves() ? 1 : bands_;
    const std::size_t norm_slot = raw_leaves() ? 0 : used_bands - 1;
    const auto& norms = prefix_norms_[node_id];
    const std::size_t count = node.records.size();
    for (std::size_t r = 0; r < count; ++r) {
      const float* v = &node.leaf_vectors[r * stride];
      double d = 0.0;
      for (std::size_t k = 0; k < width; ++k) d += qv[k] * v[k];
      const double rn = norms[r * segments + norm_slot];
      const double s = (qn < kZeroNorm || rn < kZeroNorm) ? 0.0 : d / (qn * rn);
      best.push(s, node.records[r]);
    }
    if (stats) {
      stats->leaf_seconds += std::chrono::duration<double>(Clock::now() - start).count();
      ++stats->leaves_visited;
      stats->records_scored += count;
    }
  }

  void encode_node(io::ByteWriter& w, std::uint32_t id) const {
    const IndexNode& node = nodes_[id];
    w.u8(node.is_leaf() ? 1 : 0);
    w.f32s(node.centroid);
    if (!node.is_leaf()) {
      w.u32(static_cast<std::uint32_t>(node.children.size()));
      for (std::uint32_t c : node.children) encode_node(w, c);
      return;
    }
    const std::size_t width = leaf_width();
    w.u32(static_cast<std::uint32_t>(node.records.size()));
    for (std::size_t r = 0; r < node.records.size(); ++r) {
      w.u32(node.records[r]);
      w.f32s(std::span<const float>(node.leaf_vectors).subspan(r * width, width));
    }
  }

  std::uint32_t decode_node(io::ByteReader& r, std::size_t depth) {
    if (depth > levels()) r.error("tree deeper than its level count");
    const auto self = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    const std::uint8_t kind = r.u8("node kind");
    if (kind > 1) r.error("bad node kind " + std::to_string(kind));
    std::vector<float> centroid(dim_);
    r.f32s(centroid, "centroid");
    nodes_[self].centroid = std::move(centroid);
    if (kind == 0) {
      const std::size_t count = r.u32("child count");
      if (count == 0) r.error("internal node without children");
      if (depth >= levels() || count > branching_[depth]) r.error("child count exceeds branching");
      for (std::size_t j = 0; j < count; ++j) {
        const std::uint32_t child = decode_node(r, depth + 1);
        nodes_[self].children.push_back(child);
      }
      return self;
    }
    const std::size_t width = leaf_width();
    const std::size_t count = r.u32("leaf record count");
    if (count > r.remaining() / (4 + 4 * width)) r.require(count * (4 + 4 * width), "leaf records");
    std::vector<std::uint32_t> ids(count);
    std::vector<float> vecs(count * width);
    for (std::size_t i = 0; i < count; ++i) {
      ids[i] = r.u32("record id");
      r.f32s(std::span<float>(vecs).subspan(i * width, width), "leaf vector");
    }
    nodes_[self].records = std::move(ids);
    nodes_[self].leaf_vectors = std::move(vecs);
    return self;
  }

  std::size_t dim_ = 0;
  std::size_t channels_ = 0;
  std::size_t window_h_ = 0;
  std::size_t window_w_ = 0;
  std::vector<std::size_t> branching_;
  std::size_t bands_ = 0;
  std::size_t record_count_ = 0;
  std::uint64_t library_hash_ = 0;
  std::string library_name_;
  std::shared_ptr<const HaarPacketTransform> transform_;
  std::vector<IndexNode> nodes_;
  std::vector<std::vector<double>> prefix_norms_;
};

inline BhkmIndex build_index(const KnowledgeLibrary& lib, const IndexConfig& cfg) {
  return BhkmIndex::build(lib, cfg);
}

inline void save_index(const BhkmIndex& index, const std::string& path) {
  io::write_file(path, index.encode());
}

inline BhkmIndex load_index(const std::string& path) {
  return BhkmIndex::decode(io::read_file(path), path);
}

/// Loads an index and verifies it was built from `lib`.
inline BhkmIndex load_index_for(const std::string& path, const KnowledgeLibrary& lib) {
  BhkmIndex index = load_index(path);
  index.check_library(lib);
  index.set_library_name(lib.name());
  return index;
}

}  // namespace kxfer

#endif  // KXFER_BHKM_HPP_
