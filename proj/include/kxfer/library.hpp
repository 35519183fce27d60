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

#ifndef KXFER_LIBRARY_HPP_
#define KXFER_LIBRARY_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kxfer/binary_io.hpp"
#include "kxfer/error.hpp"
#include "kxfer/similarity.hpp"
#include "kxfer/tensor.hpp"

namespace kxfer {

/// Where a record came from: window top-left in its source map.
struct Provenance {
  std::uint32_t image_id = 0;
  std::uint32_t origin_y = 0;
  std::uint32_t origin_x = 0;
  std::uint32_t map_h = 0;
  std::uint32_t map_w = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct KnowledgeRecord {
  std::span<const float> vector;
  const Provenance& provenance;
};

/// Disable value for the redundancy threshold: ncc never exceeds 1.
inline constexpr float kNoMerging = 1.5f;
inline constexpr float kDefaultTau = 0.97f;

/// One task's de-redundantized patch set. Record vectors are stored flat,
/// N x D, in retention order. Immutable once constructed.
class KnowledgeLibrary {
 public:
  KnowledgeLibrary(std::string name, PatchSpec spec, std::size_t channels,
                   std::vector<float> vectors, std::vector<Provenance> provenance,
                   std::vector<std::string> image_names, float tau,
                   float scale = 1.0f)
      : name_(std::move(name)), spec_(spec), channels_(channels),
        vectors_(std::move(vectors)), provenance_(std::move(provenance)),
        image_names_(std::move(image_names)), tau_(tau), scale_(scale) {
    spec_.validate();
    if (channels_ == 0) fail(ErrorKind::kDimension, "library channel count is zero");
    const std::size_t d = dimension();
    if (vectors_.size() != provenance_.size() * d) {
      fail(ErrorKind::kDimension, "library holds " + std::to_string(vectors_.size()) +
                                      " scalars for " + std::to_string(provenance_.size()) +
                                      " records of D = " + std::to_string(d));
    }
    for (std::size_t i = 0; i < provenance_.size(); ++i) {
      const Provenance& p = provenance_[i];
      if (p.image_id >= image_names_.size()) {
        fail(ErrorKind::kCorruption, "record " + std::to_string(i) +
                                         " references unknown image " +
                                         std::to_string(p.image_id));
      }
      if (p.origin_y + spec_.window_h > p.map_h || p.origin_x + spec_.window_w > p.map_w) {
        fail(ErrorKind::kCorruption, "record " + std::to_string(i) +
                                         " has a window outside its source map");
      }
    }
  }

  const std::string& name() const { return name_; }
  const PatchSpec& spec() const { return spec_; }
  std::size_t channels() const { return channels_; }
  std::size_t dimension() const { return spec_.dimension(channels_); }
  std::size_t size() const { return provenance_.size(); }
  bool empty() const { return provenance_.empty(); }
  float tau() const { return tau_; }
  float scale() const { return scale_; }
  const std::vector<std::string>& image_names() const { return image_names_; }

  std::span<const float> vector(std::size_t i) const {
    return std::span<const float>(vectors_).subspan(i * dimension(), dimension());
  }
  const Provenance& provenance(std::size_t i) const { return provenance_[i]; }
  KnowledgeRecord record(std::size_t i) const { return {vector(i), provenance_[i]}; }
  std::span<const float> vectors() const { return vectors_; }

  KnowledgeLibrary renamed(std::string name) const {
    KnowledgeLibrary copy = *this;
    copy.name_ = std::move(name);
    return copy;
  }

 private:
  std::string name_;
  PatchSpec spec_;
  std::size_t channels_;
  std::vector<float> vectors_;
  std::vector<Provenance> provenance_;
  std::vector<std::string> image_names_;
  float tau_;
  float scale_;
};

struct LabeledMap {
  std::string name;
  FeatureMap map;
};

/// Greedy first-kept de-redundancy over `count` vectors of length `dim`:
/// a vector is discarded when its ncc with some already retained vector
/// exceeds `tau`. Returns retained indices in scan order.
///
/// The scan over retained vectors uses unit-normalised copies as a
/// prefilter; the keep/discard decision itself is always `ncc(...) > tau`.
inline std::vector<std::size_t> greedy_deredundancy(std::span<const float> vectors,
                                                    std::size_t dim, double tau) {
  const std::size_t count = dim == 0 ? 0 : vectors.size() / dim;
  std::vector<std::size_t> retained;
  std::vector<std::size_t> comparable;  // retained with nonzero norm
  std::vector<float> unit;              // their normalised copies
  std::vector<double> q(dim);
  constexpr double kSlack = 1e-6;
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = vectors.subspan(i * dim, dim);
    const double n = norm<float>(v);
    bool redundant = false;
    if (n >= kZeroNorm && tau <= 1.0) {
      for (std::size_t k = 0; k < dim; ++k) q[k] = v[k] / n;
      for (std::size_t j = 0; j < comparable.size() && !redundant; ++j) {
        const float* u = &unit[j * dim];
        double d = 0.0;
        for (std::size_t k = 0; k < dim; ++k) d += q[k] * u[k];
        if (d > tau - kSlack) {
          redundant = ncc(v, vectors.subspan(comparable[j] * dim, dim)) > tau;
        }
      }
    }
    if (redundant) continue;
    retained.push_back(i);
    if (n >= kZeroNorm) {
      comparable.push_back(i);
      for (std::size_t k = 0; k < dim; ++k) unit.push_back(static_cast<float>(v[k] / n));
    }
  }
  return retained;
}

/// Extracts every window of every map (maps in order, windows row-major)
/// and keeps the greedy de-redundant subset with exact provenance.
inline KnowledgeLibrary build_library(std::string name, std::span<const LabeledMap> maps,
                                      const PatchSpec& spec, float tau,
                                      float scale = 1.0f) {
  if (maps.empty()) fail(ErrorKind::kEmptyLibrary, "no input maps for library '" + name + "'");
  if (!(tau > 0.0f)) fail(ErrorKind::kParameter, "redundancy threshold must be > 0");
  spec.validate();
  const std::size_t channels = maps.front().map.channels();
  const std::size_t dim = spec.dimension(channels);
  std::vector<float> all;
  std::vector<Provenance> prov;
  std::vector<std::string> names;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const FeatureMap& map = maps[m].map;
    if (map.channels() != channels) {
      fail(ErrorKind::kDimension, "map '" + maps[m].name + "' has C = " +
                                      std::to_string(map.channels()) + ", expected C = " +
                                      std::to_string(channels));
    }
    spec.validate_for(map);
    names.push_back(maps[m].name);
    const auto ys = window_origins(map.height(), spec.window_h, spec.stride);
    const auto xs = window_origins(map.width(), spec.window_w, spec.stride);
    for (std::size_t y : ys) {
      for (std::size_t x : xs) {
        const std::size_t at = all.size();
        all.resize(at + dim);
        copy_window(map, spec, y, x, std::span<float>(all).subspan(at, dim));
        prov.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(y),
                        static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(map.height()),
                        static_cast<std::uint32_t>(map.width())});
      }
    }
  }
  const auto keep = greedy_deredundancy(all, dim, tau);
  std::vector<float> vectors;
  vectors.reserve(keep.size() * dim);
  std::vector<Provenance> kept_prov;
  kept_prov.reserve(keep.size());
  for (std::size_t i : keep) {
    vectors.insert(vectors.end(), all.begin() + static_cast<std::ptrdiff_t>(i * dim),
                   all.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    kept_prov.push_back(prov[i]);
  }
  return KnowledgeLibrary(std::move(name), spec, channels, std::move(vectors),
                          std::move(kept_prov), std::move(names), tau, scale);
}

// Library file (.gpkl), little-endian:
//   "GPKL" | u16 version = 1 | u32 C, W_h, W_w, W_s | f32 tau | u32 N | u32 M
//   | M x (u16 len + UTF-8 name)
//   | N x (D f32 | u32 image_id | u32 origin_y | u32 origin_x | u32 map_h | u32 map_w)
//   | f32 scale
// The library name is not stored; loaders take it from the caller.
inline constexpr std::uint16_t kLibraryVersion = 1;

inline std::string encode_library(const KnowledgeLibrary& lib) {
  io::ByteWriter w;
  w.bytes("GPKL");
  w.u16(kLibraryVersion);
  w.u32(static_cast<std::uint32_t>(lib.channels()));
  w.u32(static_cast<std::uint32_t>(lib.spec().window_h));
  w.u32(static_cast<std::uint32_t>(lib.spec().window_w));
  w.u32(static_cast<std::uint32_t>(lib.spec().stride));
  w.f32(lib.tau());
  w.u32(static_cast<std::uint32_t>(lib.size()));
  w.u32(static_cast<std::uint32_t>(lib.image_names().size()));
  for (const auto& n : lib.image_names()) w.short_string(n);
  for (std::size_t i = 0; i < lib.size(); ++i) {
    w.f32s(lib.vector(i));
    const Provenance& p = lib.provenance(i);
    w.u32(p.image_id);
    w.u32(p.origin_y);
    w.u32(p.origin_x);
    w.u32(p.map_h);
    w.u32(p.map_w);
  }
  w.f32(lib.scale());
  return std::move(w).buffer();
}

inline KnowledgeLibrary decode_library(std::string_view bytes, std::string name,
                                       const std::string& what = "gpkl") {
  io::ByteReader r(bytes, what);
  r.expect_magic("GPKL");
  const auto version = r.u16("version");
  if (version != kLibraryVersion) r.error("unsupported version " + std::to_string(version));
  const std::size_t channels = r.u32("C");
  PatchSpec spec;
  spec.window_h = r.u32("W_h");
  spec.window_w = r.u32("W_w");
  spec.stride = r.u32("W_s");
  if (channels == 0 || spec.window_h == 0 || spec.window_w == 0 || spec.stride == 0) {
    r.error("zero dimension in header");
  }
  const float tau = r.f32("tau");
  const std::size_t n = r.u32("record count");
  const std::size_t m = r.u32("image count");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < m; ++i) names.push_back(r.short_string("image name"));
  const std::size_t dim = spec.dimension(channels);
  const std::size_t record_bytes = 4 * dim + 20;
  if (n > r.remaining() / record_bytes) r.require(n * record_bytes, "records");
  std::vector<float> vectors(n * dim);
  std::vector<Provenance> prov(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.f32s(std::span<float>(vectors).subspan(i * dim, dim), "record vector");
    Provenance& p = prov[i];
    p.image_id = r.u32("image_id");
    p.origin_y = r.u32("origin_y");
    p.origin_x = r.u32("origin_x");
    p.map_h = r.u32("map_h");
    p.map_w = r.u32("map_w");
    if (p.image_id >= names.size()) r.error("record image_id out of range");
    if (p.origin_y + spec.window_h > p.map_h || p.origin_x + spec.window_w > p.map_w) {
      r.error("record window outside its source map");
    }
  }
  const float scale = r.f32("scale factor");
  r.expect_end();
  return KnowledgeLibrary(std::move(name), spec, channels, std::move(vectors),
                          std::move(prov), std::move(names), tau, scale);
}

inline std::uint64_t library_hash(const KnowledgeLibrary& lib) {
  return io::fnv1a64(encode_library(lib));
}

inline void save_library(const KnowledgeLibrary& lib, const std::string& path) {
  io::write_file(path, encode_library(lib));
}

/// The library is named after the file stem.
inline KnowledgeLibrary load_library(const std::string& path) {
  return decode_library(io::read_file(path), std::filesystem::path(path).stem().string(),
                        path);
}

/// A named collection of libraries with one optionally plugged in. Copies
/// share library storage, so plugging never touches library contents.
class Gpkl {
 public:
  void add(KnowledgeLibrary lib) {
    auto name = lib.name();
    libraries_[name] = std::make_shared<const KnowledgeLibrary>(std::move(lib));
  }

  bool contains(const std::string& name) const { return libraries_.count(name) != 0; }
  std::size_t size() const { return libraries_.size(); }

  const KnowledgeLibrary& library(const std::string& name) const {
    auto it = libraries_.find(name);
    if (it == libraries_.end()) fail(ErrorKind::kLookup, "no library named '" + name + "'");
    return *it->second;
  }

  std::shared_ptr<const KnowledgeLibrary> shared(const std::string& name) const {
    library(name);
    return libraries_.at(name);
  }

  const std::optional<std::string>& active() const { return active_; }

  const KnowledgeLibrary& active_library() const {
    if (!active_) fail(ErrorKind::kLookup, "no library is plugged");
    return library(*active_);
  }

  friend Gpkl plug(Gpkl gpkl, const std::string& name) {
    if (!gpkl.contains(name)) fail(ErrorKind::kLookup, "no library named '" + name + "'");
    gpkl.active_ = name;
    return gpkl;
  }

  friend bool operator==(const Gpkl& a, const Gpkl& b) {
    return a.active_ == b.active_ && a.libraries_ == b.libraries_;
  }

 private:
  std::map<std::string, std::shared_ptr<const KnowledgeLibrary>> libraries_;
  std::optional<std::string> active_;
};

}  // namespace kxfer

#endif  // KXFER_LIBRARY_HPP_
