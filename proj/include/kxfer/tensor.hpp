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

#ifndef KXFER_TENSOR_HPP_
#define KXFER_TENSOR_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kxfer/error.hpp"

namespace kxfer {

/// A C x H x W grid of activations stored channel-major, (c, h, w) order.
/// Pixel images are the C = 3 case with values in [0, 1].
class FeatureMap {
 public:
  FeatureMap() = default;

  FeatureMap(std::size_t channels, std::size_t height, std::size_t width)
      : FeatureMap(channels, height, width,
                   std::vector<float>(channels * height * width, 0.0f)) {}

  FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
             std::vector<float> data)
      : channels_(channels), height_(height), width_(width),
        data_(std::move(data)) {
    if (channels == 0 || height == 0 || width == 0) {
      fail(ErrorKind::kDimension, "feature map dimensions must be positive");
    }
    if (data_.size() != channels * height * width) {
      fail(ErrorKind::kDimension,
           "feature map data length " + std::to_string(data_.size()) +
               " != C*H*W = " + std::to_string(channels * height * width));
    }
    for (float v : data_) {
      if (!std::isfinite(v)) {
        fail(ErrorKind::kParameter, "feature map contains a non-finite value");
      }
    }
  }

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }
  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * height_ + y) * width_ + x];
  }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

struct PatchSpec {
  std::size_t window_h = 2;
  std::size_t window_w = 2;
  std::size_t stride = 2;

  std::size_t dimension(std::size_t channels) const {
    return window_h * window_w * channels;
  }

  void validate() const {
    if (window_h == 0 || window_w == 0 || stride == 0) {
      fail(ErrorKind::kParameter,
           "patch window and stride must be positive");
    }
  }

  void validate_for(const FeatureMap& map) const {
    validate();
    if (window_h > map.height() || window_w > map.width()) {
      fail(ErrorKind::kDimension,
           "window " + std::to_string(window_h) + "x" +
               std::to_string(window_w) + " larger than map " +
               std::to_string(map.height()) + "x" +
               std::to_string(map.width()));
    }
  }

  friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

/// A flattened window, channel-major: index (c * window_h + dy) * window_w + dx.
struct Patch {
  std::vector<float> vector;
  std::size_t origin_y = 0;
  std::size_t origin_x = 0;
};

/// Window start offsets along one axis. Positions that would overhang are
/// dropped; with `flush_edge` one extra window is added flush with the far
/// edge when the regular grid leaves a margin.
inline std::vector<std::size_t> window_origins(std::size_t extent,
                                               std::size_t window,
                                               std::size_t stride,
                                               bool flush_edge = false) {
  std::vector<std::size_t> out;
  if (window > extent || stride == 0) return out;
  for (std::size_t p = 0; p + window <= extent; p += stride) out.push_back(p);
  if (flush_edge && out.back() + window < extent) {
    out.push_back(extent - window);
  }
  return out;
}

inline std::size_t patch_count(std::size_t height, std::size_t width,
                               const PatchSpec& spec) {
  if (spec.window_h > height || spec.window_w > width) return 0;
  return ((height - spec.window_h) / spec.stride + 1) *
         ((width - spec.window_w) / spec.stride + 1);
}

/// Copies the window at (y, x) into `out` (length D).
inline void copy_window(const FeatureMap& map, const PatchSpec& spec,
                        std::size_t y, std::size_t x, std::span<float> out) {
  std::size_t k = 0;
  for (std::size_t c = 0; c < map.channels(); ++c) {
    for (std::size_t dy = 0; dy < spec.window_h; ++dy) {
      const float* row = &map.data()[(c * map.height() + y + dy) * map.width() + x];
      for (std::size_t dx = 0; dx < spec.window_w; ++dx) out[k++] = row[dx];
    }
  }
}

inline Patch cut_patch(const FeatureMap& map, const PatchSpec& spec,
                       std::size_t y, std::size_t x) {
  if (y + spec.window_h > map.height() || x + spec.window_w > map.width()) {
    fail(ErrorKind::kDimension, "window at (" + std::to_string(y) + ", " +
                                    std::to_string(x) + ") exceeds map");
  }
  Patch p;
  p.vector.resize(spec.dimension(map.channels()));
  p.origin_y = y;
  p.origin_x = x;
  copy_window(map, spec, y, x, p.vector);
  return p;
}

namespace detail {

inline std::vector<Patch> extract_at(const FeatureMap& map,
                                     const PatchSpec& spec, bool flush) {
  spec.validate_for(map);
  const auto ys = window_origins(map.height(), spec.window_h, spec.stride, flush);
  const auto xs = window_origins(map.width(), spec.window_w, spec.stride, flush);
  std::vector<Patch> patches;
  patches.reserve(ys.size() * xs.size());
  for (std::size_t y : ys) {
    for (std::size_t x : xs) patches.push_back(cut_patch(map, spec, y, x));
  }
  return patches;
}

}  // namespace detail

/// All windows on the stride grid, row-major scan order.
inline std::vector<Patch> extract_patches(const FeatureMap& map,
                                          const PatchSpec& spec) {
  return detail::extract_at(map, spec, false);
}

/// Stride grid plus one edge-flush window per axis, so every cell is covered.
inline std::vector<Patch> extract_covering_patches(const FeatureMap& map,
                                                   const PatchSpec& spec) {
  return detail::extract_at(map, spec, true);
}

/// Overlap-average reassembly. Every output cell is the mean of all patch
/// values covering it; a cell with no cover is a coverage error.
inline FeatureMap assemble_patches(std::span<const Patch> patches,
                                   const PatchSpec& spec, std::size_t channels,
                                   std::size_t height, std::size_t width) {
  spec.validate();
  const std::size_t dim = spec.dimension(channels);
  std::vector<double> sum(channels * height * width, 0.0);
  std::vector<std::uint32_t> count(height * width, 0);
  for (const Patch& p : patches) {
    if (p.vector.size() != dim) {
      fail(ErrorKind::kDimension, "patch length " +
                                      std::to_string(p.vector.size()) +
                                      " != " + std::to_string(dim));
    }
    if (p.origin_y + spec.window_h > height ||
        p.origin_x + spec.window_w > width) {
      fail(ErrorKind::kDimension, "patch origin (" +
                                      std::to_string(p.origin_y) + ", " +
                                      std::to_string(p.origin_x) +
                                      ") places window outside the map");
    }
    std::size_t k = 0;
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t dy = 0; dy < spec.window_h; ++dy) {
        const std::size_t row = (c * height + p.origin_y + dy) * width + p.origin_x;
        for (std::size_t dx = 0; dx < spec.window_w; ++dx) {
          sum[row + dx] += p.vector[k++];
        }
      }
    }
    for (std::size_t dy = 0; dy < spec.window_h; ++dy) {
      for (std::size_t dx = 0; dx < spec.window_w; ++dx) {
        ++count[(p.origin_y + dy) * width + p.origin_x + dx];
      }
    }
  }
  for (std::size_t i = 0; i < count.size(); ++i) {
    if (count[i] == 0) {
      fail(ErrorKind::kCoverage, "cell (" + std::to_string(i / width) + ", " +
                                     std::to_string(i % width) +
                                     ") is not covered by any patch");
    }
  }
  std::vector<float> out(sum.size());
  const std::size_t plane = height * width;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t n = count[i % plane];
    out[i] = n == 1 ? static_cast<float>(sum[i])
                    : static_cast<float>(sum[i] / static_cast<double>(n));
  }
  return FeatureMap(channels, height, width, std::move(out));
}

}  // namespace kxfer

#endif  // KXFER_TENSOR_HPP_
