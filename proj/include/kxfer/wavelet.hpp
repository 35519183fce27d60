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

#ifndef KXFER_WAVELET_HPP_
#define KXFER_WAVELET_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "kxfer/error.hpp"
#include "kxfer/tensor.hpp"

namespace kxfer {

/// Full Haar wavelet packet of one patch. Band b occupies
/// coeffs[b * band_length, (b + 1) * band_length); each band stacks one
/// coefficient per channel. Bands run low frequency first (LL, LH, HL, HH
/// for a 2x2 window).
struct WaveletPacket {
  std::vector<double> coeffs;
  std::size_t band_count = 0;
  std::size_t band_length = 0;
  std::size_t window_h = 0;
  std::size_t window_w = 0;

  std::span<const double> component(std::size_t band) const {
    return std::span<const double>(coeffs).subspan(band * band_length, band_length);
  }
};

/// Orthonormal separable Haar packet transform for a fixed window and
/// channel count. Along each axis the full packet basis is the normalised
/// Walsh basis; 2-D bands are ordered by total sequency, then row-major.
class HaarPacketTransform {
 public:
  HaarPacketTransform(std::size_t window_h, std::size_t window_w,
                      std::size_t channels)
      : window_h_(window_h), window_w_(window_w), channels_(channels) {
    if (!std::has_single_bit(window_h) || !std::has_single_bit(window_w)) {
      fail(ErrorKind::kUnsupportedWindow,
           "Haar packet needs power-of-two windows, got " +
               std::to_string(window_h) + "x" + std::to_string(window_w));
    }
    if (channels == 0) fail(ErrorKind::kDimension, "channel count must be positive");
    basis_y_ = walsh_basis(window_h);
    basis_x_ = walsh_basis(window_w);
    for (std::size_t fy = 0; fy < window_h; ++fy) {
      for (std::size_t fx = 0; fx < window_w; ++fx) bands_.push_back({fy, fx});
    }
    std::stable_sort(bands_.begin(), bands_.end(), [](const Band& a, const Band& b) {
      return a.fy + a.fx < b.fy + b.fx;
    });
  }

  std::size_t band_count() const { return window_h_ * window_w_; }
  std::size_t band_length() const { return channels_; }
  std::size_t dimension() const { return band_count() * channels_; }

  /// Writes the first `bands` components (bands * C values) into `out`.
  template <typename T>
  void forward(std::span<const T> patch, std::span<double> out,
               std::size_t bands) const {
    check_patch(patch.size());
    const std::size_t area = window_h_ * window_w_;
    if (area == 4) {
      for (std::size_t c = 0; c < channels_; ++c) {
        const double p00 = patch[c * 4 + 0];
        const double p01 = patch[c * 4 + 1];
        const double p10 = patch[c * 4 + 2];
        const double p11 = patch[c * 4 + 3];
        const double vals[4] = {
            (p00 + p01 + p10 + p11) / 2.0, (p00 - p01 + p10 - p11) / 2.0,
            (p00 + p01 - p10 - p11) / 2.0, (p00 - p01 - p10 + p11) / 2.0};
        for (std::size_t b = 0; b < bands; ++b) out[b * channels_ + c] = vals[b];
      }
      return;
    }
    for (std::size_t b = 0; b < bands; ++b) {
      const auto& hy = basis_y_[bands_[b].fy];
      const auto& hx = basis_x_[bands_[b].fx];
      for (std::size_t c = 0; c < channels_; ++c) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < window_h_; ++dy) {
          double row = 0.0;
          for (std::size_t dx = 0; dx < window_w_; ++dx) {
            row += hx[dx] * static_cast<double>(patch[(c * window_h_ + dy) * window_w_ + dx]);
          }
          acc += hy[dy] * row;
        }
        out[b * channels_ + c] = acc;
      }
    }
  }

  template <typename T>
  WaveletPacket forward(std::span<const T> patch) const {
    WaveletPacket packet;
    packet.coeffs.resize(dimension());
    packet.band_count = band_count();
    packet.band_length = channels_;
    packet.window_h = window_h_;
    packet.window_w = window_w_;
    forward(patch, std::span<double>(packet.coeffs), band_count());
    return packet;
  }

  std::vector<double> inverse(const WaveletPacket& packet) const {
    if (packet.coeffs.size() != dimension() || packet.band_count != band_count()) {
      fail(ErrorKind::kDimension, "wavelet packet shape does not match transform");
    }
    std::vector<double> patch(dimension(), 0.0);
    for (std::size_t b = 0; b < band_count(); ++b) {
      const auto& hy = basis_y_[bands_[b].fy];
      const auto& hx = basis_x_[bands_[b].fx];
      for (std::size_t c = 0; c < channels_; ++c) {
        const double coeff = packet.coeffs[b * channels_ + c];
        if (coeff == 0.0) continue;
        for (std::size_t dy = 0; dy < window_h_; ++dy) {
          for (std::size_t dx = 0; dx < window_w_; ++dx) {
            patch[(c * window_h_ + dy) * window_w_ + dx] += coeff * hy[dy] * hx[dx];
          }
        }
      }
    }
    return patch;
  }

 private:
  struct Band {
    std::size_t fy;
    std::size_t fx;
  };

  void check_patch(std::size_t length) const {
    if (length != dimension()) {
      fail(ErrorKind::kDimension, "patch length " + std::to_string(length) +
                                      " != " + std::to_string(dimension()));
    }
  }

  // Rows of the normalised Sylvester-Hadamard matrix, sorted by sequency
  // (sign-change count), which equals the full Haar packet basis.
  static std::vector<std::vector<double>> walsh_basis(std::size_t n) {
    std::vector<std::vector<int>> h{{1}};
    while (h.size() < n) {
      const std::size_t m = h.size();
      std::vector<std::vector<int>> next(2 * m, std::vector<int>(2 * m));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          next[i][j] = h[i][j];
          next[i][j + m] = h[i][j];
          next[i + m][j] = h[i][j];
          next[i + m][j + m] = -h[i][j];
        }
      }
      h = std::move(next);
    }
    auto sequency = [](const std::vector<int>& row) {
      std::size_t changes = 0;
      for (std::size_t i = 1; i < row.size(); ++i) changes += row[i] != row[i - 1];
      return changes;
    };
    std::stable_sort(h.begin(), h.end(), [&](const auto& a, const auto& b) {
      return sequency(a) < sequency(b);
    });
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<std::vector<double>> basis;
    for (const auto& row : h) {
      std::vector<double> r(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) r[i] = row[i] * scale;
      basis.push_back(std::move(r));
    }
    return basis;
  }

  std::size_t window_h_;
  std::size_t window_w_;
  std::size_t channels_;
  std::vector<std::vector<double>> basis_y_;
  std::vector<std::vector<double>> basis_x_;
  std::vector<Band> bands_;
};

template <typename T>
WaveletPacket haar_wpt(std::span<const T> patch, const PatchSpec& spec,
                       std::size_t channels) {
  return HaarPacketTransform(spec.window_h, spec.window_w, channels).forward(patch);
}

inline WaveletPacket haar_wpt(std::span<const float> patch, const PatchSpec& spec,
                              std::size_t channels) {
  return haar_wpt<float>(patch, spec, channels);
}

/// First `bands` components concatenated, low frequency first.
inline std::vector<double> partial_band_vector(const WaveletPacket& packet,
                                               std::size_t bands) {
  if (bands < 1 || bands > packet.band_count) {
    fail(ErrorKind::kParameter, "band count " + std::to_string(bands) +
                                    " outside [1, " +
                                    std::to_string(packet.band_count) + "]");
  }
  return {packet.coeffs.begin(),
          packet.coeffs.begin() + static_cast<std::ptrdiff_t>(bands * packet.band_length)};
}

inline std::vector<double> inverse_haar_wpt(const WaveletPacket& packet) {
  return HaarPacketTransform(packet.window_h, packet.window_w, packet.band_length)
      .inverse(packet);
}

}  // namespace kxfer

#endif  // KXFER_WAVELET_HPP_
