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

#ifndef KXFER_OVERLAY_HPP_
#define KXFER_OVERLAY_HPP_

#include <algorithm>
#include <array>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "kxfer/backtrack.hpp"
#include "kxfer/library.hpp"
#include "kxfer/tensor.hpp"

namespace kxfer {

/// Side-by-side inspection image: the translated source on the left, the
/// knowledge source images stacked on the right. For up to `max_links`
/// entries (evenly spaced over the scan) the query window is outlined in
/// green, the matched knowledge window in red, joined by a red line.
inline FeatureMap render_backtrack_overlay(const FeatureMap& source,
                                           const std::vector<LabeledMap>& knowledge,
                                           const std::vector<BacktrackEntry>& entries,
                                           const PatchSpec& window, std::size_t max_links = 64) {
  auto require_rgb = [](const FeatureMap& m, const std::string& name) {
    if (m.channels() != 3) {
      fail(ErrorKind::kDimension, "overlay needs RGB maps; '" + name + "' has C = " +
                                      std::to_string(m.channels()));
    }
  };
  require_rgb(source, "source");
  constexpr std::size_t kGap = 4;
  std::size_t right_w = 0;
  std::size_t right_h = 0;
  std::map<std::string, std::array<std::size_t, 2>> offsets;  // name -> (y, x)
  for (const auto& k : knowledge) {
    require_rgb(k.map, k.name);
    offsets[k.name] = {right_h, source.width() + kGap};
    right_h += k.map.height() + kGap;
    right_w = std::max(right_w, k.map.width());
  }
  const std::size_t height = std::max(source.height(), right_h);
  const std::size_t width = source.width() + kGap + right_w;
  FeatureMap canvas(3, height, width);

  auto blit = [&](const FeatureMap& m, std::size_t oy, std::size_t ox) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < m.height(); ++y) {
        for (std::size_t x = 0; x < m.width(); ++x) canvas.at(c, oy + y, ox + x) = m.at(c, y, x);
      }
    }
  };
  blit(source, 0, 0);
  for (const auto& k : knowledge) blit(k.map, offsets[k.name][0], offsets[k.name][1]);

  auto plot = [&](long y, long x, std::array<float, 3> rgb) {
    if (y < 0 || x < 0 || y >= static_cast<long>(height) || x >= static_cast<long>(width)) return;
    for (std::size_t c = 0; c < 3; ++c) {
      canvas.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = rgb[c];
    }
  };
  auto rect = [&](long y, long x, std::array<float, 3> rgb) {
    const long h = static_cast<long>(window.window_h);
    const long w = static_cast<long>(window.window_w);
    for (long dx = -1; dx <= w; ++dx) {
      plot(y - 1, x + dx, rgb);
      plot(y + h, x + dx, rgb);
    }
    for (long dy = -1; dy <= h; ++dy) {
      plot(y + dy, x - 1, rgb);
      plot(y + dy, x + w, rgb);
    }
  };
  auto line = [&](long y0, long x0, long y1, long x1, std::array<float, 3> rgb) {
    const long dx = std::labs(x1 - x0);
    const long dy = -std::labs(y1 - y0);
    const long sx = x0 < x1 ? 1 : -1;
    const long sy = y0 < y1 ? 1 : -1;
    long err = dx + dy;
    while (true) {
      plot(y0, x0, rgb);
      if (x0 == x1 && y0 == y1) break;
      const long e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  };

  const std::array<float, 3> green{0.0f, 1.0f, 0.0f};
  const std::array<float, 3> red{1.0f, 0.0f, 0.0f};
  const std::size_t links = std::min(max_links, entries.size());
  for (std::size_t i = 0; i < links; ++i) {
    const auto& e = entries[i * entries.size() / links];
    auto it = offsets.find(e.source_image);
    if (it == offsets.end()) {
      fail(ErrorKind::kLookup, "no knowledge image named '" + e.source_image + "' for overlay");
    }
    const long qy = e.query_y;
    const long qx = e.query_x;
    const long ky = static_cast<long>(it->second[0] + e.source_y);
    const long kx = static_cast<long>(it->second[1] + e.source_x);
    line(qy + static_cast<long>(window.window_h / 2), qx + static_cast<long>(window.window_w / 2),
         ky + static_cast<long>(window.window_h / 2), kx + static_cast<long>(window.window_w / 2),
         red);
    rect(qy, qx, green);
    rect(ky, kx, red);
  }
  return canvas;
}

}  // namespace kxfer

#endif  // KXFER_OVERLAY_HPP_
