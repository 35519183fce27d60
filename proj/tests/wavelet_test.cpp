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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kxfer/wavelet.hpp"
#include "test_util.hpp"

namespace kxfer {
namespace {

using V = std::vector<float>;
const PatchSpec k2x2{2, 2, 1};

std::vector<double> band(const WaveletPacket& p, std::size_t b) {
  const auto s = p.component(b);
  return {s.begin(), s.end()};
}

TEST(HaarWpt, OneTwoThreeFour) {
  const V p{1, 2, 3, 4};
  const WaveletPacket w = haar_wpt(p, k2x2, 1);
  ASSERT_EQ(w.band_count, 4u);
  EXPECT_EQ(band(w, 0), std::vector<double>{5});
  EXPECT_EQ(band(w, 1), std::vector<double>{-1});
  EXPECT_EQ(band(w, 2), std::vector<double>{-2});
  EXPECT_EQ(band(w, 3), std::vector<double>{0});
  EXPECT_EQ(partial_band_vector(w, 4), (std::vector<double>{5, -1, -2, 0}));
  EXPECT_EQ(partial_band_vector(w, 1), std::vector<double>{5});
  // Parseval: 1+4+9+16 = 30 = 25+1+4+0
  double e = 0;
  for (double x : w.coeffs) e += x * x;
  EXPECT_DOUBLE_EQ(e, 30.0);
}

TEST(HaarWpt, ConstantPatch) {
  const float k = 0.7f;
  const WaveletPacket w = haar_wpt(V{k, k, k, k}, k2x2, 1);
  EXPECT_NEAR(w.coeffs[0], 2.0 * k, 1e-7);
  for (std::size_t b = 1; b < 4; ++b) EXPECT_EQ(w.coeffs[b], 0.0);
  const auto lo = partial_band_vector(haar_wpt(V{0.2f, 0.2f, 0.2f, 0.2f}, k2x2, 1), 1);
  const auto hi = partial_band_vector(haar_wpt(V{3, 3, 3, 3}, k2x2, 1), 1);
  EXPECT_NEAR((ncc<double, double>(lo, hi)), 1.0, 1e-12);
}

TEST(HaarWpt, BandsStackChannels) {
  // C=2: channel 0 = [1,2,3,4], channel 1 = [4,4,4,4]
  const V p{1, 2, 3, 4, 4, 4, 4, 4};
  const WaveletPacket w = haar_wpt(p, k2x2, 2);
  EXPECT_EQ(band(w, 0), (std::vector<double>{5, 8}));
  EXPECT_EQ(band(w, 1), (std::vector<double>{-1, 0}));
  EXPECT_EQ(band(w, 2), (std::vector<double>{-2, 0}));
  EXPECT_EQ(band(w, 3), (std::vector<double>{0, 0}));
}

TEST(HaarWpt, UnsupportedWindow) {
  try {
    haar_wpt(V(9, 1.0f), PatchSpec{3, 3, 1}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupportedWindow);
  }
  EXPECT_THROW(haar_wpt(V(6, 1.0f), PatchSpec{2, 3, 1}, 1), Error);
}

TEST(HaarWpt, PartialBandRange) {
  const WaveletPacket w = haar_wpt(V{1, 2, 3, 4}, k2x2, 1);
  for (std::size_t m : {0ul, 5ul}) {
    try {
      partial_band_vector(w, m);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kParameter);
    }
  }
}

TEST(InverseHaarWpt, Examples) {
  WaveletPacket zero = haar_wpt(V{1, 2, 3, 4}, k2x2, 1);
  std::fill(zero.coeffs.begin(), zero.coeffs.end(), 0.0);
  EXPECT_EQ(inverse_haar_wpt(zero), (std::vector<double>{0, 0, 0, 0}));
  WaveletPacket ll = zero;
  ll.coeffs[0] = 2 * 1.5;
  for (double x : inverse_haar_wpt(ll)) EXPECT_NEAR(x, 1.5, 1e-12);
}

// Reference: separable orthonormal Haar packet built from explicit
// Kronecker products of 1-D Walsh rows, for arbitrary power-of-two sides.
std::vector<std::vector<double>> walsh_rows(std::size_t n) {
  std::vector<std::vector<double>> h{{1.0}};
  while (h.size() < n) {
    const std::size_t m = h.size();
    std::vector<std::vector<double>> next(2 * m, std::vector<double>(2 * m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        next[i][j] = h[i][j];
        next[i][j + m] = h[i][j];
        next[i + m][j] = h[i][j];
        next[i + m][j + m] = -h[i][j];
      }
    h = next;
  }
  for (auto& r : h)
    for (double& x : r) x /= std::sqrt(double(n));
  return h;
}

TEST(HaarWpt, LargerWindowsAreOrthonormalAndLowFirst) {
  testing::Gen g(21);
  for (auto [wh, ww] : {std::pair{4ul, 4ul}, std::pair{2ul, 4ul}, std::pair{8ul, 2ul}}) {
    const std::size_t c = 2, d = wh * ww * c;
    const PatchSpec spec{wh, ww, 1};
    // constant patch: all energy in band 0
    const WaveletPacket flat = haar_wpt(V(d, 1.0f), spec, c);
    EXPECT_NEAR(flat.coeffs[0], std::sqrt(double(wh * ww)), 1e-9);
    for (std::size_t i = c; i < d; ++i) EXPECT_NEAR(flat.coeffs[i], 0.0, 1e-9);
    // every band is the projection onto a product of two Walsh rows
    const auto rh = walsh_rows(wh), rw = walsh_rows(ww);
    const V p = g.normals(d);
    const WaveletPacket w = haar_wpt(p, spec, c);
    for (std::size_t b = 0; b < wh * ww; ++b) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double coeff = w.coeffs[b * c + ch];
        bool found = false;
        for (std::size_t i = 0; i < wh && !found; ++i)
          for (std::size_t j = 0; j < ww && !found; ++j) {
            double s = 0;
            for (std::size_t y = 0; y < wh; ++y)
              for (std::size_t x = 0; x < ww; ++x) s += rh[i][y] * rw[j][x] * p[(ch * wh + y) * ww + x];
            found = std::abs(s - coeff) < 1e-5;
          }
        EXPECT_TRUE(found) << "band " << b;
      }
    }
    const auto back = inverse_haar_wpt(w);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(back[i], p[i], 1e-5);
  }
}

TEST(HaarWpt, InvariantSweep) {
  testing::Gen g(22);
  for (int t = 0; t < 3000; ++t) {
    const std::size_t c = 1 + g.below(8);
    const V a = g.normals(4 * c), b = g.normals(4 * c);
    const WaveletPacket wa = haar_wpt(a, k2x2, c), wb = haar_wpt(b, k2x2, c);
    double ea = 0, ep = 0;
    for (float x : a) ea += double(x) * x;
    for (double x : wa.coeffs) ep += x * x;
    ASSERT_NEAR(ep, ea, 1e-5 * ea);
    const auto back = inverse_haar_wpt(wa);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(back[i], a[i], 1e-5 * std::sqrt(ea));
    ASSERT_NEAR((ncc<double, double>(partial_band_vector(wa, 4), partial_band_vector(wb, 4))),
                ncc(a, b), 1e-5);
    // linearity
    const double al = g.uniform(-2, 2), be = g.uniform(-2, 2);
    V mix(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mix[i] = float(al * a[i] + be * b[i]);
    const WaveletPacket wm = haar_wpt(mix, k2x2, c);
    for (std::size_t i = 0; i < mix.size(); ++i) {
      ASSERT_NEAR(wm.coeffs[i], al * wa.coeffs[i] + be * wb.coeffs[i], 1e-5);
    }
  }
}

}  // namespace
}  // namespace kxfer
