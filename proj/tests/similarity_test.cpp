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

#include "kxfer/similarity.hpp"
#include "test_util.hpp"

namespace kxfer {
namespace {

using V = std::vector<float>;

TEST(Ncc, Examples) {
  const V a{0.3f, -1.2f, 4.0f};
  EXPECT_NEAR(ncc(a, a), 1.0, 1e-12);
  EXPECT_EQ(ncc(V{1, 0}, V{0, 1}), 0.0);
  EXPECT_NEAR(ncc(V{1, 2}, V{2, 4}), 1.0, 1e-12);
}

TEST(NccDistance, Examples) {
  const V a{0.3f, -1.2f, 4.0f};
  const V neg{-0.3f, 1.2f, -4.0f};
  EXPECT_NEAR(ncc_distance(a, a), 0.0, 1e-12);
  EXPECT_NEAR(ncc_distance(a, neg), 2.0, 1e-12);
  EXPECT_EQ(ncc_distance(V{1, 0}, V{0, 1}), 1.0);
}

TEST(Ncc, NoMeanRemoval) {
  // Cosine of [1,2] and [2,1] is 0.8; with mean removal it would be -1.
  EXPECT_NEAR(ncc(V{1, 2}, V{2, 1}), 0.8, 1e-12);
}

TEST(Ncc, ZeroNormGivesZero) {
  EXPECT_EQ(ncc(V{0, 0, 0}, V{1, 2, 3}), 0.0);
  EXPECT_EQ(ncc(V{1, 2, 3}, V{0, 0, 0}), 0.0);
  EXPECT_EQ(ncc(V{0, 0}, V{0, 0}), 0.0);
}

TEST(Ncc, LengthMismatchIsDimensionError) {
  try {
    ncc(V{1, 2}, V{1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
  EXPECT_THROW(ncc(V{}, V{}), Error);
}

TEST(Ncc, PropertySweep) {
  testing::Gen g(11);
  for (int t = 0; t < 5000; ++t) {
    const std::size_t d = 1 + g.below(64);
    V a = g.normals(d), b = g.normals(d);
    const double s = ncc(a, b);
    ASSERT_GE(s, -1.0 - 1e-6);
    ASSERT_LE(s, 1.0 + 1e-6);
    ASSERT_EQ(s, ncc(b, a));
    ASSERT_NEAR(s, testing::ref_cosine(a.data(), b.data(), d), 1e-12);
    const float alpha = static_cast<float>(g.uniform(1e-3, 1e3));
    V scaled = a;
    for (float& x : scaled) x *= alpha;
    ASSERT_NEAR(ncc(scaled, b), s, 1e-6);
    const double dist = ncc_distance(a, b);
    ASSERT_GE(dist, -1e-6);
    ASSERT_LE(dist, 2.0 + 1e-6);
  }
}

}  // namespace
}  // namespace kxfer
