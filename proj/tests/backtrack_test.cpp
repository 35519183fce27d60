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

#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

#include "kxfer/kxfer.hpp"
#include "test_util.hpp"

namespace kxfer {
namespace {

struct Fixture {
  std::vector<LabeledMap> style;
  FeatureMap src;
  KnowledgeLibrary lib;
  BhkmIndex index;
  TransferOptions opts;
  TranslationResult result;
};

Fixture stylization(SwapMode mode) {
  std::vector<LabeledMap> style{{"wheat.png", testing::procedural_image(40, 36, 20)},
                                {"stars.png", testing::procedural_image(28, 44, 21)}};
  FeatureMap src = testing::procedural_image(25, 31, 22);
  KnowledgeLibrary lib = build_library("style", style, {2, 2, 2}, 0.97f);
  BhkmIndex index = build_index(lib, IndexConfig{});
  TransferOptions opts;
  opts.mode = mode;
  TranslationResult result = translate(src, lib, index, opts);
  return {std::move(style), std::move(src), std::move(lib), std::move(index), opts, std::move(result)};
}

TEST(Backtrack, ProvenanceReExtraction) {
  for (SwapMode mode : {SwapMode::kGeometric, SwapMode::kStatistics}) {
    const Fixture f = stylization(mode);
    const auto entries = backtrack(f.result, f.src, f.lib, f.opts);
    ASSERT_EQ(entries.size(), f.result.matches.size());
    for (const auto& e : entries) {
      const auto it = std::find_if(f.style.begin(), f.style.end(),
                                   [&](const LabeledMap& m) { return m.name == e.source_image; });
      ASSERT_NE(it, f.style.end());
      const Patch cut = cut_patch(it->map, f.lib.spec(), e.source_y, e.source_x);
      ASSERT_NEAR(ncc(cut.vector, f.lib.vector(e.record_id)), 1.0, 1e-5);
      ASSERT_EQ(e.mode, mode);
    }
  }
}

TEST(Backtrack, SelfLibraryPointsBackAtQuery) {
  const FeatureMap src = testing::procedural_image(13, 11, 23);
  const std::vector<LabeledMap> maps{{"self.png", src}};
  const auto lib = build_library("self", maps, {2, 2, 1}, kNoMerging);
  IndexConfig cfg;
  cfg.branching = {8, 8};
  cfg.bands = 4;
  cfg.probes = 8;
  const auto index = build_index(lib, cfg);
  TransferOptions opts;
  opts.query = {8, 1, 0, false};
  const auto result = translate(src, lib, index, opts);
  for (const auto& e : backtrack(result, src, lib, opts)) {
    EXPECT_EQ(e.source_image, "self.png");
    EXPECT_EQ(e.source_y, e.query_y);
    EXPECT_EQ(e.source_x, e.query_x);
  }
}

TEST(Backtrack, SingleRecordLibrary) {
  const FeatureMap src = testing::procedural_image(8, 8, 24);
  const std::vector<LabeledMap> maps{{"one.png", testing::procedural_image(2, 2, 25)}};
  const auto lib = build_library("one", maps, {2, 2, 2}, 0.97f);
  const auto index = build_index(lib, IndexConfig{});
  const auto result = translate(src, lib, index, TransferOptions{});
  const auto entries = backtrack(result, src, lib, TransferOptions{});
  EXPECT_EQ(entries.size(), 49u);
  for (const auto& e : entries) {
    EXPECT_EQ(e.source_image, "one.png");
    EXPECT_EQ(e.source_y, 0u);
    EXPECT_EQ(e.source_x, 0u);
  }
}

TEST(Backtrack, JsonLinesSchema) {
  const Fixture f = stylization(SwapMode::kStatistics);
  const auto entries = backtrack(f.result, f.src, f.lib, f.opts);
  const std::string text = to_jsonl(entries);
  ASSERT_EQ(text.back(), '\n');
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  const std::vector<std::string> keys{"q", "qy", "qx", "rec", "img", "sy", "sx", "score", "mode"};
  while (std::getline(in, line)) {
    const auto j = nlohmann::ordered_json::parse(line);
    std::vector<std::string> got;
    for (const auto& [k, v] : j.items()) got.push_back(k);
    ASSERT_EQ(got, keys);
    EXPECT_EQ(j["q"].get<std::size_t>(), n);
    EXPECT_EQ(j["mode"], "statistics");
    EXPECT_TRUE(j["score"].is_number());
    EXPECT_TRUE(j["img"].is_string());
    ++n;
  }
  EXPECT_EQ(n, entries.size());
}

TEST(MatchList, RoundTripAndErrors) {
  const Fixture f = stylization(SwapMode::kGeometric);
  const MatchList list = make_match_list(f.result, f.src, f.lib, f.opts);
  const std::string bytes = encode_match_list(list);
  EXPECT_EQ(bytes.substr(0, 4), "KFMT");
  EXPECT_EQ(decode_match_list(bytes), list);
  for (std::size_t cut : {0ul, 5ul, 30ul, bytes.size() - 3}) {
    try {
      decode_match_list(bytes.substr(0, cut));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    }
  }
  const auto other = synthetic::random_library(10, 3, 26);
  try {
    backtrack(list, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCorruption);
  }
  MatchList bad = list;
  bad.entries[0].record_id = static_cast<std::uint32_t>(f.lib.size());
  try {
    backtrack(bad, f.lib);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCorruption);
  }
}

TEST(Overlay, DrawsLinksOnCanvas) {
  const Fixture f = stylization(SwapMode::kGeometric);
  const auto entries = backtrack(f.result, f.src, f.lib, f.opts);
  const FeatureMap canvas = render_backtrack_overlay(f.result.output, f.style, entries, f.lib.spec(), 16);
  EXPECT_EQ(canvas.width(), 31u + 4 + 44);
  EXPECT_GE(canvas.height(), 40u + 28);
  std::size_t red = 0;
  for (std::size_t y = 0; y < canvas.height(); ++y)
    for (std::size_t x = 0; x < canvas.width(); ++x)
      red += canvas.at(0, y, x) == 1.0f && canvas.at(1, y, x) == 0.0f && canvas.at(2, y, x) == 0.0f;
  EXPECT_GT(red, 16u);
}

}  // namespace
}  // namespace kxfer
