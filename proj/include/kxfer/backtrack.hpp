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

#ifndef KXFER_BACKTRACK_HPP_
#define KXFER_BACKTRACK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kxfer/binary_io.hpp"
#include "kxfer/library.hpp"
#include "kxfer/transfer.hpp"

namespace kxfer {

/// Everything needed to explain a translation after the fact.
struct MatchList {
  struct Entry {
    std::uint32_t query_index = 0;
    std::uint32_t query_y = 0;
    std::uint32_t query_x = 0;
    std::uint32_t record_id = 0;
    double score = 0.0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::uint64_t library_hash = 0;
  std::string library_name;
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  PatchSpec query_spec;
  SwapMode mode = SwapMode::kGeometric;
  StatsScope stats_scope = StatsScope::kPooled;
  std::vector<Entry> entries;

  friend bool operator==(const MatchList&, const MatchList&) = default;
};

inline MatchList make_match_list(const TranslationResult& result, const FeatureMap& src,
                                 const KnowledgeLibrary& lib, const TransferOptions& opts) {
  MatchList list;
  list.library_hash = library_hash(lib);
  list.library_name = lib.name();
  list.channels = static_cast<std::uint32_t>(src.channels());
  list.height = static_cast<std::uint32_t>(src.height());
  list.width = static_cast<std::uint32_t>(src.width());
  list.query_spec = opts.query_spec;
  list.mode = result.mode;
  list.stats_scope = opts.stats_scope;
  for (std::size_t i = 0; i < result.matches.size(); ++i) {
    list.entries.push_back({static_cast<std::uint32_t>(i), result.query_origins[i][0],
                            result.query_origins[i][1], result.matches[i].record_id,
                            result.matches[i].score});
  }
  return list;
}

// Match list file (.kfm), little-endian:
//   "KFMT" | u16 version = 1 | u64 library hash | u16 len + library name
//   | u32 C, H, W of the source map | u32 W_h, W_w, stride
//   | u8 mode | u8 stats scope | u32 count
//   | count x (u32 query index | u32 qy | u32 qx | u32 record id | f64 score)
inline constexpr std::uint16_t kMatchListVersion = 1;

inline std::string encode_match_list(const MatchList& list) {
  io::ByteWriter w;
  w.bytes("KFMT");
  w.u16(kMatchListVersion);
  w.u64(list.library_hash);
  w.short_string(list.library_name);
  w.u32(list.channels);
  w.u32(list.height);
  w.u32(list.width);
  w.u32(static_cast<std::uint32_t>(list.query_spec.window_h));
  w.u32(static_cast<std::uint32_t>(list.query_spec.window_w));
  w.u32(static_cast<std::uint32_t>(list.query_spec.stride));
  w.u8(static_cast<std::uint8_t>(list.mode));
  w.u8(static_cast<std::uint8_t>(list.stats_scope));
  w.u32(static_cast<std::uint32_t>(list.entries.size()));
  for (const auto& e : list.entries) {
    w.u32(e.query_index);
    w.u32(e.query_y);
    w.u32(e.query_x);
    w.u32(e.record_id);
    w.f64(e.score);
  }
  return std::move(w).buffer();
}

inline MatchList decode_match_list(std::string_view bytes, const std::string& what = "kfm") {
  io::ByteReader r(bytes, what);
  r.expect_magic("KFMT");
  const auto version = r.u16("version");
  if (version != kMatchListVersion) r.error("unsupported version " + std::to_string(version));
  MatchList list;
  list.library_hash = r.u64("library hash");
  list.library_name = r.short_string("library name");
  list.channels = r.u32("C");
  list.height = r.u32("H");
  list.width = r.u32("W");
  list.query_spec.window_h = r.u32("W_h");
  list.query_spec.window_w = r.u32("W_w");
  list.query_spec.stride = r.u32("stride");
  const auto mode = r.u8("mode");
  const auto scope = r.u8("stats scope");
  if (mode > 1 || scope > 1) r.error("bad mode byte");
  list.mode = static_cast<SwapMode>(mode);
  list.stats_scope = static_cast<StatsScope>(scope);
  const std::size_t n = r.u32("match count");
  if (n > r.remaining() / 24) r.require(n * 24, "matches");
  list.entries.resize(n);
  for (auto& e : list.entries) {
    e.query_index = r.u32("query index");
    e.query_y = r.u32("qy");
    e.query_x = r.u32("qx");
    e.record_id = r.u32("record id");
    e.score = r.f64("score");
  }
  r.expect_end();
  return list;
}

inline void save_match_list(const MatchList& list, const std::string& path) {
  io::write_file(path, encode_match_list(list));
}

inline MatchList load_match_list(const std::string& path) {
  return decode_match_list(io::read_file(path), path);
}

struct BacktrackEntry {
  std::uint32_t query_index = 0;
  std::uint32_t query_y = 0;
  std::uint32_t query_x = 0;
  std::uint32_t record_id = 0;
  std::string source_image;
  std::uint32_t source_y = 0;
  std::uint32_t source_x = 0;
  double score = 0.0;
  SwapMode mode = SwapMode::kGeometric;
};

/// Resolves every match to the image and window its knowledge came from.
inline std::vector<BacktrackEntry> backtrack(const MatchList& list, const KnowledgeLibrary& lib) {
  if (list.library_hash != library_hash(lib)) {
    fail(ErrorKind::kCorruption, "match list was produced with a different library than '" +
                                     lib.name() + "' (content hash mismatch)");
  }
  std::vector<BacktrackEntry> out;
  out.reserve(list.entries.size());
  for (const auto& e : list.entries) {
    if (e.record_id >= lib.size()) {
      fail(ErrorKind::kCorruption, "record id " + std::to_string(e.record_id) +
                                       " out of range for library of " +
                                       std::to_string(lib.size()) + " records");
    }
    const Provenance& p = lib.provenance(e.record_id);
    out.push_back({e.query_index, e.query_y, e.query_x, e.record_id,
                   lib.image_names()[p.image_id], p.origin_y, p.origin_x, e.score, list.mode});
  }
  return out;
}

inline std::vector<BacktrackEntry> backtrack(const TranslationResult& result,
                                             const FeatureMap& src, const KnowledgeLibrary& lib,
                                             const TransferOptions& opts) {
  return backtrack(make_match_list(result, src, lib, opts), lib);
}

/// One JSON object per line with keys q, qy, qx, rec, img, sy, sx, score,
/// mode in that order; LF terminated.
inline std::string to_jsonl(const std::vector<BacktrackEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["q"] = e.query_index;
    j["qy"] = e.query_y;
    j["qx"] = e.query_x;
    j["rec"] = e.record_id;
    j["img"] = e.source_image;
    j["sy"] = e.source_y;
    j["sx"] = e.source_x;
    j["score"] = e.score;
    j["mode"] = to_string(e.mode);
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace kxfer

#endif  // KXFER_BACKTRACK_HPP_
