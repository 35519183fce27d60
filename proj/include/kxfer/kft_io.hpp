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

#ifndef KXFER_KFT_IO_HPP_
#define KXFER_KFT_IO_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "kxfer/binary_io.hpp"
#include "kxfer/tensor.hpp"

// Feature tensor interchange file:
//   "KFT1" | u32 C | u32 H | u32 W | C*H*W f32, channel-major (c, h, w)
// All integers and floats little-endian.

namespace kxfer {

inline std::string encode_kft(const FeatureMap& map) {
  io::ByteWriter w;
  w.bytes("KFT1");
  w.u32(static_cast<std::uint32_t>(map.channels()));
  w.u32(static_cast<std::uint32_t>(map.height()));
  w.u32(static_cast<std::uint32_t>(map.width()));
  w.f32s(map.data());
  return std::move(w).buffer();
}

inline FeatureMap decode_kft(std::string_view bytes,
                             const std::string& what = "kft") {
  io::ByteReader r(bytes, what);
  r.expect_magic("KFT1");
  const std::uint64_t c = r.u32("C");
  const std::uint64_t h = r.u32("H");
  const std::uint64_t w = r.u32("W");
  if (c == 0 || h == 0 || w == 0) r.error("zero tensor dimension");
  const std::uint64_t n = c * h * w;
  if (n > r.remaining() / 4) r.require(4 * n, "tensor data");
  std::vector<float> data(n);
  r.f32s(data, "tensor data");
  r.expect_end();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      fail(ErrorKind::kFormat, what + ": non-finite scalar at byte offset " +
                                   std::to_string(16 + 4 * i));
    }
  }
  return FeatureMap(c, h, w, std::move(data));
}

inline void save_kft(const FeatureMap& map, const std::string& path) {
  io::write_file(path, encode_kft(map));
}

inline FeatureMap load_kft(const std::string& path) {
  return decode_kft(io::read_file(path), path);
}

}  // namespace kxfer

#endif  // KXFER_KFT_IO_HPP_
