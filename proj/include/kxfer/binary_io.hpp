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

#ifndef KXFER_BINARY_IO_HPP_
#define KXFER_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "kxfer/error.hpp"

// Little-endian encode/decode helpers shared by the .kft, .gpkl, .bhkm and
// match-list formats. All multi-byte fields on disk are little-endian.

namespace kxfer::io {

static_assert(std::numeric_limits<float>::is_iec559, "IEEE-754 float required");

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

class ByteWriter {
 public:
  void bytes(std::string_view raw) { buf_.append(raw); }

  template <typename U>
  void uint(U value) {
    static_assert(std::is_unsigned_v<U>);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((value >> (8 * i)) & 0xFFu));
    }
  }

  void u8(std::uint8_t v) { uint(v); }
  void u16(std::uint16_t v) { uint(v); }
  void u32(std::uint32_t v) { uint(v); }
  void u64(std::uint64_t v) { uint(v); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void f32s(std::span<const float> values) {
    buf_.reserve(buf_.size() + 4 * values.size());
    for (float v : values) f32(v);
  }

  /// u16 length prefix followed by the raw UTF-8 bytes.
  void short_string(std::string_view s) {
    if (s.size() > 0xFFFFu) {
      fail(ErrorKind::kParameter, "string longer than 65535 bytes");
    }
    u16(static_cast<std::uint16_t>(s.size()));
    bytes(s);
  }

  const std::string& buffer() const& { return buf_; }
  std::string buffer() && { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string what)
      : data_(data), what_(std::move(what)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  void require(std::size_t n, std::string_view field) const {
    if (remaining() < n) {
      fail(ErrorKind::kFormat,
           what_ + ": truncated at byte offset " + std::to_string(pos_) +
               " reading " + std::string(field) + " (need " +
               std::to_string(n) + " bytes, have " +
               std::to_string(remaining()) + ")");
    }
  }

  [[noreturn]] void error(const std::string& message) const {
    fail(ErrorKind::kFormat, what_ + ": " + message + " at byte offset " +
                                 std::to_string(pos_));
  }

  void expect_magic(std::string_view magic) {
    require(magic.size(), "magic");
    if (data_.substr(pos_, magic.size()) != magic) {
      error("bad magic (expected \"" + std::string(magic) + "\")");
    }
    pos_ += magic.size();
  }

  template <typename U>
  U uint(std::string_view field) {
    require(sizeof(U), field);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i]))
               << (8 * i);
    }
    pos_ += sizeof(U);
    return value;
  }

  std::uint8_t u8(std::string_view field) { return uint<std::uint8_t>(field); }
  std::uint16_t u16(std::string_view field) { return uint<std::uint16_t>(field); }
  std::uint32_t u32(std::string_view field) { return uint<std::uint32_t>(field); }
  std::uint64_t u64(std::string_view field) { return uint<std::uint64_t>(field); }
  float f32(std::string_view field) {
    return std::bit_cast<float>(u32(field));
  }

  double f64(std::string_view field) {
    return std::bit_cast<double>(u64(field));
  }

  void f32s(std::span<float> out, std::string_view field) {
    require(4 * out.size(), field);
    for (float& v : out) v = f32(field);
  }

  std::string short_string(std::string_view field) {
    const std::size_t len = u16(field);
    require(len, field);
    std::string s(data_.substr(pos_, len));
    pos_ += len;
    return s;
  }

  void expect_end() const {
    if (!at_end()) error("unexpected trailing bytes");
  }

 private:
  std::string_view data_;
  std::string what_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::kIo, "read failed for '" + path + "'");
  return data;
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path + "'");
}

}  // namespace kxfer::io

#endif  // KXFER_BINARY_IO_HPP_
