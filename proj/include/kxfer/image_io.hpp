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

#ifndef KXFER_IMAGE_IO_HPP_
#define KXFER_IMAGE_IO_HPP_

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "kxfer/binary_io.hpp"
#include "kxfer/kft_io.hpp"
#include "kxfer/tensor.hpp"

// Pixel-mode image loading. Images become C = 3 feature maps scaled to
// [0, 1]; grayscale is replicated and alpha is dropped. PNG goes through
// libpng, binary PPM (P6, 8 or 16 bit) is parsed here.

namespace kxfer {

namespace detail {

inline std::string lower_extension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

inline std::uint8_t to_byte(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};

}  // namespace detail

inline FeatureMap decode_ppm(std::string_view bytes, const std::string& what) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* field) {
    skip_space();
    std::size_t value = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (value > (1u << 24)) break;
      ++pos;
    }
    if (pos == start) {
      fail(ErrorKind::kFormat, what + ": bad PPM " + field +
                                   " at byte offset " + std::to_string(pos));
    }
    return value;
  };
  if (bytes.substr(0, 2) != "P6") {
    fail(ErrorKind::kFormat, what + ": only binary PPM (P6) is supported");
  }
  pos = 2;
  const std::size_t w = number("width");
  const std::size_t h = number("height");
  const std::size_t maxval = number("maxval");
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
    fail(ErrorKind::kFormat, what + ": bad PPM header");
  }
  ++pos;  // single whitespace before raster
  const std::size_t bpc = maxval < 256 ? 1 : 2;
  if (bytes.size() < pos + w * h * 3 * bpc) {
    fail(ErrorKind::kFormat, what + ": truncated PPM raster at byte offset " +
                                 std::to_string(bytes.size()));
  }
  FeatureMap map(3, h, w);
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t i = ((y * w + x) * 3 + c) * bpc;
        const unsigned v = bpc == 1 ? raster[i] : (raster[i] << 8) | raster[i + 1];
        map.at(c, y, x) = static_cast<float>(v) / static_cast<float>(maxval);
      }
    }
  }
  return map;
}

inline std::string encode_ppm(const FeatureMap& map) {
  if (map.channels() != 3) {
    fail(ErrorKind::kDimension, "PPM output needs C = 3, map has C = " +
                                    std::to_string(map.channels()));
  }
  std::string out = "P6\n" + std::to_string(map.width()) + " " +
                    std::to_string(map.height()) + "\n255\n";
  for (std::size_t y = 0; y < map.height(); ++y) {
    for (std::size_t x = 0; x < map.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        out.push_back(static_cast<char>(detail::to_byte(map.at(c, y, x))));
      }
    }
  }
  return out;
}

inline FeatureMap load_png(const std::string& path) {
  std::unique_ptr<std::FILE, detail::FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::kIo, "libpng initialisation failed");
  }
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::kFormat, "'" + path + "' is not a readable PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  pixels.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  FeatureMap map(3, height, width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        map.at(c, y, x) = static_cast<float>(pixels[y * rowbytes + x * 3 + c]) / 255.0f;
      }
    }
  }
  return map;
}

inline void save_png(const FeatureMap& map, const std::string& path) {
  if (map.channels() != 3) {
    fail(ErrorKind::kDimension, "PNG output needs C = 3, map has C = " +
                                    std::to_string(map.channels()));
  }
  std::unique_ptr<std::FILE, detail::FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::kIo, "libpng initialisation failed");
  }
  std::vector<unsigned char> pixels(map.height() * map.width() * 3);
  for (std::size_t y = 0; y < map.height(); ++y) {
    for (std::size_t x = 0; x < map.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        pixels[(y * map.width() + x) * 3 + c] = detail::to_byte(map.at(c, y, x));
      }
    }
  }
  std::vector<png_bytep> rows(map.height());
  for (std::size_t y = 0; y < map.height(); ++y) {
    rows[y] = pixels.data() + y * map.width() * 3;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::kIo, "PNG encoding failed for '" + path + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(map.width()),
               static_cast<png_uint_32>(map.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Dispatches on extension: .png, .ppm, or .kft (feature tensor).
inline FeatureMap load_map(const std::string& path) {
  const std::string ext = detail::lower_extension(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".ppm") return decode_ppm(io::read_file(path), path);
  if (ext == ".kft") return load_kft(path);
  fail(ErrorKind::kUsage, "unsupported input extension for '" + path +
                              "' (expected .png, .ppm or .kft)");
}

inline void save_map(const FeatureMap& map, const std::string& path) {
  const std::string ext = detail::lower_extension(path);
  if (ext == ".png") return save_png(map, path);
  if (ext == ".ppm") return io::write_file(path, encode_ppm(map));
  if (ext == ".kft") return save_kft(map, path);
  fail(ErrorKind::kUsage, "unsupported output extension for '" + path +
                              "' (expected .png, .ppm or .kft)");
}

}  // namespace kxfer

#endif  // KXFER_IMAGE_IO_HPP_
