// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "masa/common.hpp"
#include "masa/image.hpp"

namespace masa {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path + "'");
  return f;
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  for (auto& ch : tail) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return tail == suffix;
}

}  // namespace detail

// ---- PPM (binary P6, maxval 255) ----

inline Image read_ppm(const std::string& path) {
  auto f = detail::open_file(path, "rb");
  char magic[3] = {0, 0, 0};
  if (std::fscanf(f.get(), "%2s", magic) != 1 || std::strcmp(magic, "P6") != 0)
    throw IoError(path + ": not a binary PPM (P6) file");
  // Header tokens may be separated by whitespace and '#' comments.
  auto next_int = [&]() {
    int ch;
    for (;;) {
      ch = std::fgetc(f.get());
      if (ch == '#') {
        while (ch != '\n' && ch != EOF) ch = std::fgetc(f.get());
      } else if (!std::isspace(ch)) {
        break;
      }
    }
    if (ch == EOF) throw IoError(path + ": truncated PPM header");
    std::ungetc(ch, f.get());
    long v = 0;
    if (std::fscanf(f.get(), "%ld", &v) != 1) throw IoError(path + ": bad PPM header");
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (w < 1 || h < 1 || maxval != 255)
    throw IoError(path + ": unsupported PPM geometry or maxval");
  std::fgetc(f.get());  // single whitespace before raster
  Image img(static_cast<int>(h), static_cast<int>(w));
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
  for (long y = 0; y < h; ++y) {
    if (std::fread(row.data(), 1, row.size(), f.get()) != row.size())
      throw IoError(path + ": truncated PPM raster");
    for (long x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(static_cast<int>(y), static_cast<int>(x), c) = from_byte(row[x * 3 + c]);
  }
  return img;
}

inline void write_ppm(const Image& img, const std::string& path) {
  auto f = detail::open_file(path, "wb");
  std::fprintf(f.get(), "P6\n%d %d\n255\n", img.width, img.height);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) row[x * 3 + c] = to_byte(img.at(y, x, c));
    if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size())
      throw IoError(path + ": short write");
  }
}

// ---- PNG (8-bit RGB; gray/palette/alpha inputs are converted) ----

inline Image read_png(const std::string& path) {
  auto f = detail::open_file(path, "rb");
  png_byte header[8];
  if (std::fread(header, 1, 8, f.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError(path + ": not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": libpng init failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<std::uint8_t> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": PNG decode error");
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (w < 1 || h < 1 || png_get_channels(png, info) != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported PNG layout");
  }
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y)
    row_ptrs[y] = pixels.data() + static_cast<std::size_t>(y) * w * 3;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(h), static_cast<int>(w));
  for (std::size_t i = 0; i < pixels.size(); ++i) img.data[i] = from_byte(pixels[i]);
  return img;
}

inline void write_png(const Image& img, const std::string& path) {
  auto f = detail::open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": PNG encode error");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) row[x * 3 + c] = to_byte(img.at(y, x, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Dispatches on the file extension: .png or .ppm.
inline Image read_image(const std::string& path) {
  if (detail::has_suffix(path, ".png")) return read_png(path);
  if (detail::has_suffix(path, ".ppm")) return read_ppm(path);
  throw IoError(path + ": unsupported image format (use .png or .ppm)");
}

inline void write_image(const Image& img, const std::string& path) {
  if (detail::has_suffix(path, ".png")) return write_png(img, path);
  if (detail::has_suffix(path, ".ppm")) return write_ppm(img, path);
  throw IoError(path + ": unsupported image format (use .png or .ppm)");
}

}  // namespace masa
