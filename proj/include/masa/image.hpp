// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "masa/common.hpp"

namespace masa {

/// RGB image, values in [0, 1], interleaved row-major storage.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // size height*width*3, layout (y, x, c)

  Image() = default;
  Image(int h, int w, float fill = 0.0f)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {
    require(h >= 1 && w >= 1, "Image: dimensions must be >= 1");
  }

  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width;
  }

  void clamp01() {
    for (float& v : data) v = std::min(1.0f, std::max(0.0f, v));
  }

  bool finite_in_unit_range() const {
    for (float v : data)
      if (!(v >= 0.0f && v <= 1.0f)) return false;
    return true;
  }
};

/// Quantizes to 8-bit with round-half-up, the convention used by both image
/// writers.
inline std::uint8_t to_byte(float v) {
  const float c = std::min(1.0f, std::max(0.0f, v));
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

inline std::vector<std::uint8_t> to_byte(const Image& img) {
  std::vector<std::uint8_t> bytes(img.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(img.data[i]);
  return bytes;
}

inline float from_byte(std::uint8_t b) { return b * (1.0f / 255.0f); }

}  // namespace masa
