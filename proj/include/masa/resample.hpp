// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>

#include "masa/common.hpp"
#include "masa/feature_map.hpp"
#include "masa/image.hpp"

namespace masa {

/// Exact rational scale factor, e.g. {1, 4} for the x4 downsample of the
/// reference image.
struct Fraction {
  long long num = 1;
  long long den = 1;
};

namespace detail {

// Catmull-Rom taps (a = -0.5) for the four neighbours around a sample point,
// t = fractional offset from the second neighbour. Weights sum to 1 and the
// kernel interpolates: t == 0 gives (0, 1, 0, 0).
inline void catmull_rom_weights(double t, double w[4]) {
  constexpr double a = -0.5;
  const double t2 = t * t;
  const double t3 = t2 * t;
  w[0] = a * (t3 - 2.0 * t2 + t);
  w[1] = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0;
  w[2] = -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t;
  w[3] = a * (t2 - t3);
}

inline int clamp_index(int i, int n) { return std::min(n - 1, std::max(0, i)); }

// Source coordinate of an output sample under the align-centers convention.
inline double source_coord(int dst, int dst_size, int src_size) {
  return (dst + 0.5) * (static_cast<double>(src_size) / dst_size) - 0.5;
}

struct CubicTaps {
  int base;       // index of the first of four source samples
  double w[4];
};

inline CubicTaps cubic_taps(int dst, int dst_size, int src_size) {
  const double s = source_coord(dst, dst_size, src_size);
  const double fl = std::floor(s);
  CubicTaps taps;
  taps.base = static_cast<int>(fl) - 1;
  catmull_rom_weights(s - fl, taps.w);
  return taps;
}

}  // namespace detail

/// Separable Catmull-Rom bicubic resize to explicit dimensions, values
/// clamped back to [0, 1]. Borders replicate the edge sample.
inline Image bicubic_resize_to(const Image& img, int out_h, int out_w) {
  require(out_h >= 1 && out_w >= 1, "bicubic_resize: degenerate output size");
  // Horizontal pass (double precision rows), then vertical.
  std::vector<double> tmp(static_cast<std::size_t>(img.height) * out_w * 3);
  for (int x = 0; x < out_w; ++x) {
    const auto taps = detail::cubic_taps(x, out_w, img.width);
    for (int y = 0; y < img.height; ++y)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i)
          acc += taps.w[i] * img.at(y, detail::clamp_index(taps.base + i, img.width), c);
        tmp[(static_cast<std::size_t>(y) * out_w + x) * 3 + c] = acc;
      }
  }
  Image out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const auto taps = detail::cubic_taps(y, out_h, img.height);
    for (int x = 0; x < out_w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) {
          const int sy = detail::clamp_index(taps.base + i, img.height);
          acc += taps.w[i] * tmp[(static_cast<std::size_t>(sy) * out_w + x) * 3 + c];
        }
        out.at(y, x, c) = static_cast<float>(std::min(1.0, std::max(0.0, acc)));
      }
  }
  return out;
}

inline Image bicubic_resize(const Image& img, Fraction factor) {
  require(factor.num > 0 && factor.den > 0, "bicubic_resize: factor must be positive");
  const long long oh = (static_cast<long long>(img.height) * factor.num) / factor.den;
  const long long ow = (static_cast<long long>(img.width) * factor.num) / factor.den;
  require(oh >= 1 && ow >= 1, "bicubic_resize: degenerate output size");
  return bicubic_resize_to(img, static_cast<int>(oh), static_cast<int>(ow));
}

/// Bilinear resize of every channel plane, align-centers, edge-clamped.
/// Constant maps stay constant to within one rounding step.
inline FeatureMap bilinear_resize(const FeatureMap& f, int out_h, int out_w) {
  require(out_h >= 1 && out_w >= 1, "bilinear_resize: degenerate output size");
  FeatureMap out(f.channels, out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const double sy = detail::source_coord(y, out_h, f.height);
    const int y0 = detail::clamp_index(static_cast<int>(std::floor(sy)), f.height);
    const int y1 = detail::clamp_index(y0 + 1, f.height);
    // Weight against the clamped base so out-of-range samples hold the edge.
    const double ty = std::min(1.0, std::max(0.0, sy - y0));
    for (int x = 0; x < out_w; ++x) {
      const double sx = detail::source_coord(x, out_w, f.width);
      const int x0 = detail::clamp_index(static_cast<int>(std::floor(sx)), f.width);
      const int x1 = detail::clamp_index(x0 + 1, f.width);
      const double tx = std::min(1.0, std::max(0.0, sx - x0));
      for (int c = 0; c < f.channels; ++c) {
        const double top = (1.0 - tx) * f.at(c, y0, x0) + tx * f.at(c, y0, x1);
        const double bot = (1.0 - tx) * f.at(c, y1, x0) + tx * f.at(c, y1, x1);
        out.at(c, y, x) = static_cast<float>((1.0 - ty) * top + ty * bot);
      }
    }
  }
  return out;
}

}  // namespace masa
