// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>

#include "masa/common.hpp"
#include "masa/image.hpp"
#include "masa/matching.hpp"

namespace masa {

namespace detail {

inline void hsv_to_rgb(double h, double s, double v, float rgb[3]) {
  h = h - std::floor(h);
  const double hh = h * 6.0;
  const int sector = std::min(5, static_cast<int>(hh));
  const double f = hh - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r, g, b;
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  rgb[0] = static_cast<float>(r);
  rgb[1] = static_cast<float>(g);
  rgb[2] = static_cast<float>(b);
}

}  // namespace detail

/// Renders a correspondence field: one pixel per LR patch position, hue
/// from the block's matched reference anchor (vertical position dominant),
/// brightness from the patch similarity clamped to [0, 1]. A hue legend
/// strip is appended below a black separator.
inline Image visualize_correspondence(const CorrespondenceField& field, int ref_h, int ref_w) {
  field.validate();
  require(ref_h >= 1 && ref_w >= 1, "visualize_correspondence: bad reference dims");
  const BlockPartition& part = field.partition;
  const int body_h = part.grid_rows * field.m_h;
  const int body_w = part.grid_cols * field.m_w;
  const int kSeparator = 2, kLegend = 12;
  Image img(body_h + kSeparator + kLegend, body_w);

  const std::size_t per = field.per_block();
  float rgb[3];
  for (int k = 0; k < part.block_count(); ++k) {
    const BlockMatch& m = field.blocks[k];
    const double ny = ref_h > 1 ? static_cast<double>(m.anchor_y) / (ref_h - 1) : 0.0;
    const double nx = ref_w > 1 ? static_cast<double>(m.anchor_x) / (ref_w - 1) : 0.0;
    const double hue = (0.6 * ny + 0.4 * nx) * 0.83;
    const int ty = (k / part.grid_cols) * field.m_h;
    const int tx = (k % part.grid_cols) * field.m_w;
    for (int iy = 0; iy < field.m_h; ++iy)
      for (int ix = 0; ix < field.m_w; ++ix) {
        const float score = field.score[k * per + iy * field.m_w + ix];
        const double value = std::clamp(static_cast<double>(score), 0.0, 1.0);
        detail::hsv_to_rgb(hue, 1.0, value, rgb);
        for (int c = 0; c < 3; ++c) img.at(ty + iy, tx + ix, c) = rgb[c];
      }
  }
  for (int y = body_h + kSeparator; y < img.height; ++y)
    for (int x = 0; x < body_w; ++x) {
      const double hue = body_w > 1 ? 0.83 * x / (body_w - 1) : 0.0;
      detail::hsv_to_rgb(hue, 1.0, 1.0, rgb);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = rgb[c];
    }
  return img;
}

}  // namespace masa
