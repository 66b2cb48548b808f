// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "masa/common.hpp"

namespace masa {

/// Planar C x H x W grid of reals. The carrier for every feature in the
/// pipeline (LR features, downsampled and full-resolution reference
/// features).
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;  // layout (c, y, x)

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        values(static_cast<std::size_t>(c) * h * w, fill) {
    require(c >= 1 && h >= 1 && w >= 1, "FeatureMap: dimensions must be >= 1");
  }

  float& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  const float* plane(int c) const {
    return values.data() + static_cast<std::size_t>(c) * height * width;
  }
  float* plane(int c) {
    return values.data() + static_cast<std::size_t>(c) * height * width;
  }

  bool same_shape(const FeatureMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  bool all_finite() const {
    for (float v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Geometry of a non-overlapping block unfolding. Grid dimensions refer to
/// the reflect-padded map; orig_* records what to crop back to after folding.
struct BlockPartition {
  int block_h = 0;
  int block_w = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  int padded_h = 0;
  int padded_w = 0;
  int orig_h = 0;
  int orig_w = 0;

  int block_count() const { return grid_rows * grid_cols; }
  // Top-left of block k in the padded map.
  std::pair<int, int> block_anchor(int k) const {
    return {(k / grid_cols) * block_h, (k % grid_cols) * block_w};
  }
};

/// Square patch lattice over a region. Anchors are top-left corners, fully
/// contained: positions = (region - footprint + 1) per axis for stride 1.
struct PatchGrid {
  int patch = 3;
  int stride = 1;
  int dilation = 1;
  int region_h = 0;
  int region_w = 0;

  int footprint() const { return (patch - 1) * dilation + 1; }
  int rows() const { return (region_h - footprint()) / stride + 1; }
  int cols() const { return (region_w - footprint()) / stride + 1; }
  int positions() const { return rows() * cols(); }
  std::pair<int, int> anchor(int i) const {
    return {(i / cols()) * stride, (i % cols()) * stride};
  }

  void validate() const {
    require(patch >= 1 && stride >= 1 && dilation >= 1, "PatchGrid: bad parameters");
    require(footprint() <= region_h && footprint() <= region_w,
            "PatchGrid: footprint exceeds region");
  }
};

/// Dense row-per-patch storage for flattened patch vectors. Tap order is
/// (c, py, px), the order every similarity routine in this library assumes.
struct PatchMatrix {
  int count = 0;
  int length = 0;
  std::vector<float> data;

  float* row(int i) { return data.data() + static_cast<std::size_t>(i) * length; }
  const float* row(int i) const {
    return data.data() + static_cast<std::size_t>(i) * length;
  }
};

namespace detail {

// Mirror index without repeating the edge sample (abcd -> abcd|cba).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

}  // namespace detail

/// Reflect-pads at the bottom/right edges. Padding must not exceed size - 1
/// (mirror without edge repetition runs out of samples beyond that).
inline FeatureMap reflect_pad(const FeatureMap& f, int pad_bottom, int pad_right) {
  require(pad_bottom >= 0 && pad_right >= 0, "reflect_pad: negative pad");
  if (pad_bottom == 0 && pad_right == 0) return f;
  require(pad_bottom <= f.height - 1 && pad_right <= f.width - 1,
          "reflect_pad: pad exceeds source extent");
  FeatureMap out(f.channels, f.height + pad_bottom, f.width + pad_right);
  for (int c = 0; c < f.channels; ++c)
    for (int y = 0; y < out.height; ++y) {
      const int sy = detail::reflect_index(y, f.height);
      for (int x = 0; x < out.width; ++x)
        out.at(c, y, x) = f.at(c, sy, detail::reflect_index(x, f.width));
    }
  return out;
}

/// Unfolds into K non-overlapping block_h x block_w blocks, reflect-padding
/// the map first when its size is not a multiple of the block. Blocks come
/// back in row-major order.
inline std::pair<BlockPartition, std::vector<FeatureMap>> unfold_blocks(
    const FeatureMap& f, int block_h, int block_w) {
  require(block_h >= 1 && block_w >= 1, "unfold_blocks: block size must be >= 1");
  BlockPartition part;
  part.block_h = block_h;
  part.block_w = block_w;
  part.orig_h = f.height;
  part.orig_w = f.width;
  part.grid_rows = (f.height + block_h - 1) / block_h;
  part.grid_cols = (f.width + block_w - 1) / block_w;
  part.padded_h = part.grid_rows * block_h;
  part.padded_w = part.grid_cols * block_w;

  const int pad_b = part.padded_h - f.height;
  const int pad_r = part.padded_w - f.width;
  require(pad_b <= f.height - 1 && pad_r <= f.width - 1,
          "unfold_blocks: block size larger than padded feature allows");
  const FeatureMap padded = reflect_pad(f, pad_b, pad_r);

  std::vector<FeatureMap> blocks;
  blocks.reserve(part.block_count());
  for (int k = 0; k < part.block_count(); ++k) {
    const auto [by, bx] = part.block_anchor(k);
    FeatureMap b(f.channels, block_h, block_w);
    for (int c = 0; c < f.channels; ++c)
      for (int y = 0; y < block_h; ++y)
        for (int x = 0; x < block_w; ++x)
          b.at(c, y, x) = padded.at(c, by + y, bx + x);
    blocks.push_back(std::move(b));
  }
  return {part, std::move(blocks)};
}

/// Reassembles blocks produced by unfold_blocks and crops away the padding,
/// so fold(unfold(f)) == f exactly. `scale` folds scale-s blocks into a map
/// scale times larger in each axis.
inline FeatureMap fold_blocks(const std::vector<FeatureMap>& blocks,
                              const BlockPartition& part, int scale = 1) {
  require(static_cast<int>(blocks.size()) == part.block_count(),
          "fold_blocks: block count does not match partition");
  require(!blocks.empty(), "fold_blocks: empty block list");
  const int bh = part.block_h * scale;
  const int bw = part.block_w * scale;
  const int channels = blocks.front().channels;
  for (const auto& b : blocks)
    require(b.channels == channels && b.height == bh && b.width == bw,
            "fold_blocks: block shape mismatch");

  FeatureMap padded(channels, part.padded_h * scale, part.padded_w * scale);
  for (int k = 0; k < part.block_count(); ++k) {
    const auto [by, bx] = part.block_anchor(k);
    const FeatureMap& b = blocks[k];
    for (int c = 0; c < channels; ++c)
      for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x)
          padded.at(c, by * scale + y, bx * scale + x) = b.at(c, y, x);
  }
  if (part.padded_h == part.orig_h && part.padded_w == part.orig_w) return padded;
  FeatureMap out(channels, part.orig_h * scale, part.orig_w * scale);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) out.at(c, y, x) = padded.at(c, y, x);
  return out;
}

/// Flattens every grid position of `region` into a row of tap values.
inline PatchMatrix extract_patches(const FeatureMap& region, const PatchGrid& grid) {
  require(grid.region_h == region.height && grid.region_w == region.width,
          "extract_patches: grid region does not match feature");
  grid.validate();
  PatchMatrix m;
  m.count = grid.positions();
  m.length = region.channels * grid.patch * grid.patch;
  m.data.resize(static_cast<std::size_t>(m.count) * m.length);
  for (int i = 0; i < m.count; ++i) {
    const auto [ay, ax] = grid.anchor(i);
    float* row = m.row(i);
    int t = 0;
    for (int c = 0; c < region.channels; ++c)
      for (int py = 0; py < grid.patch; ++py)
        for (int px = 0; px < grid.patch; ++px)
          row[t++] = region.at(c, ay + py * grid.dilation, ax + px * grid.dilation);
  }
  return m;
}

/// Places patches at their anchors and averages overlapping contributions by
/// coverage count. Elements no patch touches stay 0.
inline FeatureMap overlap_fold(const std::vector<FeatureMap>& patches,
                               const std::vector<std::pair<int, int>>& anchors,
                               int channels, int region_h, int region_w) {
  require(!patches.empty(), "overlap_fold: empty patch list");
  require(patches.size() == anchors.size(), "overlap_fold: anchors/patches mismatch");
  FeatureMap sum(channels, region_h, region_w);
  std::vector<std::uint32_t> coverage(static_cast<std::size_t>(region_h) * region_w, 0);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const FeatureMap& p = patches[i];
    const auto [ay, ax] = anchors[i];
    require(p.channels == channels, "overlap_fold: patch channel mismatch");
    require(ay >= 0 && ax >= 0 && ay + p.height <= region_h && ax + p.width <= region_w,
            "overlap_fold: patch does not fit region");
    for (int c = 0; c < channels; ++c)
      for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x)
          sum.at(c, ay + y, ax + x) += p.at(c, y, x);
    for (int y = 0; y < p.height; ++y)
      for (int x = 0; x < p.width; ++x)
        coverage[static_cast<std::size_t>(ay + y) * region_w + (ax + x)] += 1;
  }
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < region_h; ++y)
      for (int x = 0; x < region_w; ++x) {
        const std::uint32_t n = coverage[static_cast<std::size_t>(y) * region_w + x];
        if (n > 1) sum.at(c, y, x) /= static_cast<float>(n);
      }
  return sum;
}

}  // namespace masa
