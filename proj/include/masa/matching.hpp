// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "masa/common.hpp"
#include "masa/feature_map.hpp"
#include "masa/parallel.hpp"
#include "masa/resample.hpp"

namespace masa {

/// Coarse-to-fine matcher settings. The reference block side is derived per
/// axis as round(ref_block_scale * lr_block * ref_dim / lr_dim), clamped to
/// stay inside the reference feature; an explicit override wins.
struct MatchConfig {
  int lr_block = 8;
  double ref_block_scale = 1.5;
  int patch = 3;
  std::vector<int> dilations = {1, 2};
  std::vector<int> scales = {1, 2, 4};
  int ref_block_override_h = 0;  // 0 derives from ref_block_scale
  int ref_block_override_w = 0;

  void validate() const {
    require_config(lr_block >= 1, "lr_block must be >= 1");
    require_config(patch >= 1 && patch % 2 == 1, "patch side must be odd and >= 1");
    require_config(patch <= lr_block, "patch must not exceed lr_block");
    require_config(!dilations.empty(), "need at least one dilation rate");
    for (std::size_t i = 0; i < dilations.size(); ++i) {
      require_config(dilations[i] >= 1, "dilation rates must be >= 1");
      require_config(i == 0 || dilations[i] > dilations[i - 1],
                     "dilation rates must be strictly increasing");
    }
    require_config((patch - 1) * dilations.back() + 1 <= lr_block,
                   "largest dilated footprint exceeds lr_block");
    require_config(!scales.empty(), "need at least one extraction scale");
    for (std::size_t i = 0; i < scales.size(); ++i) {
      require_config(scales[i] >= 1, "scales must be >= 1");
      require_config(i == 0 || scales[i] > scales[i - 1], "scales must be strictly increasing");
    }
    require_config(ref_block_scale > 0.0, "ref_block_scale must be positive");
    require_config(ref_block_override_h >= 0 && ref_block_override_w >= 0,
                   "ref block override must be non-negative");
  }
};

/// Reference block extent (d_y, d_x) for given feature geometry.
inline std::pair<int, int> ref_block_sides(const MatchConfig& cfg, int lr_h, int lr_w, int rd_h,
                                           int rd_w) {
  auto derive = [&](int over, int lr_dim, int rd_dim) {
    int d = over > 0
                ? over
                : static_cast<int>(std::lround(cfg.ref_block_scale * cfg.lr_block *
                                               (static_cast<double>(rd_dim) / lr_dim)));
    d = std::max(d, cfg.patch);
    d = std::min(d, rd_dim);
    return d;
  };
  const int dy = derive(cfg.ref_block_override_h, lr_h, rd_h);
  const int dx = derive(cfg.ref_block_override_w, lr_w, rd_w);
  require_config(dy >= cfg.patch && dx >= cfg.patch,
                 "reference feature too small for the patch size");
  return {dy, dx};
}

/// One LR block's matched reference block: anchor and extent inside the
/// downsampled reference feature, plus the winning candidate center.
struct BlockMatch {
  int anchor_y = 0;
  int anchor_x = 0;
  int side_y = 0;
  int side_x = 0;
  int center_y = 0;
  int center_x = 0;
  float coarse_score = 0.0f;
};

struct CoarseResult {
  BlockPartition partition;
  std::vector<BlockMatch> blocks;
  std::uint64_t ops = 0;
};

/// Per-block index and similarity maps: for LR patch position i of block k,
/// index[k*per_block()+i] is the best patch inside that block's reference
/// block (row-major local id) and score[...] its cosine similarity.
struct CorrespondenceField {
  BlockPartition partition;
  int patch = 0;
  int m_h = 0;
  int m_w = 0;
  std::vector<BlockMatch> blocks;
  std::vector<std::uint32_t> index;
  std::vector<float> score;

  std::size_t per_block() const { return static_cast<std::size_t>(m_h) * m_w; }

  void validate() const {
    const std::size_t total = per_block() * partition.block_count();
    require(index.size() == total && score.size() == total,
            "CorrespondenceField: map sizes do not match geometry");
    require(static_cast<int>(blocks.size()) == partition.block_count(),
            "CorrespondenceField: block list does not match partition");
    for (int k = 0; k < partition.block_count(); ++k) {
      const BlockMatch& b = blocks[k];
      const std::uint32_t count = static_cast<std::uint32_t>((b.side_y - patch + 1)) *
                                  static_cast<std::uint32_t>(b.side_x - patch + 1);
      for (std::size_t i = 0; i < per_block(); ++i) {
        const std::size_t at = k * per_block() + i;
        require(index[at] < count, "CorrespondenceField: index out of range");
        require(score[at] >= -1.0f && score[at] <= 1.0f,
                "CorrespondenceField: similarity outside [-1, 1]");
      }
    }
  }
};

/// Similarity-evaluation bookkeeping. Counted fields come from instrumented
/// runs, predicted fields from the closed form; the two must agree exactly.
struct ComplexityReport {
  std::uint64_t lr_blocks = 0;          // K
  std::uint64_t lr_patches = 0;         // m, summed over blocks
  std::uint64_t ref_patches = 0;        // n, dense dilation-1 search space
  std::uint64_t ref_block_patches = 0;  // n', candidates per reference block
  int dilation_count = 0;
  std::uint64_t counted_coarse = 0;
  std::uint64_t counted_fine = 0;
  std::uint64_t predicted_coarse = 0;
  std::uint64_t predicted_fine = 0;
  std::uint64_t dense_baseline = 0;  // m * n

  std::uint64_t counted_total() const { return counted_coarse + counted_fine; }
  std::uint64_t predicted_total() const { return predicted_coarse + predicted_fine; }
  double reduction() const {
    return counted_total() ? static_cast<double>(dense_baseline) / counted_total() : 0.0;
  }
};

namespace detail {

constexpr double kNormFloor = 1e-8;

inline FeatureMap crop(const FeatureMap& f, int y, int x, int h, int w) {
  require(y >= 0 && x >= 0 && y + h <= f.height && x + w <= f.width, "crop out of bounds");
  FeatureMap out(f.channels, h, w);
  for (int c = 0; c < f.channels; ++c)
    for (int r = 0; r < h; ++r)
      for (int s = 0; s < w; ++s) out.at(c, r, s) = f.at(c, y + r, x + s);
  return out;
}

// Scales each row to unit length; norms are accumulated in double and
// floored at kNormFloor so zero vectors stay zero.
inline void normalize_rows(PatchMatrix& m) {
  for (int i = 0; i < m.count; ++i) {
    float* row = m.row(i);
    double ss = 0.0;
    for (int t = 0; t < m.length; ++t) ss += static_cast<double>(row[t]) * row[t];
    const double denom = std::max(std::sqrt(ss), kNormFloor);
    for (int t = 0; t < m.length; ++t)
      row[t] = static_cast<float>(static_cast<double>(row[t]) / denom);
  }
}

inline void normalize_vector(std::vector<float>& v) {
  double ss = 0.0;
  for (float x : v) ss += static_cast<double>(x) * x;
  const double denom = std::max(std::sqrt(ss), kNormFloor);
  for (float& x : v) x = static_cast<float>(static_cast<double>(x) / denom);
}

// Dot of two already-normalized vectors, accumulated in double, clamped to
// the valid cosine range. Every similarity in this library flows through
// this one routine so the fast path and the oracle agree bit-for-bit.
inline float normalized_dot(const float* a, const float* b, int len) {
  double acc = 0.0;
  for (int t = 0; t < len; ++t) acc += static_cast<double>(a[t]) * static_cast<double>(b[t]);
  if (acc > 1.0) acc = 1.0;
  if (acc < -1.0) acc = -1.0;
  return static_cast<float>(acc);
}

}  // namespace detail

/// Cosine similarity between two raw tap vectors, with each norm floored at
/// 1e-8. Result lies in [-1, 1].
inline float cosine_similarity(const float* p, const float* q, int len) {
  require(len >= 1, "cosine_similarity: empty vectors");
  double np = 0.0, nq = 0.0;
  for (int t = 0; t < len; ++t) {
    np += static_cast<double>(p[t]) * p[t];
    nq += static_cast<double>(q[t]) * q[t];
  }
  np = std::max(std::sqrt(np), detail::kNormFloor);
  nq = std::max(std::sqrt(nq), detail::kNormFloor);
  double acc = 0.0;
  for (int t = 0; t < len; ++t) {
    const float a = static_cast<float>(static_cast<double>(p[t]) / np);
    const float b = static_cast<float>(static_cast<double>(q[t]) / nq);
    acc += static_cast<double>(a) * static_cast<double>(b);
  }
  if (acc > 1.0) acc = 1.0;
  if (acc < -1.0) acc = -1.0;
  return static_cast<float>(acc);
}

inline float cosine_similarity(const std::vector<float>& p, const std::vector<float>& q) {
  require(p.size() == q.size(), "cosine_similarity: length mismatch");
  return cosine_similarity(p.data(), q.data(), static_cast<int>(p.size()));
}

/// Stage 1: pick a reference block per LR block. Each block's center patch,
/// sampled at every configured dilation rate, is scored against all valid
/// reference patch centers at the same dilation; per-center scores sum over
/// dilations, and the best center (lowest row-major position on ties) seeds
/// a d_y x d_x reference block clamped inside the feature.
inline CoarseResult coarse_match(const FeatureMap& f_lr, const FeatureMap& f_ref_down,
                                 const MatchConfig& cfg, int workers = 1) {
  cfg.validate();
  require(f_lr.channels == f_ref_down.channels, "coarse_match: channel mismatch");
  require(f_lr.all_finite() && f_ref_down.all_finite(), "coarse_match: non-finite features");

  auto [partition, blocks] = unfold_blocks(f_lr, cfg.lr_block, cfg.lr_block);
  const int rd_h = f_ref_down.height, rd_w = f_ref_down.width;
  const auto [dy, dx] = ref_block_sides(cfg, f_lr.height, f_lr.width, rd_h, rd_w);

  struct DilationPlan {
    int dilation = 1;
    int offset = 0;    // center minus patch anchor, both axes
    int anchor_y = 0;  // center-patch anchor inside an LR block
    int anchor_x = 0;
    PatchGrid grid;
    PatchMatrix candidates;
  };
  std::vector<DilationPlan> plans;
  for (int d : cfg.dilations) {
    const int footprint = (cfg.patch - 1) * d + 1;
    if (footprint > rd_h || footprint > rd_w) continue;
    DilationPlan plan;
    plan.dilation = d;
    plan.offset = (footprint - 1) / 2;
    plan.anchor_y = (cfg.lr_block - footprint) / 2;
    plan.anchor_x = plan.anchor_y;
    plan.grid = PatchGrid{cfg.patch, 1, d, rd_h, rd_w};
    plan.candidates = extract_patches(f_ref_down, plan.grid);
    detail::normalize_rows(plan.candidates);
    plans.push_back(std::move(plan));
  }
  require_config(!plans.empty(), "reference feature smaller than every dilated patch footprint");

  const int K = partition.block_count();
  CoarseResult result;
  result.partition = partition;
  result.blocks.resize(K);
  std::vector<std::uint64_t> ops(K, 0);

  const int veclen = f_lr.channels * cfg.patch * cfg.patch;
  parallel_chunks(K, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(static_cast<std::size_t>(rd_h) * rd_w);
    std::vector<unsigned char> covered(static_cast<std::size_t>(rd_h) * rd_w);
    std::vector<float> center(veclen);
    for (std::size_t k = begin; k < end; ++k) {
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(covered.begin(), covered.end(), 0);
      std::uint64_t local_ops = 0;
      for (const auto& plan : plans) {
        int t = 0;
        for (int c = 0; c < f_lr.channels; ++c)
          for (int py = 0; py < cfg.patch; ++py)
            for (int px = 0; px < cfg.patch; ++px)
              center[t++] = blocks[k].at(c, plan.anchor_y + py * plan.dilation,
                                         plan.anchor_x + px * plan.dilation);
        detail::normalize_vector(center);
        const int cols = plan.grid.cols();
        for (int i = 0; i < plan.candidates.count; ++i) {
          const float s = detail::normalized_dot(center.data(), plan.candidates.row(i), veclen);
          ++local_ops;
          const std::size_t pos =
              static_cast<std::size_t>(i / cols + plan.offset) * rd_w + (i % cols + plan.offset);
          acc[pos] += static_cast<double>(s);
          covered[pos] = 1;
        }
      }
      double best = -std::numeric_limits<double>::infinity();
      int best_y = 0, best_x = 0;
      for (int y = 0; y < rd_h; ++y)
        for (int x = 0; x < rd_w; ++x) {
          const std::size_t pos = static_cast<std::size_t>(y) * rd_w + x;
          if (covered[pos] && acc[pos] > best) {
            best = acc[pos];
            best_y = y;
            best_x = x;
          }
        }
      BlockMatch& m = result.blocks[k];
      m.center_y = best_y;
      m.center_x = best_x;
      m.side_y = dy;
      m.side_x = dx;
      m.anchor_y = std::clamp(best_y - (dy - 1) / 2, 0, rd_h - dy);
      m.anchor_x = std::clamp(best_x - (dx - 1) / 2, 0, rd_w - dx);
      m.coarse_score = static_cast<float>(best);
      ops[k] = local_ops;
    }
  });
  for (int k = 0; k < K; ++k) result.ops += ops[k];
  return result;
}

/// Stage 2: dense matching of every LR patch (stride 1, dilation 1, fully
/// contained in its block) against every patch of the paired reference
/// block. Ties break to the lowest candidate index.
inline CorrespondenceField fine_match(const FeatureMap& f_lr, const FeatureMap& f_ref_down,
                                      const CoarseResult& coarse, const MatchConfig& cfg,
                                      int workers = 1, std::uint64_t* ops_out = nullptr) {
  auto [partition, blocks] = unfold_blocks(f_lr, cfg.lr_block, cfg.lr_block);
  require(partition.block_count() == coarse.partition.block_count(),
          "fine_match: coarse result does not match feature geometry");

  CorrespondenceField field;
  field.partition = partition;
  field.patch = cfg.patch;
  field.m_h = cfg.lr_block - cfg.patch + 1;
  field.m_w = field.m_h;
  field.blocks = coarse.blocks;
  const int K = partition.block_count();
  const std::size_t per = field.per_block();
  field.index.assign(per * K, 0);
  field.score.assign(per * K, 0.0f);
  std::vector<std::uint64_t> ops(K, 0);

  const PatchGrid lr_grid{cfg.patch, 1, 1, cfg.lr_block, cfg.lr_block};
  parallel_chunks(K, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      PatchMatrix lr_patches = extract_patches(blocks[k], lr_grid);
      detail::normalize_rows(lr_patches);
      const BlockMatch& m = field.blocks[k];
      const FeatureMap region =
          detail::crop(f_ref_down, m.anchor_y, m.anchor_x, m.side_y, m.side_x);
      PatchMatrix cand = extract_patches(region, PatchGrid{cfg.patch, 1, 1, m.side_y, m.side_x});
      detail::normalize_rows(cand);
      for (int i = 0; i < lr_patches.count; ++i) {
        const float* p = lr_patches.row(i);
        float best = -2.0f;
        std::uint32_t best_j = 0;
        for (int j = 0; j < cand.count; ++j) {
          const float s = detail::normalized_dot(p, cand.row(j), cand.length);
          if (s > best) {
            best = s;
            best_j = static_cast<std::uint32_t>(j);
          }
        }
        field.index[k * per + i] = best_j;
        field.score[k * per + i] = best;
      }
      ops[k] = static_cast<std::uint64_t>(lr_patches.count) * cand.count;
    }
  });
  if (ops_out) {
    *ops_out = 0;
    for (int k = 0; k < K; ++k) *ops_out += ops[k];
  }
  return field;
}

/// Stage 3: rebuild an LR-shaped feature at scale s from reference content.
/// For each LR patch the matched reference patch (side patch*s, anchors at
/// s times the fine-stage anchors) lands at s times the LR anchor; overlaps
/// average, each folded block is weighted by its bilinearly upsampled
/// similarity map, and blocks fold into a map s times the LR feature size.
inline FeatureMap extract_features(const FeatureMap& f_ref_s, int scale,
                                   const CorrespondenceField& field, int workers = 1) {
  require_config(scale >= 1, "extraction scale must be >= 1");
  const int K = field.partition.block_count();
  require(K > 0, "extract_features: empty field");
  const int b = field.partition.block_h;
  const int p = field.patch;
  const int C = f_ref_s.channels;

  std::vector<FeatureMap> out_blocks(K);
  parallel_chunks(K, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const BlockMatch& m = field.blocks[k];
      require(static_cast<std::int64_t>(m.anchor_y + m.side_y) * scale <= f_ref_s.height &&
                  static_cast<std::int64_t>(m.anchor_x + m.side_x) * scale <= f_ref_s.width,
              "extract_features: scaled reference feature too small");
      const FeatureMap region = detail::crop(f_ref_s, m.anchor_y * scale, m.anchor_x * scale,
                                             m.side_y * scale, m.side_x * scale);
      const int cand_cols = m.side_x - p + 1;
      std::vector<FeatureMap> patches;
      std::vector<std::pair<int, int>> anchors;
      patches.reserve(field.per_block());
      anchors.reserve(field.per_block());
      for (std::size_t i = 0; i < field.per_block(); ++i) {
        const std::uint32_t j = field.index[k * field.per_block() + i];
        const int jy = static_cast<int>(j) / cand_cols;
        const int jx = static_cast<int>(j) % cand_cols;
        patches.push_back(detail::crop(region, jy * scale, jx * scale, p * scale, p * scale));
        const int iy = static_cast<int>(i) / field.m_w;
        const int ix = static_cast<int>(i) % field.m_w;
        anchors.emplace_back(iy * scale, ix * scale);
      }
      FeatureMap folded = overlap_fold(patches, anchors, C, b * scale, b * scale);

      FeatureMap rmap(1, field.m_h, field.m_w);
      for (std::size_t i = 0; i < field.per_block(); ++i)
        rmap.values[i] = field.score[k * field.per_block() + i];
      const FeatureMap weight = bilinear_resize(rmap, b * scale, b * scale);
      for (int c = 0; c < C; ++c)
        for (int y = 0; y < b * scale; ++y)
          for (int x = 0; x < b * scale; ++x) folded.at(c, y, x) *= weight.at(0, y, x);
      out_blocks[k] = std::move(folded);
    }
  });
  return fold_blocks(out_blocks, field.partition, scale);
}

/// Closed-form operation counts for a configuration and feature geometry.
/// Counting unit: one cosine evaluation. Coarse cost is K candidates summed
/// over dilations, fine cost K*(b-p+1)^2*n', dense baseline m*n.
inline ComplexityReport predicted_ops(const MatchConfig& cfg, int lr_h, int lr_w, int rd_h,
                                      int rd_w) {
  cfg.validate();
  ComplexityReport r;
  const std::uint64_t grid_rows = (lr_h + cfg.lr_block - 1) / cfg.lr_block;
  const std::uint64_t grid_cols = (lr_w + cfg.lr_block - 1) / cfg.lr_block;
  r.lr_blocks = grid_rows * grid_cols;
  const std::uint64_t m_side = cfg.lr_block - cfg.patch + 1;
  r.lr_patches = r.lr_blocks * m_side * m_side;
  r.ref_patches = rd_h >= cfg.patch && rd_w >= cfg.patch
                      ? static_cast<std::uint64_t>(rd_h - cfg.patch + 1) * (rd_w - cfg.patch + 1)
                      : 0;
  r.dilation_count = static_cast<int>(cfg.dilations.size());
  for (int d : cfg.dilations) {
    const int f = (cfg.patch - 1) * d + 1;
    if (f > rd_h || f > rd_w) continue;
    r.predicted_coarse +=
        r.lr_blocks * static_cast<std::uint64_t>(rd_h - f + 1) * (rd_w - f + 1);
  }
  const auto [dy, dx] = ref_block_sides(cfg, lr_h, lr_w, rd_h, rd_w);
  r.ref_block_patches = static_cast<std::uint64_t>(dy - cfg.patch + 1) * (dx - cfg.patch + 1);
  r.predicted_fine = r.lr_patches * r.ref_block_patches;
  r.dense_baseline = r.lr_patches * r.ref_patches;
  return r;
}

/// Exhaustive baseline: the same per-block LR patch enumeration as
/// fine_match, each patch scored against every dilation-1 reference patch.
/// Index values are global row-major positions in the reference patch grid.
struct DenseMatchResult {
  BlockPartition partition;
  int m_h = 0;
  int m_w = 0;
  int grid_cols = 0;  // reference candidate grid width
  std::vector<std::uint32_t> index;
  std::vector<float> score;
  std::uint64_t ops = 0;

  std::size_t per_block() const { return static_cast<std::size_t>(m_h) * m_w; }
};

inline DenseMatchResult dense_match_oracle(const FeatureMap& f_lr, const FeatureMap& f_ref_down,
                                           const MatchConfig& cfg, int workers = 1) {
  cfg.validate();
  require(f_lr.channels == f_ref_down.channels, "dense_match_oracle: channel mismatch");
  auto [partition, blocks] = unfold_blocks(f_lr, cfg.lr_block, cfg.lr_block);

  const PatchGrid ref_grid{cfg.patch, 1, 1, f_ref_down.height, f_ref_down.width};
  ref_grid.validate();
  PatchMatrix cand = extract_patches(f_ref_down, ref_grid);
  detail::normalize_rows(cand);

  DenseMatchResult result;
  result.partition = partition;
  result.m_h = cfg.lr_block - cfg.patch + 1;
  result.m_w = result.m_h;
  result.grid_cols = ref_grid.cols();
  const int K = partition.block_count();
  const std::size_t per = result.per_block();
  result.index.assign(per * K, 0);
  result.score.assign(per * K, 0.0f);
  std::vector<std::uint64_t> ops(K, 0);

  const PatchGrid lr_grid{cfg.patch, 1, 1, cfg.lr_block, cfg.lr_block};
  parallel_chunks(K, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      PatchMatrix lr_patches = extract_patches(blocks[k], lr_grid);
      detail::normalize_rows(lr_patches);
      for (int i = 0; i < lr_patches.count; ++i) {
        const float* p = lr_patches.row(i);
        float best = -2.0f;
        std::uint32_t best_j = 0;
        for (int j = 0; j < cand.count; ++j) {
          const float s = detail::normalized_dot(p, cand.row(j), cand.length);
          if (s > best) {
            best = s;
            best_j = static_cast<std::uint32_t>(j);
          }
        }
        result.index[k * per + i] = best_j;
        result.score[k * per + i] = best;
      }
      ops[k] = static_cast<std::uint64_t>(lr_patches.count) * cand.count;
    }
  });
  for (int k = 0; k < K; ++k) result.ops += ops[k];
  return result;
}

struct MemResult {
  CorrespondenceField field;
  std::vector<FeatureMap> extracted;  // parallel to cfg.scales
  ComplexityReport complexity;
};

/// Full Match & Extraction forward pass: stages 1 and 2 once, stage 3 per
/// scale. Counted operations are checked against the closed form.
inline MemResult mem_forward(const FeatureMap& f_lr, const FeatureMap& f_ref_down,
                             const std::vector<FeatureMap>& f_ref_scales, const MatchConfig& cfg,
                             int workers = 1) {
  cfg.validate();
  require_config(f_ref_scales.size() == cfg.scales.size(),
                 "need one reference feature per extraction scale");
  for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
    const int s = cfg.scales[si];
    require_config(f_ref_scales[si].height == f_ref_down.height * s &&
                       f_ref_scales[si].width == f_ref_down.width * s,
                   "scale-s reference feature must be s times the downsampled reference");
    require_config(f_ref_scales[si].channels == f_ref_down.channels,
                   "reference feature channel mismatch across scales");
  }

  MemResult out;
  const CoarseResult coarse = coarse_match(f_lr, f_ref_down, cfg, workers);
  std::uint64_t fine_ops = 0;
  out.field = fine_match(f_lr, f_ref_down, coarse, cfg, workers, &fine_ops);

  out.complexity =
      predicted_ops(cfg, f_lr.height, f_lr.width, f_ref_down.height, f_ref_down.width);
  out.complexity.counted_coarse = coarse.ops;
  out.complexity.counted_fine = fine_ops;
  require(out.complexity.counted_coarse == out.complexity.predicted_coarse &&
              out.complexity.counted_fine == out.complexity.predicted_fine,
          "instrumented operation count diverged from the closed form");

  out.extracted.reserve(cfg.scales.size());
  for (std::size_t si = 0; si < cfg.scales.size(); ++si)
    out.extracted.push_back(extract_features(f_ref_scales[si], cfg.scales[si], out.field, workers));
  return out;
}

}  // namespace masa
