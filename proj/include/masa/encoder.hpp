// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "masa/common.hpp"
#include "masa/feature_map.hpp"
#include "masa/image.hpp"
#include "masa/weights_io.hpp"

namespace masa {

enum class EncoderKind { kIdentityRgb, kFilterBank, kLoaded };

/// Deterministic stand-in feature extractors. The matcher only needs
/// descriptors that are stable across LR/Ref scales; identity-rgb keeps
/// results human-inspectable, filter-bank adds gradient and smoothing
/// channels for less trivial similarity structure.
struct EncoderSpec {
  EncoderKind kind = EncoderKind::kIdentityRgb;
  std::string weight_path;

  int channels() const {
    switch (kind) {
      case EncoderKind::kIdentityRgb: return 3;
      case EncoderKind::kFilterBank: return 12;
      case EncoderKind::kLoaded: return loaded_channels;
    }
    return 3;
  }

  int loaded_channels = 0;
  std::vector<Tensor> loaded;
};

inline EncoderSpec make_encoder(const std::string& name, const std::string& weight_path = {}) {
  EncoderSpec spec;
  if (name == "identity-rgb") {
    spec.kind = EncoderKind::kIdentityRgb;
  } else if (name == "filter-bank") {
    spec.kind = EncoderKind::kFilterBank;
  } else if (name == "loaded") {
    spec.kind = EncoderKind::kLoaded;
    require_config(!weight_path.empty(), "loaded encoder needs a weight file");
    spec.weight_path = weight_path;
    spec.loaded = read_weights(weight_path);
    require_config(spec.loaded.size() >= 1, "encoder weight file is empty");
    const Tensor& w = spec.loaded[0];
    require_config(w.dims.size() == 4 && w.dims[1] == 3,
                   "encoder weights must be (c_out, 3, k, k)");
    require_config(w.dims[2] == w.dims[3] && w.dims[2] % 2 == 1,
                   "encoder kernel must be square with odd side");
    spec.loaded_channels = static_cast<int>(w.dims[0]);
  } else {
    throw ConfigError("unknown encoder '" + name + "'");
  }
  return spec;
}

namespace detail {

inline FeatureMap image_to_planar(const Image& img) {
  FeatureMap f(3, img.height, img.width);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) f.at(c, y, x) = img.at(y, x, c);
  return f;
}

// 3x3 stencil over one input plane, reflect borders.
inline void apply_stencil(const FeatureMap& src, int c_in, const float k[9], FeatureMap& dst,
                          int c_out) {
  const int h = src.height, w = src.width;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ky = -1; ky <= 1; ++ky) {
        const int sy = reflect_index(y + ky, h);
        for (int kx = -1; kx <= 1; ++kx) {
          const int sx = reflect_index(x + kx, w);
          acc += static_cast<double>(k[(ky + 1) * 3 + (kx + 1)]) * src.at(c_in, sy, sx);
        }
      }
      dst.at(c_out, y, x) = static_cast<float>(acc);
    }
  }
}

inline FeatureMap conv_general(const FeatureMap& src, const Tensor& w, const Tensor* bias) {
  const int c_out = static_cast<int>(w.dims[0]);
  const int c_in = static_cast<int>(w.dims[1]);
  const int k = static_cast<int>(w.dims[2]);
  const int r = k / 2;
  require(src.channels == c_in, "conv_general: channel mismatch");
  FeatureMap dst(c_out, src.height, src.width);
  for (int co = 0; co < c_out; ++co) {
    const float b = bias ? bias->data[static_cast<std::size_t>(co)] : 0.0f;
    for (int y = 0; y < src.height; ++y) {
      for (int x = 0; x < src.width; ++x) {
        double acc = b;
        for (int ci = 0; ci < c_in; ++ci) {
          for (int ky = 0; ky < k; ++ky) {
            const int sy = reflect_index(y + ky - r, src.height);
            for (int kx = 0; kx < k; ++kx) {
              const int sx = reflect_index(x + kx - r, src.width);
              const std::size_t wi =
                  ((static_cast<std::size_t>(co) * c_in + ci) * k + ky) * k + kx;
              acc += static_cast<double>(w.data[wi]) * src.at(ci, sy, sx);
            }
          }
        }
        dst.at(co, y, x) = static_cast<float>(acc);
      }
    }
  }
  return dst;
}

// Non-overlapping average pooling; pads by reflection when the size does
// not divide evenly so every output cell averages a full window.
inline FeatureMap average_pool(const FeatureMap& src, int factor) {
  require(factor >= 1, "average_pool: factor must be >= 1");
  if (factor == 1) return src;
  const int pad_b = (factor - src.height % factor) % factor;
  const int pad_r = (factor - src.width % factor) % factor;
  const FeatureMap padded = (pad_b || pad_r) ? reflect_pad(src, pad_b, pad_r) : src;
  const int oh = padded.height / factor, ow = padded.width / factor;
  FeatureMap dst(src.channels, oh, ow);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int c = 0; c < src.channels; ++c) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (int py = 0; py < factor; ++py)
          for (int px = 0; px < factor; ++px) acc += padded.at(c, y * factor + py, x * factor + px);
        dst.at(c, y, x) = static_cast<float>(acc * inv);
      }
    }
  }
  return dst;
}

}  // namespace detail

/// Encode an image into a planar feature map, then downsample spatially by
/// `pool_factor` (1, 2 or 4) with non-overlapping average pooling.
inline FeatureMap encode(const Image& img, const EncoderSpec& spec, int pool_factor = 1) {
  require_config(pool_factor == 1 || pool_factor == 2 || pool_factor == 4,
                 "pool_factor must be 1, 2 or 4");
  const FeatureMap rgb = detail::image_to_planar(img);
  FeatureMap feat;
  switch (spec.kind) {
    case EncoderKind::kIdentityRgb:
      feat = rgb;
      break;
    case EncoderKind::kFilterBank: {
      // Filter-major layout: identity, d/dx, d/dy, 3x3 binomial blur,
      // each applied to R, G, B in turn.
      static const float kId[9] = {0, 0, 0, 0, 1, 0, 0, 0, 0};
      static const float kGx[9] = {0, 0, 0, -0.5f, 0, 0.5f, 0, 0, 0};
      static const float kGy[9] = {0, -0.5f, 0, 0, 0, 0, 0, 0.5f, 0};
      static const float kBlur[9] = {1 / 16.0f, 2 / 16.0f, 1 / 16.0f, 2 / 16.0f, 4 / 16.0f,
                                     2 / 16.0f, 1 / 16.0f, 2 / 16.0f, 1 / 16.0f};
      static const float* kBank[4] = {kId, kGx, kGy, kBlur};
      feat = FeatureMap(12, img.height, img.width);
      for (int fi = 0; fi < 4; ++fi)
        for (int c = 0; c < 3; ++c) detail::apply_stencil(rgb, c, kBank[fi], feat, fi * 3 + c);
      break;
    }
    case EncoderKind::kLoaded: {
      const Tensor* bias = spec.loaded.size() >= 2 ? &spec.loaded[1] : nullptr;
      if (bias)
        require_config(bias->dims.size() == 1 && bias->dims[0] == spec.loaded[0].dims[0],
                       "encoder bias shape mismatch");
      feat = detail::conv_general(rgb, spec.loaded[0], bias);
      break;
    }
  }
  return detail::average_pool(feat, pool_factor);
}

/// Map a feature volume back to an RGB image: take the first three channels
/// and clamp into [0, 1]. Inverts identity-rgb exactly.
inline Image decode_rgb(const FeatureMap& f) {
  require(f.channels >= 3, "decode_rgb: need at least 3 channels");
  Image img(f.height, f.width);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < 3; ++c) {
        float v = f.at(c, y, x);
        img.at(y, x, c) = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
      }
  return img;
}

}  // namespace masa
