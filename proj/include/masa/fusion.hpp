// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "masa/adaptation.hpp"
#include "masa/common.hpp"
#include "masa/feature_map.hpp"
#include "masa/rng.hpp"
#include "masa/weights_io.hpp"

namespace masa {

/// Plain cross-correlation kernel. Padding is zero-fill; stride-1 kernels
/// pad k/2, stride-2 kernels pad 0 for k=2 and (k-1)/2 otherwise, so even
/// input sizes halve exactly.
struct ConvKernel {
  Tensor taps;  // (c_out, c_in, k, k)
  std::vector<float> bias;
  int stride = 1;

  int k() const { return static_cast<int>(taps.dims[2]); }
  int c_out() const { return static_cast<int>(taps.dims[0]); }
  int c_in() const { return static_cast<int>(taps.dims[1]); }
  int pad() const { return stride == 1 ? k() / 2 : (k() == 2 ? 0 : (k() - 1) / 2); }

  void validate() const {
    require_config(taps.dims.size() == 4 && taps.dims[2] == taps.dims[3],
                   "conv taps must be (c_out, c_in, k, k)");
    require_config(stride == 1 || stride == 2, "conv stride must be 1 or 2");
    require_config(bias.empty() || bias.size() == taps.dims[0], "conv bias length mismatch");
    require_config(taps.data.size() == taps.element_count(), "conv taps size mismatch");
  }
};

/// Stride-2 transposed convolution doubling the spatial size exactly:
/// pad = ceil((k-2)/2) and output padding 2*pad - k + 2.
struct DeconvKernel {
  Tensor taps;  // (c_in, c_out, k, k)
  std::vector<float> bias;

  int k() const { return static_cast<int>(taps.dims[2]); }
  int c_in() const { return static_cast<int>(taps.dims[0]); }
  int c_out() const { return static_cast<int>(taps.dims[1]); }
  int pad() const { return (k() - 1) / 2; }  // ceil((k-2)/2) for k >= 1

  void validate() const {
    require_config(taps.dims.size() == 4 && taps.dims[2] == taps.dims[3],
                   "deconv taps must be (c_in, c_out, k, k)");
    require_config(bias.empty() || bias.size() == taps.dims[1], "deconv bias length mismatch");
    require_config(taps.data.size() == taps.element_count(), "deconv taps size mismatch");
  }
};

inline FeatureMap conv2d(const FeatureMap& f, const ConvKernel& kernel) {
  kernel.validate();
  require(f.channels == kernel.c_in(), "conv2d: channel mismatch");
  const int k = kernel.k(), p = kernel.pad(), s = kernel.stride;
  const int oh = (f.height + 2 * p - k) / s + 1;
  const int ow = (f.width + 2 * p - k) / s + 1;
  require(oh >= 1 && ow >= 1, "conv2d: kernel larger than padded input");
  FeatureMap out(kernel.c_out(), oh, ow);
  for (int co = 0; co < kernel.c_out(); ++co) {
    const double b = kernel.bias.empty() ? 0.0 : kernel.bias[static_cast<std::size_t>(co)];
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = b;
        for (int ci = 0; ci < f.channels; ++ci)
          for (int ky = 0; ky < k; ++ky) {
            const int sy = y * s - p + ky;
            if (sy < 0 || sy >= f.height) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int sx = x * s - p + kx;
              if (sx < 0 || sx >= f.width) continue;
              const std::size_t wi =
                  ((static_cast<std::size_t>(co) * f.channels + ci) * k + ky) * k + kx;
              acc += static_cast<double>(kernel.taps.data[wi]) * f.at(ci, sy, sx);
            }
          }
        out.at(co, y, x) = static_cast<float>(acc);
      }
  }
  return out;
}

inline FeatureMap deconv2d(const FeatureMap& f, const DeconvKernel& kernel) {
  kernel.validate();
  require(f.channels == kernel.c_in(), "deconv2d: channel mismatch");
  const int k = kernel.k(), p = kernel.pad();
  const int oh = 2 * f.height;
  const int ow = 2 * f.width;
  FeatureMap out(kernel.c_out(), oh, ow);
  std::vector<double> acc(static_cast<std::size_t>(oh) * ow);
  for (int co = 0; co < kernel.c_out(); ++co) {
    const double b = kernel.bias.empty() ? 0.0 : kernel.bias[static_cast<std::size_t>(co)];
    std::fill(acc.begin(), acc.end(), b);
    for (int ci = 0; ci < f.channels; ++ci)
      for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
          const double v = f.at(ci, y, x);
          for (int ky = 0; ky < k; ++ky) {
            const int oy = 2 * y - p + ky;
            if (oy < 0 || oy >= oh) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ox = 2 * x - p + kx;
              if (ox < 0 || ox >= ow) continue;
              const std::size_t wi =
                  ((static_cast<std::size_t>(ci) * kernel.c_out() + co) * k + ky) * k + kx;
              acc[static_cast<std::size_t>(oy) * ow + ox] +=
                  v * static_cast<double>(kernel.taps.data[wi]);
            }
          }
        }
    float* plane = out.plane(co);
    for (std::size_t i = 0; i < acc.size(); ++i) plane[i] = static_cast<float>(acc[i]);
  }
  return out;
}

enum class DramMode { kFixedDefault, kSeeded, kLoaded };

/// The four kernels of the dual-residual fusion stage. The fixed default is
/// a 2x2 average pool down, per-channel bilinear taps up, and a merge that
/// averages the two refined branches, all with zero bias, so the forward
/// pass is linear and its residual identities are exact.
struct DramWeights {
  DramMode mode = DramMode::kFixedDefault;
  ConvKernel conv_down;
  DeconvKernel deconv_up_ref;
  DeconvKernel deconv_up_lr;
  ConvKernel conv_merge;

  void validate() const {
    conv_down.validate();
    deconv_up_ref.validate();
    deconv_up_lr.validate();
    conv_merge.validate();
    require_config(conv_down.stride == 2, "conv_down must have stride 2");
    require_config(conv_merge.stride == 1, "conv_merge must have stride 1");
    const int C = conv_down.c_in();
    require_config(conv_down.c_out() == C && deconv_up_ref.c_in() == C &&
                       deconv_up_ref.c_out() == C && deconv_up_lr.c_in() == C &&
                       deconv_up_lr.c_out() == C && conv_merge.c_in() == 2 * C,
                   "fusion kernel channel counts do not chain");
  }
};

namespace detail {

inline DeconvKernel bilinear_deconv(int channels) {
  DeconvKernel d;
  d.taps.dims = {static_cast<std::uint32_t>(channels), static_cast<std::uint32_t>(channels), 4,
                 4};
  d.taps.data.assign(d.taps.element_count(), 0.0f);
  static const float w1[4] = {0.25f, 0.75f, 0.75f, 0.25f};
  for (int c = 0; c < channels; ++c)
    for (int ky = 0; ky < 4; ++ky)
      for (int kx = 0; kx < 4; ++kx)
        d.taps.data[((static_cast<std::size_t>(c) * channels + c) * 4 + ky) * 4 + kx] =
            w1[ky] * w1[kx];
  return d;
}

inline void fill_uniform(Tensor& t, std::mt19937& gen) {
  t.data.resize(t.element_count());
  for (auto& v : t.data) v = static_cast<float>(uniform_in(gen, -0.1, 0.1));
}

}  // namespace detail

inline DramWeights make_dram_weights(DramMode mode, int channels, std::uint32_t seed = 7,
                                     const std::string& weight_path = {}) {
  require_config(channels >= 1, "fusion needs at least one channel");
  const std::uint32_t C = static_cast<std::uint32_t>(channels);
  DramWeights w;
  w.mode = mode;
  switch (mode) {
    case DramMode::kFixedDefault: {
      w.conv_down.stride = 2;
      w.conv_down.taps.dims = {C, C, 2, 2};
      w.conv_down.taps.data.assign(w.conv_down.taps.element_count(), 0.0f);
      for (int c = 0; c < channels; ++c)
        for (int t = 0; t < 4; ++t)
          w.conv_down.taps.data[(static_cast<std::size_t>(c) * channels + c) * 4 + t] = 0.25f;
      w.deconv_up_ref = detail::bilinear_deconv(channels);
      w.deconv_up_lr = detail::bilinear_deconv(channels);
      w.conv_merge.stride = 1;
      w.conv_merge.taps.dims = {C, 2 * C, 3, 3};
      w.conv_merge.taps.data.assign(w.conv_merge.taps.element_count(), 0.0f);
      for (int c = 0; c < channels; ++c) {
        const std::size_t base = static_cast<std::size_t>(c) * 2 * channels;
        w.conv_merge.taps.data[((base + c) * 3 + 1) * 3 + 1] = 0.5f;
        w.conv_merge.taps.data[((base + channels + c) * 3 + 1) * 3 + 1] = 0.5f;
      }
      break;
    }
    case DramMode::kSeeded: {
      std::mt19937 gen(seed);
      w.conv_down.stride = 2;
      w.conv_down.taps.dims = {C, C, 3, 3};
      detail::fill_uniform(w.conv_down.taps, gen);
      w.deconv_up_ref.taps.dims = {C, C, 4, 4};
      detail::fill_uniform(w.deconv_up_ref.taps, gen);
      w.deconv_up_lr.taps.dims = {C, C, 4, 4};
      detail::fill_uniform(w.deconv_up_lr.taps, gen);
      w.conv_merge.stride = 1;
      w.conv_merge.taps.dims = {C, 2 * C, 3, 3};
      detail::fill_uniform(w.conv_merge.taps, gen);
      break;
    }
    case DramMode::kLoaded: {
      require_config(!weight_path.empty(), "loaded fusion weights need a file path");
      const std::vector<Tensor> tensors = read_weights(weight_path);
      require_config(tensors.size() == 8,
                     "fusion weight file must hold 4 tap/bias tensor pairs");
      w.conv_down.taps = tensors[0];
      w.conv_down.bias = tensors[1].data;
      w.conv_down.stride = 2;
      w.deconv_up_ref.taps = tensors[2];
      w.deconv_up_ref.bias = tensors[3].data;
      w.deconv_up_lr.taps = tensors[4];
      w.deconv_up_lr.bias = tensors[5].data;
      w.conv_merge.taps = tensors[6];
      w.conv_merge.bias = tensors[7].data;
      w.conv_merge.stride = 1;
      break;
    }
  }
  w.validate();
  return w;
}

/// Intermediate maps of the fusion forward pass, exposed for testing the
/// residual identities.
struct DramTrace {
  FeatureMap res_ref;
  FeatureMap res_lr;
  FeatureMap ref_refined;
  FeatureMap lr_refined;
  FeatureMap merged;
};

/// Dual residual aggregation: the Ref branch is corrected by the upsampled
/// downsampling residual, the LR branch amplifies its own residual before
/// upsampling, and a merge convolution fuses the concatenated branches.
/// Output spatial size equals the Ref feature size (twice the LR size).
inline DramTrace dram_forward_traced(const FeatureMap& f_lr, const FeatureMap& f_ref,
                                     const DramWeights& w) {
  w.validate();
  require(f_ref.height == 2 * f_lr.height && f_ref.width == 2 * f_lr.width,
          "fusion expects the Ref feature at twice the LR size");
  require(f_lr.channels == f_ref.channels && f_lr.channels == w.conv_down.c_in(),
          "fusion channel mismatch");

  DramTrace t;
  const FeatureMap down = conv2d(f_ref, w.conv_down);
  require(down.height == f_lr.height && down.width == f_lr.width,
          "fusion downsampling produced the wrong size");
  const std::size_t n = f_lr.values.size();
  t.res_ref = FeatureMap(f_lr.channels, f_lr.height, f_lr.width);
  t.res_lr = FeatureMap(f_lr.channels, f_lr.height, f_lr.width);
  for (std::size_t i = 0; i < n; ++i) {
    t.res_ref.values[i] = down.values[i] - f_lr.values[i];
    t.res_lr.values[i] = f_lr.values[i] - down.values[i];
  }

  const FeatureMap ref_correction = deconv2d(t.res_ref, w.deconv_up_ref);
  t.ref_refined = f_ref;
  for (std::size_t i = 0; i < t.ref_refined.values.size(); ++i)
    t.ref_refined.values[i] += ref_correction.values[i];

  FeatureMap lr_boosted(f_lr.channels, f_lr.height, f_lr.width);
  for (std::size_t i = 0; i < n; ++i)
    lr_boosted.values[i] = f_lr.values[i] + t.res_lr.values[i];
  t.lr_refined = deconv2d(lr_boosted, w.deconv_up_lr);

  t.merged = conv2d(detail::concat_channels(t.ref_refined, t.lr_refined), w.conv_merge);
  return t;
}

inline FeatureMap dram_forward(const FeatureMap& f_lr, const FeatureMap& f_ref,
                               const DramWeights& w) {
  return dram_forward_traced(f_lr, f_ref, w).merged;
}

}  // namespace masa
