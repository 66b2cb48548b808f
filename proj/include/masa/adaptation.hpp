// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "masa/common.hpp"
#include "masa/encoder.hpp"
#include "masa/feature_map.hpp"
#include "masa/rng.hpp"
#include "masa/weights_io.hpp"

namespace masa {

struct ChannelStats {
  std::vector<double> mu;
  std::vector<double> sigma;  // population convention, 1/HW
};

/// Spatial remapping parameters, one value per feature element.
struct SamParams {
  FeatureMap beta;
  FeatureMap gamma;
};

inline ChannelStats channel_stats(const FeatureMap& f) {
  ChannelStats s;
  s.mu.resize(f.channels);
  s.sigma.resize(f.channels);
  const std::size_t hw = static_cast<std::size_t>(f.height) * f.width;
  require(hw >= 1, "channel_stats: empty feature");
  for (int c = 0; c < f.channels; ++c) {
    const float* plane = f.plane(c);
    double sum = 0.0;
    for (std::size_t i = 0; i < hw; ++i) sum += plane[i];
    const double mu = sum / static_cast<double>(hw);
    double var = 0.0;
    for (std::size_t i = 0; i < hw; ++i) {
      const double d = plane[i] - mu;
      var += d * d;
    }
    s.mu[c] = mu;
    s.sigma[c] = std::sqrt(var / static_cast<double>(hw));
  }
  return s;
}

inline constexpr double kNormalizeEps = 1e-5;

/// (F - mu_c) / max(sigma_c, 1e-5) per channel. Constant channels map to 0.
inline FeatureMap instance_normalize(const FeatureMap& f, const ChannelStats& stats) {
  require(static_cast<int>(stats.mu.size()) == f.channels &&
              static_cast<int>(stats.sigma.size()) == f.channels,
          "instance_normalize: stats/channel mismatch");
  FeatureMap out(f.channels, f.height, f.width);
  const std::size_t hw = static_cast<std::size_t>(f.height) * f.width;
  for (int c = 0; c < f.channels; ++c) {
    const double denom = std::max(stats.sigma[c], kNormalizeEps);
    const double mu = stats.mu[c];
    const float* src = f.plane(c);
    float* dst = out.plane(c);
    for (std::size_t i = 0; i < hw; ++i)
      dst[i] = static_cast<float>((src[i] - mu) / denom);
  }
  return out;
}

enum class PredictorMode { kZero, kSeededLinear, kLoaded };

/// Produces the spatial beta/gamma residual maps from raw (LR, Ref) feature
/// pairs. The zero mode isolates the statistics pathway; seeded-linear is a
/// 3x3 convolution over the concatenated features with uniform(-0.1, 0.1)
/// weights from a fixed seed and zero bias.
struct ParamPredictor {
  PredictorMode mode = PredictorMode::kZero;
  std::uint32_t seed = 42;
  std::vector<Tensor> weights;  // loaded mode: conv taps, optional bias

  static ParamPredictor zero() { return {}; }

  static ParamPredictor seeded_linear(std::uint32_t seed = 42) {
    ParamPredictor p;
    p.mode = PredictorMode::kSeededLinear;
    p.seed = seed;
    return p;
  }

  static ParamPredictor loaded(const std::string& path) {
    ParamPredictor p;
    p.mode = PredictorMode::kLoaded;
    p.weights = read_weights(path);
    require_config(!p.weights.empty(), "predictor weight file is empty");
    const Tensor& w = p.weights[0];
    require_config(w.dims.size() == 4 && w.dims[2] == w.dims[3] && w.dims[2] % 2 == 1,
                   "predictor weights must be (c_out, c_in, k, k) with odd k");
    return p;
  }
};

namespace detail {

inline FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
  require(a.height == b.height && a.width == b.width, "concat_channels: spatial mismatch");
  FeatureMap out(a.channels + b.channels, a.height, a.width);
  const std::size_t hw = static_cast<std::size_t>(a.height) * a.width;
  for (int c = 0; c < a.channels; ++c)
    std::copy(a.plane(c), a.plane(c) + hw, out.plane(c));
  for (int c = 0; c < b.channels; ++c)
    std::copy(b.plane(c), b.plane(c) + hw, out.plane(a.channels + c));
  return out;
}

inline Tensor seeded_predictor_taps(int channels, std::uint32_t seed) {
  Tensor w;
  const std::uint32_t c2 = static_cast<std::uint32_t>(2 * channels);
  w.dims = {c2, c2, 3, 3};
  w.data.resize(w.element_count());
  std::mt19937 gen(seed);
  for (auto& v : w.data) v = static_cast<float>(uniform_in(gen, -0.1, 0.1));
  return w;
}

}  // namespace detail

/// Evaluate the predictor: first C output channels are the beta residual,
/// the last C the gamma residual.
inline SamParams predict_params(const ParamPredictor& p, const FeatureMap& f_lr,
                                const FeatureMap& f_ref) {
  require(f_lr.same_shape(f_ref), "predict_params: feature shape mismatch");
  const int C = f_lr.channels;
  SamParams out;
  switch (p.mode) {
    case PredictorMode::kZero:
      out.beta = FeatureMap(C, f_lr.height, f_lr.width);
      out.gamma = FeatureMap(C, f_lr.height, f_lr.width);
      return out;
    case PredictorMode::kSeededLinear: {
      const Tensor w = detail::seeded_predictor_taps(C, p.seed);
      const FeatureMap both = detail::concat_channels(f_lr, f_ref);
      const FeatureMap maps = detail::conv_general(both, w, nullptr);
      out.beta = FeatureMap(C, f_lr.height, f_lr.width);
      out.gamma = FeatureMap(C, f_lr.height, f_lr.width);
      const std::size_t hw = static_cast<std::size_t>(f_lr.height) * f_lr.width;
      for (int c = 0; c < C; ++c) {
        std::copy(maps.plane(c), maps.plane(c) + hw, out.beta.plane(c));
        std::copy(maps.plane(C + c), maps.plane(C + c) + hw, out.gamma.plane(c));
      }
      return out;
    }
    case PredictorMode::kLoaded: {
      const Tensor& w = p.weights[0];
      require_config(static_cast<int>(w.dims[1]) == 2 * C,
                     "predictor weights expect a different channel count");
      require_config(static_cast<int>(w.dims[0]) == 2 * C,
                     "predictor weights must emit 2C channels");
      const Tensor* bias = p.weights.size() >= 2 ? &p.weights[1] : nullptr;
      const FeatureMap both = detail::concat_channels(f_lr, f_ref);
      const FeatureMap maps = detail::conv_general(both, w, bias);
      out.beta = FeatureMap(C, f_lr.height, f_lr.width);
      out.gamma = FeatureMap(C, f_lr.height, f_lr.width);
      const std::size_t hw = static_cast<std::size_t>(f_lr.height) * f_lr.width;
      for (int c = 0; c < C; ++c) {
        std::copy(maps.plane(c), maps.plane(c) + hw, out.beta.plane(c));
        std::copy(maps.plane(C + c), maps.plane(C + c) + hw, out.gamma.plane(c));
      }
      return out;
    }
  }
  throw InvariantError("predict_params: unreachable");
}

/// Remap extracted reference features toward LR statistics: normalize the
/// Ref feature per channel, then scale and shift with gamma/beta maps whose
/// baselines are the LR channel statistics.
inline FeatureMap apply_sam(const FeatureMap& f_lr, const FeatureMap& f_ref_extracted,
                            const ParamPredictor& predictor) {
  require(f_lr.same_shape(f_ref_extracted), "apply_sam: feature shape mismatch");
  SamParams params = predict_params(predictor, f_lr, f_ref_extracted);
  const ChannelStats lr = channel_stats(f_lr);
  const FeatureMap normalized =
      instance_normalize(f_ref_extracted, channel_stats(f_ref_extracted));
  FeatureMap out(f_lr.channels, f_lr.height, f_lr.width);
  const std::size_t hw = static_cast<std::size_t>(f_lr.height) * f_lr.width;
  for (int c = 0; c < f_lr.channels; ++c) {
    const float* n = normalized.plane(c);
    const float* beta = params.beta.plane(c);
    const float* gamma = params.gamma.plane(c);
    float* dst = out.plane(c);
    const double mu = lr.mu[c];
    const double sigma = lr.sigma[c];
    for (std::size_t i = 0; i < hw; ++i)
      dst[i] = static_cast<float>(static_cast<double>(n[i]) * (gamma[i] + sigma) +
                                  (beta[i] + mu));
  }
  return out;
}

}  // namespace masa
