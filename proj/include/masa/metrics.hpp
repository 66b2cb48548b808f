// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "masa/common.hpp"
#include "masa/image.hpp"
#include "masa/matching.hpp"

namespace masa {

struct MetricReport {
  double l1 = 0.0;
  double psnr_y = 0.0;
  double ssim_y = 0.0;
};

inline double l1_loss(const Image& a, const Image& b) {
  require(a.same_shape(b), "l1_loss: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    sum += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
  return sum / static_cast<double>(a.data.size());
}

namespace detail {

// BT.601 luma on the [16, 235] range, inputs in [0, 1].
inline std::vector<double> luma_plane(const Image& img) {
  std::vector<double> y(static_cast<std::size_t>(img.height) * img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      y[static_cast<std::size_t>(r) * img.width + c] = 65.481 * img.at(r, c, 0) +
                                                       128.553 * img.at(r, c, 1) +
                                                       24.966 * img.at(r, c, 2) + 16.0;
  return y;
}

}  // namespace detail

/// PSNR on the (unquantized) luma channel, peak 255. Identical images give
/// +infinity.
inline double psnr_y(const Image& a, const Image& b) {
  require(a.same_shape(b), "psnr_y: shape mismatch");
  const std::vector<double> ya = detail::luma_plane(a);
  const std::vector<double> yb = detail::luma_plane(b);
  double mse = 0.0;
  for (std::size_t i = 0; i < ya.size(); ++i) {
    const double d = ya[i] - yb[i];
    mse += d * d;
  }
  mse /= static_cast<double>(ya.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

/// Single-scale SSIM on luma: 11x11 Gaussian window (sigma 1.5), K1=0.01,
/// K2=0.03, dynamic range 255, valid windows only.
inline double ssim_y(const Image& a, const Image& b) {
  require(a.same_shape(b), "ssim_y: shape mismatch");
  constexpr int kWin = 11;
  require(a.height >= kWin && a.width >= kWin, "ssim_y: image smaller than the 11x11 window");

  double g[kWin];
  double gsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  const int h = a.height, w = a.width;
  const int vw = w - kWin + 1, vh = h - kWin + 1;
  const std::vector<double> ya = detail::luma_plane(a);
  const std::vector<double> yb = detail::luma_plane(b);

  // Separable filtering of the five moment planes, horizontal then vertical.
  const std::size_t hn = static_cast<std::size_t>(h) * vw;
  std::vector<double> m1(hn), m2(hn), s11(hn), s22(hn), s12(hn);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < vw; ++c) {
      double a1 = 0, a2 = 0, b11 = 0, b22 = 0, b12 = 0;
      for (int t = 0; t < kWin; ++t) {
        const double xa = ya[static_cast<std::size_t>(r) * w + c + t];
        const double xb = yb[static_cast<std::size_t>(r) * w + c + t];
        a1 += g[t] * xa;
        a2 += g[t] * xb;
        b11 += g[t] * xa * xa;
        b22 += g[t] * xb * xb;
        b12 += g[t] * xa * xb;
      }
      const std::size_t at = static_cast<std::size_t>(r) * vw + c;
      m1[at] = a1;
      m2[at] = a2;
      s11[at] = b11;
      s22[at] = b22;
      s12[at] = b12;
    }

  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  double total = 0.0;
  for (int r = 0; r < vh; ++r)
    for (int c = 0; c < vw; ++c) {
      double mu1 = 0, mu2 = 0, e11 = 0, e22 = 0, e12 = 0;
      for (int t = 0; t < kWin; ++t) {
        const std::size_t at = static_cast<std::size_t>(r + t) * vw + c;
        mu1 += g[t] * m1[at];
        mu2 += g[t] * m2[at];
        e11 += g[t] * s11[at];
        e22 += g[t] * s22[at];
        e12 += g[t] * s12[at];
      }
      const double var1 = e11 - mu1 * mu1;
      const double var2 = e22 - mu2 * mu2;
      const double cov = e12 - mu1 * mu2;
      total += ((2.0 * mu1 * mu2 + kC1) * (2.0 * cov + kC2)) /
               ((mu1 * mu1 + mu2 * mu2 + kC1) * (var1 + var2 + kC2));
    }
  return total / (static_cast<double>(vh) * vw);
}

inline MetricReport compute_metrics(const Image& a, const Image& b) {
  return {l1_loss(a, b), psnr_y(a, b), ssim_y(a, b)};
}

/// FLOP estimates for similarity work. One cosine evaluation over length
/// patch*patch*C vectors is modeled as 5*patch^2*C operations (dot product
/// plus two norms); the doubled column counts a multiply-add as two.
struct FlopsBreakdown {
  std::uint64_t ops = 0;
  double flops_fused = 0.0;    // multiply-add counted once
  double flops_separate = 0.0; // multiply-add counted twice
};

inline FlopsBreakdown flops_of(std::uint64_t ops, int patch, int channels) {
  FlopsBreakdown f;
  f.ops = ops;
  const double per = 5.0 * patch * patch * channels;
  f.flops_fused = static_cast<double>(ops) * per;
  f.flops_separate = 2.0 * f.flops_fused;
  return f;
}

namespace detail {

inline std::string giga(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3fG", v / 1e9);
  return buf;
}

}  // namespace detail

/// Renders the complexity report as an aligned text table, including the
/// dense-baseline ratio and the published FLOPS-M reference row.
inline std::string flops_table(const ComplexityReport& r, int patch, int channels) {
  const FlopsBreakdown total = flops_of(r.counted_total(), patch, channels);
  const FlopsBreakdown dense = flops_of(r.dense_baseline, patch, channels);
  std::string out;
  char buf[256];
  auto row = [&](const char* name, std::uint64_t ops, const FlopsBreakdown& f) {
    std::snprintf(buf, sizeof(buf), "  %-16s %14llu ops   %10s / %10s flops\n", name,
                  static_cast<unsigned long long>(ops), detail::giga(f.flops_fused).c_str(),
                  detail::giga(f.flops_separate).c_str());
    out += buf;
  };
  out += "similarity work (cosine evaluations; flops columns: fused / separate mul-add)\n";
  row("coarse", r.counted_coarse, flops_of(r.counted_coarse, patch, channels));
  row("fine", r.counted_fine, flops_of(r.counted_fine, patch, channels));
  row("total", r.counted_total(), total);
  row("dense baseline", r.dense_baseline, dense);
  const double ratio = r.reduction();
  std::snprintf(buf, sizeof(buf), "  reduction vs dense: %.2fx%s\n", ratio,
                ratio <= 1.0 ? "   [no acceleration]" : "");
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "  geometry: K=%llu m=%llu n=%llu n'=%llu dilations=%d\n",
                static_cast<unsigned long long>(r.lr_blocks),
                static_cast<unsigned long long>(r.lr_patches),
                static_cast<unsigned long long>(r.ref_patches),
                static_cast<unsigned long long>(r.ref_block_patches), r.dilation_count);
  out += buf;
  out += "  published FLOPS-M reference: MASA 8.84G, TTSR 618.48G, SRNTT 6005.78G\n";
  return out;
}

}  // namespace masa
