// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

// Fixed end-to-end scenarios shared by the unit tests and the acceptance
// gate so frozen goldens and later runs measure exactly the same thing.

#pragma once

#include <cstdint>

#include "masa/masa.hpp"
#include "support/synthetic.hpp"

namespace scenario {

inline masa::PipelineConfig default_config(int workers) {
  masa::PipelineConfig cfg;
  cfg.workers = workers;
  return cfg;
}

struct SelfReference {
  double psnr_vs_ref = 0.0;
  std::uint64_t sr_checksum = 0;
};

/// Transfer where the LR input is exactly the x4 bicubic downsample of the
/// reference, so every patch has a perfect correspondence.
inline SelfReference self_reference_transfer(int workers) {
  const masa::Image ref = synth::noise_image(512, 512, 2026);
  const masa::Image lr = masa::bicubic_resize(ref, masa::Fraction{1, 4});
  const masa::TransferResult r = masa::run_transfer(lr, ref, default_config(workers));
  SelfReference out;
  out.psnr_vs_ref = masa::psnr_y(r.sr, ref);
  out.sr_checksum = masa::image_checksum(r.sr);
  return out;
}

/// Correspondence visualization of the first desk-corpus pair.
inline std::uint64_t corpus_pair0_viz_checksum(int workers) {
  const masa::Image ref = synth::noise_image(512, 512, 100);
  const masa::Image lr = masa::bicubic_resize(ref, masa::Fraction{1, 4});
  const masa::EncoderSpec enc = masa::make_encoder("identity-rgb");
  const masa::FeatureMap f_lr = masa::encode(lr, enc, 1);
  const masa::FeatureMap f_rd = masa::encode(masa::bicubic_resize(ref, masa::Fraction{1, 4}), enc, 1);
  masa::MatchConfig cfg;
  const masa::CoarseResult coarse = masa::coarse_match(f_lr, f_rd, cfg, workers);
  const masa::CorrespondenceField field = masa::fine_match(f_lr, f_rd, coarse, cfg, workers);
  const masa::Image viz = masa::visualize_correspondence(field, f_rd.height, f_rd.width);
  return masa::image_checksum(viz);
}

inline std::uint64_t tensor_checksum(const masa::Tensor& t) {
  std::uint64_t h = masa::fnv1a(t.dims.data(), t.dims.size() * sizeof(std::uint32_t));
  return masa::fnv1a(t.data.data(), t.data.size() * sizeof(float), h);
}

inline std::uint64_t seeded_predictor_checksum() {
  return tensor_checksum(masa::detail::seeded_predictor_taps(3, 42));
}

inline std::uint64_t seeded_dram_checksum() {
  const masa::DramWeights w = masa::make_dram_weights(masa::DramMode::kSeeded, 3, 7);
  std::uint64_t h = tensor_checksum(w.conv_down.taps);
  h = masa::fnv1a(&h, sizeof(h), tensor_checksum(w.deconv_up_ref.taps));
  h = masa::fnv1a(&h, sizeof(h), tensor_checksum(w.deconv_up_lr.taps));
  h = masa::fnv1a(&h, sizeof(h), tensor_checksum(w.conv_merge.taps));
  return h;
}

}  // namespace scenario
