// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "masa/adaptation.hpp"
#include "masa/common.hpp"
#include "masa/correspondence_io.hpp"
#include "masa/encoder.hpp"
#include "masa/fusion.hpp"
#include "masa/image.hpp"
#include "masa/matching.hpp"
#include "masa/metrics.hpp"
#include "masa/resample.hpp"

namespace masa {

struct PipelineConfig {
  MatchConfig match;
  std::string encoder_mode = "identity-rgb";
  std::string encoder_weights;
  std::string predictor_mode = "zero";
  std::uint32_t predictor_seed = 42;
  std::string predictor_weights;
  std::string dram_mode = "fixed-default";
  std::uint32_t dram_seed = 7;
  std::string dram_weights;
  int upscale = 4;
  int workers = 1;

  void validate() const {
    match.validate();
    require_config(upscale == 4, "only the x4 upscale factor is supported");
    require_config(workers >= 1, "workers must be >= 1");
    require_config(encoder_mode == "identity-rgb" || encoder_mode == "filter-bank" ||
                       encoder_mode == "loaded",
                   "unknown encoder mode '" + encoder_mode + "'");
    require_config(predictor_mode == "zero" || predictor_mode == "seeded-linear" ||
                       predictor_mode == "loaded",
                   "unknown predictor mode '" + predictor_mode + "'");
    require_config(dram_mode == "fixed-default" || dram_mode == "seeded" ||
                       dram_mode == "loaded",
                   "unknown fusion mode '" + dram_mode + "'");
  }

  EncoderSpec make_encoder_spec() const { return make_encoder(encoder_mode, encoder_weights); }

  ParamPredictor make_predictor() const {
    if (predictor_mode == "zero") return ParamPredictor::zero();
    if (predictor_mode == "seeded-linear") return ParamPredictor::seeded_linear(predictor_seed);
    require_config(!predictor_weights.empty(), "loaded predictor needs a weight file");
    return ParamPredictor::loaded(predictor_weights);
  }

  DramWeights make_dram(int channels) const {
    if (dram_mode == "fixed-default")
      return make_dram_weights(DramMode::kFixedDefault, channels, dram_seed);
    if (dram_mode == "seeded") return make_dram_weights(DramMode::kSeeded, channels, dram_seed);
    require_config(!dram_weights.empty(), "loaded fusion weights need a file path");
    return make_dram_weights(DramMode::kLoaded, channels, dram_seed, dram_weights);
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    require_config(ok, "unknown key '" + it.key() + "' in " + where + " section");
  }
}

template <typename T>
inline T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["match"] = {{"lr_block", cfg.match.lr_block},
                {"ref_block_scale", cfg.match.ref_block_scale},
                {"patch", cfg.match.patch},
                {"dilations", cfg.match.dilations},
                {"scales", cfg.match.scales}};
  if (cfg.match.ref_block_override_h > 0 || cfg.match.ref_block_override_w > 0)
    j["match"]["ref_block_override"] =
        std::vector<int>{cfg.match.ref_block_override_h, cfg.match.ref_block_override_w};
  j["encoder"] = {{"mode", cfg.encoder_mode}, {"weights", cfg.encoder_weights}};
  j["predictor"] = {{"mode", cfg.predictor_mode},
                    {"seed", cfg.predictor_seed},
                    {"weights", cfg.predictor_weights}};
  j["dram"] = {{"mode", cfg.dram_mode}, {"seed", cfg.dram_seed}, {"weights", cfg.dram_weights}};
  j["upscale"] = cfg.upscale;
  j["workers"] = cfg.workers;
  return j;
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  detail::check_keys(j, {"match", "encoder", "predictor", "dram", "upscale", "workers"},
                     "top-level");
  if (j.contains("match")) {
    const auto& m = j.at("match");
    detail::check_keys(
        m, {"lr_block", "ref_block_scale", "patch", "dilations", "scales", "ref_block_override"},
        "match");
    cfg.match.lr_block = detail::get_or(m, "lr_block", cfg.match.lr_block);
    cfg.match.ref_block_scale = detail::get_or(m, "ref_block_scale", cfg.match.ref_block_scale);
    cfg.match.patch = detail::get_or(m, "patch", cfg.match.patch);
    cfg.match.dilations = detail::get_or(m, "dilations", cfg.match.dilations);
    cfg.match.scales = detail::get_or(m, "scales", cfg.match.scales);
    if (m.contains("ref_block_override")) {
      const auto v = m.at("ref_block_override").get<std::vector<int>>();
      require_config(v.size() == 2, "ref_block_override must be [rows, cols]");
      cfg.match.ref_block_override_h = v[0];
      cfg.match.ref_block_override_w = v[1];
    }
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    detail::check_keys(e, {"mode", "weights"}, "encoder");
    cfg.encoder_mode = detail::get_or<std::string>(e, "mode", cfg.encoder_mode);
    cfg.encoder_weights = detail::get_or<std::string>(e, "weights", cfg.encoder_weights);
  }
  if (j.contains("predictor")) {
    const auto& p = j.at("predictor");
    detail::check_keys(p, {"mode", "seed", "weights"}, "predictor");
    cfg.predictor_mode = detail::get_or<std::string>(p, "mode", cfg.predictor_mode);
    cfg.predictor_seed = detail::get_or(p, "seed", cfg.predictor_seed);
    cfg.predictor_weights = detail::get_or<std::string>(p, "weights", cfg.predictor_weights);
  }
  if (j.contains("dram")) {
    const auto& d = j.at("dram");
    detail::check_keys(d, {"mode", "seed", "weights"}, "dram");
    cfg.dram_mode = detail::get_or<std::string>(d, "mode", cfg.dram_mode);
    cfg.dram_seed = detail::get_or(d, "seed", cfg.dram_seed);
    cfg.dram_weights = detail::get_or<std::string>(d, "weights", cfg.dram_weights);
  }
  cfg.upscale = detail::get_or(j, "upscale", cfg.upscale);
  cfg.workers = detail::get_or(j, "workers", cfg.workers);
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(j);
}

inline std::uint64_t image_checksum(const Image& img) {
  const std::vector<unsigned char> bytes = to_byte(img);
  return fnv1a(bytes.data(), bytes.size());
}

inline std::uint64_t field_checksum(const CorrespondenceField& field) {
  std::uint64_t h = fnv1a(field.index.data(), field.index.size() * sizeof(std::uint32_t));
  h = fnv1a(field.score.data(), field.score.size() * sizeof(float), h);
  for (const BlockMatch& m : field.blocks) {
    const std::int32_t geo[4] = {m.anchor_y, m.anchor_x, m.side_y, m.side_x};
    h = fnv1a(geo, sizeof(geo), h);
  }
  return h;
}

inline double mean_similarity(const CorrespondenceField& field) {
  double sum = 0.0;
  for (float s : field.score) sum += s;
  return field.score.empty() ? 0.0 : sum / static_cast<double>(field.score.size());
}

struct RunManifest {
  std::string version = kVersion;
  std::uint64_t config_hash = 0;
  std::uint64_t lr_checksum = 0;
  std::uint64_t ref_checksum = 0;
  std::uint64_t sr_checksum = 0;
  std::uint64_t correspondence_checksum = 0;
  double encode_ms = 0.0;
  double match_ms = 0.0;
  double adapt_ms = 0.0;
  double fuse_ms = 0.0;
  double total_ms = 0.0;
  ComplexityReport complexity;
  double mean_similarity = 0.0;
  MetricReport vs_bicubic;  // SR output compared with plain bicubic x4

  nlohmann::json to_json() const {
    auto hex = [](std::uint64_t v) {
      char buf[20];
      std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
      return std::string(buf);
    };
    nlohmann::json j;
    j["version"] = version;
    j["config_hash"] = hex(config_hash);
    j["inputs"] = {{"lr_checksum", hex(lr_checksum)}, {"ref_checksum", hex(ref_checksum)}};
    j["outputs"] = {{"sr_checksum", hex(sr_checksum)},
                    {"correspondence_checksum", hex(correspondence_checksum)}};
    j["timings_ms"] = {{"encode", encode_ms},
                       {"match", match_ms},
                       {"adapt", adapt_ms},
                       {"fuse", fuse_ms},
                       {"total", total_ms}};
    j["complexity"] = {{"lr_blocks", complexity.lr_blocks},
                       {"lr_patches", complexity.lr_patches},
                       {"ref_patches", complexity.ref_patches},
                       {"ref_block_patches", complexity.ref_block_patches},
                       {"dilation_count", complexity.dilation_count},
                       {"counted_coarse", complexity.counted_coarse},
                       {"counted_fine", complexity.counted_fine},
                       {"counted_total", complexity.counted_total()},
                       {"predicted_total", complexity.predicted_total()},
                       {"dense_baseline", complexity.dense_baseline},
                       {"reduction", complexity.reduction()}};
    j["mean_similarity"] = mean_similarity;
    j["metrics_vs_bicubic"] = {
        {"l1", vs_bicubic.l1},
        {"psnr_y", std::isinf(vs_bicubic.psnr_y) ? nlohmann::json("inf")
                                                 : nlohmann::json(vs_bicubic.psnr_y)},
        {"ssim_y", vs_bicubic.ssim_y}};
    return j;
  }
};

struct TransferResult {
  Image sr;
  CorrespondenceField field;
  RunManifest manifest;
};

namespace detail {

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double take() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Full texture-transfer pass: encode, match reference patches, remap their
/// statistics toward the LR input, fuse up to 4x, decode to an image.
inline TransferResult run_transfer(const Image& lr, const Image& ref,
                                   const PipelineConfig& cfg) {
  cfg.validate();
  require_config(ref.height % 4 == 0 && ref.width % 4 == 0,
                 "reference image dimensions must be divisible by 4");
  require_config(cfg.match.scales == std::vector<int>({1, 2, 4}),
                 "the transfer pipeline needs extraction scales {1, 2, 4}");

  TransferResult out;
  detail::StageTimer total_timer;
  detail::StageTimer timer;

  const Image ref_down = bicubic_resize(ref, Fraction{1, 4});
  const EncoderSpec enc = cfg.make_encoder_spec();
  const FeatureMap f_lr = encode(lr, enc, 1);
  const FeatureMap f_rd = encode(ref_down, enc, 1);
  std::vector<FeatureMap> f_ref_scales;
  for (int s : cfg.match.scales) f_ref_scales.push_back(encode(ref, enc, 4 / s));
  out.manifest.encode_ms = timer.take();

  MemResult mem = mem_forward(f_lr, f_rd, f_ref_scales, cfg.match, cfg.workers);
  out.field = std::move(mem.field);
  out.manifest.match_ms = timer.take();

  const ParamPredictor predictor = cfg.make_predictor();
  const FeatureMap& e1 = mem.extracted[0];
  const FeatureMap& e2 = mem.extracted[1];
  const FeatureMap& e4 = mem.extracted[2];
  const FeatureMap a1 = apply_sam(f_lr, e1, predictor);
  FeatureMap h1(f_lr.channels, f_lr.height, f_lr.width);
  for (std::size_t i = 0; i < h1.values.size(); ++i)
    h1.values[i] = 0.5f * (f_lr.values[i] + a1.values[i]);
  const FeatureMap a2 =
      apply_sam(bilinear_resize(h1, 2 * h1.height, 2 * h1.width), e2, predictor);
  out.manifest.adapt_ms = timer.take();

  const DramWeights dram = cfg.make_dram(f_lr.channels);
  const FeatureMap h2 = dram_forward(h1, a2, dram);
  out.manifest.fuse_ms = timer.take();
  const FeatureMap a4 =
      apply_sam(bilinear_resize(h2, 2 * h2.height, 2 * h2.width), e4, predictor);
  out.manifest.adapt_ms += timer.take();
  const FeatureMap h4 = dram_forward(h2, a4, dram);
  out.sr = decode_rgb(h4);
  out.manifest.fuse_ms += timer.take();

  out.manifest.total_ms = total_timer.take();
  out.manifest.config_hash = fnv1a(pipeline_config_to_json(cfg).dump());
  out.manifest.lr_checksum = image_checksum(lr);
  out.manifest.ref_checksum = image_checksum(ref);
  out.manifest.sr_checksum = image_checksum(out.sr);
  out.manifest.correspondence_checksum = field_checksum(out.field);
  out.manifest.complexity = mem.complexity;
  out.manifest.mean_similarity = mean_similarity(out.field);
  const Image bicubic_baseline = bicubic_resize_to(lr, 4 * lr.height, 4 * lr.width);
  out.manifest.vs_bicubic = compute_metrics(out.sr, bicubic_baseline);
  return out;
}

/// Agreement between the block-restricted matcher and the exhaustive
/// baseline on one feature pair.
struct OracleComparison {
  double agreement = 0.0;    // fraction of patches with identical best index
  double mean_r_fast = 0.0;  // coarse-to-fine mean similarity
  double mean_r_oracle = 0.0;
  double ratio = 0.0;  // mean_r_fast / mean_r_oracle
  std::uint64_t fast_ops = 0;
  std::uint64_t oracle_ops = 0;
};

inline OracleComparison oracle_compare_features(const FeatureMap& f_lr,
                                                const FeatureMap& f_ref_down,
                                                const MatchConfig& cfg, int workers = 1) {
  const CoarseResult coarse = coarse_match(f_lr, f_ref_down, cfg, workers);
  std::uint64_t fine_ops = 0;
  const CorrespondenceField field = fine_match(f_lr, f_ref_down, coarse, cfg, workers, &fine_ops);
  const DenseMatchResult oracle = dense_match_oracle(f_lr, f_ref_down, cfg, workers);

  OracleComparison out;
  out.fast_ops = coarse.ops + fine_ops;
  out.oracle_ops = oracle.ops;
  const std::size_t per = field.per_block();
  require(per == oracle.per_block() && field.index.size() == oracle.index.size(),
          "oracle_compare: mismatched patch enumerations");
  std::size_t hits = 0;
  double sum_fast = 0.0, sum_oracle = 0.0;
  for (int k = 0; k < field.partition.block_count(); ++k) {
    const BlockMatch& m = field.blocks[k];
    const int local_cols = m.side_x - field.patch + 1;
    for (std::size_t i = 0; i < per; ++i) {
      const std::uint32_t local = field.index[k * per + i];
      const int gy = m.anchor_y + static_cast<int>(local) / local_cols;
      const int gx = m.anchor_x + static_cast<int>(local) % local_cols;
      const std::uint32_t global =
          static_cast<std::uint32_t>(gy) * oracle.grid_cols + static_cast<std::uint32_t>(gx);
      if (global == oracle.index[k * per + i]) ++hits;
      sum_fast += field.score[k * per + i];
      sum_oracle += oracle.score[k * per + i];
    }
  }
  const double count = static_cast<double>(field.index.size());
  out.agreement = hits / count;
  out.mean_r_fast = sum_fast / count;
  out.mean_r_oracle = sum_oracle / count;
  out.ratio = out.mean_r_oracle != 0.0 ? out.mean_r_fast / out.mean_r_oracle : 0.0;
  return out;
}

/// One measured point of a parameter sweep.
struct SweepPoint {
  std::string label;
  std::uint64_t ops = 0;
  double wall_ms = 0.0;
  double mean_r = 0.0;
};

namespace detail {

inline SweepPoint measure_point(const std::string& label, const FeatureMap& f_lr,
                                const FeatureMap& f_rd, const MatchConfig& cfg, int workers) {
  SweepPoint pt;
  pt.label = label;
  StageTimer timer;
  const CoarseResult coarse = coarse_match(f_lr, f_rd, cfg, workers);
  std::uint64_t fine_ops = 0;
  const CorrespondenceField field = fine_match(f_lr, f_rd, coarse, cfg, workers, &fine_ops);
  pt.wall_ms = timer.take();
  pt.ops = coarse.ops + fine_ops;
  pt.mean_r = mean_similarity(field);
  return pt;
}

}  // namespace detail

struct AblationReport {
  std::vector<SweepPoint> lr_block;         // block side varies, pinned ref block
  std::vector<SweepPoint> ref_block_scale;  // reference block scale varies
  std::vector<SweepPoint> dilations;        // dilation set grows
};

/// Parameter sweeps along the three matcher axes. Points are averaged over
/// the given feature pairs; ops sum across pairs. The LR-block sweep pins
/// the reference block extent at the base config's derived value so the
/// sweep isolates block-count effects.
inline AblationReport ablate(const std::vector<std::pair<FeatureMap, FeatureMap>>& pairs,
                             const MatchConfig& base, int workers = 1) {
  require_config(!pairs.empty(), "ablation needs at least one feature pair");
  AblationReport report;

  auto sweep = [&](const MatchConfig& cfg, const std::string& label) {
    SweepPoint sum;
    sum.label = label;
    for (const auto& [f_lr, f_rd] : pairs) {
      const SweepPoint pt = detail::measure_point(label, f_lr, f_rd, cfg, workers);
      sum.ops += pt.ops;
      sum.wall_ms += pt.wall_ms;
      sum.mean_r += pt.mean_r;
    }
    sum.mean_r /= static_cast<double>(pairs.size());
    return sum;
  };

  {
    const auto& [f_lr0, f_rd0] = pairs.front();
    const auto [pin_h, pin_w] =
        ref_block_sides(base, f_lr0.height, f_lr0.width, f_rd0.height, f_rd0.width);
    for (int b : {4, 8, 16, 32}) {
      MatchConfig cfg = base;
      cfg.lr_block = b;
      cfg.dilations = {1};
      cfg.ref_block_override_h = pin_h;
      cfg.ref_block_override_w = pin_w;
      report.lr_block.push_back(sweep(cfg, "lr_block=" + std::to_string(b)));
    }
  }
  for (double s : {1.0, 1.5, 2.0, 3.0}) {
    MatchConfig cfg = base;
    cfg.ref_block_scale = s;
    cfg.ref_block_override_h = cfg.ref_block_override_w = 0;
    cfg.dilations = {1};
    char label[32];
    std::snprintf(label, sizeof(label), "ref_block_scale=%.1f", s);
    report.ref_block_scale.push_back(sweep(cfg, label));
  }
  for (int count : {1, 2, 3}) {
    MatchConfig cfg = base;
    cfg.dilations.clear();
    for (int d = 1; d <= count; ++d) cfg.dilations.push_back(d);
    report.dilations.push_back(sweep(cfg, "dilations=" + std::to_string(count)));
  }
  return report;
}

/// Joins references of equal height side by side into one image.
inline Image stitch_references(const std::vector<Image>& refs) {
  require_config(!refs.empty(), "need at least one reference image");
  if (refs.size() == 1) return refs.front();
  const int h = refs.front().height;
  int w = 0;
  for (const Image& r : refs) {
    require_config(r.height == h, "stitched references must share their height");
    w += r.width;
  }
  Image out(h, w);
  int x0 = 0;
  for (const Image& r : refs) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < r.width; ++x)
        for (int c = 0; c < 3; ++c) out.at(y, x0 + x, c) = r.at(y, x, c);
    x0 += r.width;
  }
  return out;
}

}  // namespace masa
