// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "masa/masa.hpp"

namespace {

struct CommonOpts {
  std::vector<std::string> lr_paths;
  std::vector<std::string> ref_paths;
  std::string config_path;
  int lr_block = 0;
  double ref_block_scale = 0.0;
  std::vector<int> dilations;
  int patch = 0;
  int workers = 0;
  std::uint32_t seed = 0;
  bool seed_set = false;
  std::string out;
};

void add_common(CLI::App* sub, CommonOpts& o, bool multi_ref) {
  sub->add_option("--lr", o.lr_paths, "low-resolution input image (png or ppm)")->required();
  auto* ref = sub->add_option("--ref", o.ref_paths, "reference image, dims divisible by 4")
                  ->required();
  if (multi_ref) ref->description("reference images; several stitch side by side");
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--lr-block", o.lr_block, "LR block side");
  sub->add_option("--ref-block-scale", o.ref_block_scale, "reference block scale");
  sub->add_option("--dilations", o.dilations, "dilation rates, e.g. --dilations 1 2")
      ->delimiter(',');
  sub->add_option("--patch", o.patch, "patch side (odd)");
  sub->add_option("--workers", o.workers, "worker thread count");
  sub->add_option("--seed", o.seed, "seed for seeded predictor/fusion weights")
      ->each([&](const std::string&) { o.seed_set = true; });
  sub->add_option("--out", o.out, "output path");
}

masa::PipelineConfig make_config(const CommonOpts& o) {
  masa::PipelineConfig cfg;
  if (!o.config_path.empty()) cfg = masa::load_pipeline_config(o.config_path);
  if (o.lr_block > 0) cfg.match.lr_block = o.lr_block;
  if (o.ref_block_scale > 0.0) cfg.match.ref_block_scale = o.ref_block_scale;
  if (!o.dilations.empty()) cfg.match.dilations = o.dilations;
  if (o.patch > 0) cfg.match.patch = o.patch;
  if (o.workers > 0) cfg.workers = o.workers;
  if (o.seed_set) {
    cfg.predictor_seed = o.seed;
    cfg.dram_seed = o.seed;
  }
  cfg.validate();
  return cfg;
}

masa::Image load_stitched_ref(const std::vector<std::string>& paths) {
  std::vector<masa::Image> refs;
  refs.reserve(paths.size());
  for (const auto& p : paths) refs.push_back(masa::read_image(p));
  masa::Image ref = masa::stitch_references(refs);
  masa::require_config(ref.height % 4 == 0 && ref.width % 4 == 0,
                       "stitched reference dimensions must be divisible by 4");
  return ref;
}

struct FeaturePair {
  masa::FeatureMap f_lr;
  masa::FeatureMap f_rd;
};

FeaturePair encode_pair(const masa::Image& lr, const masa::Image& ref,
                        const masa::PipelineConfig& cfg) {
  const masa::EncoderSpec enc = cfg.make_encoder_spec();
  const masa::Image ref_down = masa::bicubic_resize(ref, masa::Fraction{1, 4});
  return {masa::encode(lr, enc, 1), masa::encode(ref_down, enc, 1)};
}

std::vector<std::pair<std::string, std::string>> paired_paths(const CommonOpts& o) {
  masa::require_config(o.lr_paths.size() == o.ref_paths.size(),
                       "need as many --ref images as --lr images");
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < o.lr_paths.size(); ++i)
    pairs.emplace_back(o.lr_paths[i], o.ref_paths[i]);
  return pairs;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw masa::IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw masa::IoError("failed writing '" + path + "'");
}

int cmd_match(const CommonOpts& o, const std::string& viz_path) {
  masa::require_config(o.lr_paths.size() == 1, "match takes exactly one --lr image");
  const masa::PipelineConfig cfg = make_config(o);
  const masa::Image lr = masa::read_image(o.lr_paths[0]);
  const masa::Image ref = load_stitched_ref(o.ref_paths);
  const FeaturePair f = encode_pair(lr, ref, cfg);

  const masa::CoarseResult coarse =
      masa::coarse_match(f.f_lr, f.f_rd, cfg.match, cfg.workers);
  std::uint64_t fine_ops = 0;
  const masa::CorrespondenceField field =
      masa::fine_match(f.f_lr, f.f_rd, coarse, cfg.match, cfg.workers, &fine_ops);

  masa::ComplexityReport report = masa::predicted_ops(cfg.match, f.f_lr.height, f.f_lr.width,
                                                      f.f_rd.height, f.f_rd.width);
  report.counted_coarse = coarse.ops;
  report.counted_fine = fine_ops;

  const std::string out = o.out.empty() ? "correspondence.masa" : o.out;
  masa::write_correspondence(field, out);
  std::printf("wrote %s (%d blocks, mean similarity %.6f)\n", out.c_str(),
              field.partition.block_count(), masa::mean_similarity(field));
  if (!viz_path.empty()) {
    masa::write_image(masa::visualize_correspondence(field, f.f_rd.height, f.f_rd.width),
                      viz_path);
    std::printf("wrote %s\n", viz_path.c_str());
  }
  std::fputs(masa::flops_table(report, cfg.match.patch, f.f_lr.channels).c_str(), stdout);
  return 0;
}

int cmd_transfer(const CommonOpts& o, const std::string& manifest_path,
                 const std::string& corr_path) {
  masa::require_config(o.lr_paths.size() == 1, "transfer takes exactly one --lr image");
  const masa::PipelineConfig cfg = make_config(o);
  const masa::Image lr = masa::read_image(o.lr_paths[0]);
  const masa::Image ref = load_stitched_ref(o.ref_paths);

  const masa::TransferResult result = masa::run_transfer(lr, ref, cfg);
  const std::string out = o.out.empty() ? "sr.png" : o.out;
  masa::write_image(result.sr, out);
  if (!corr_path.empty()) masa::write_correspondence(result.field, corr_path);
  const std::string manifest = manifest_path.empty() ? out + ".manifest.json" : manifest_path;
  write_json(result.manifest.to_json(), manifest);
  std::printf("wrote %s (%dx%d) and %s\n", out.c_str(), result.sr.width, result.sr.height,
              manifest.c_str());
  std::printf("mean similarity %.6f, %.2fx fewer similarity ops than dense\n",
              result.manifest.mean_similarity, result.manifest.complexity.reduction());
  return 0;
}

int cmd_oracle_compare(const CommonOpts& o) {
  const masa::PipelineConfig cfg = make_config(o);
  nlohmann::json per_pair = nlohmann::json::array();
  double sum_agree = 0.0, sum_ratio = 0.0;
  for (const auto& [lr_path, ref_path] : paired_paths(o)) {
    const masa::Image lr = masa::read_image(lr_path);
    const masa::Image ref = masa::read_image(ref_path);
    const FeaturePair f = encode_pair(lr, ref, cfg);
    const masa::OracleComparison cmp =
        masa::oracle_compare_features(f.f_lr, f.f_rd, cfg.match, cfg.workers);
    std::printf("%s vs %s: agreement %.4f, mean R %.6f / %.6f, ratio %.4f\n", lr_path.c_str(),
                ref_path.c_str(), cmp.agreement, cmp.mean_r_fast, cmp.mean_r_oracle, cmp.ratio);
    per_pair.push_back({{"lr", lr_path},
                        {"ref", ref_path},
                        {"agreement", cmp.agreement},
                        {"mean_r_fast", cmp.mean_r_fast},
                        {"mean_r_oracle", cmp.mean_r_oracle},
                        {"ratio", cmp.ratio}});
    sum_agree += cmp.agreement;
    sum_ratio += cmp.ratio;
  }
  const double n = static_cast<double>(per_pair.size());
  std::printf("corpus means: agreement %.4f, ratio %.4f\n", sum_agree / n, sum_ratio / n);
  if (!o.out.empty())
    write_json({{"pairs", per_pair},
                {"mean_agreement", sum_agree / n},
                {"mean_ratio", sum_ratio / n}},
               o.out);
  return 0;
}

int cmd_bench(const CommonOpts& o) {
  const masa::PipelineConfig cfg = make_config(o);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [lr_path, ref_path] : paired_paths(o)) {
    const masa::Image lr = masa::read_image(lr_path);
    const masa::Image ref = masa::read_image(ref_path);
    const FeaturePair f = encode_pair(lr, ref, cfg);

    masa::detail::StageTimer timer;
    const masa::CoarseResult coarse =
        masa::coarse_match(f.f_lr, f.f_rd, cfg.match, cfg.workers);
    std::uint64_t fine_ops = 0;
    const masa::CorrespondenceField field =
        masa::fine_match(f.f_lr, f.f_rd, coarse, cfg.match, cfg.workers, &fine_ops);
    const double fast_ms = timer.take();
    const masa::DenseMatchResult oracle =
        masa::dense_match_oracle(f.f_lr, f.f_rd, cfg.match, cfg.workers);
    const double dense_ms = timer.take();

    double mean_r_oracle = 0.0;
    for (float s : oracle.score) mean_r_oracle += s;
    mean_r_oracle /= static_cast<double>(oracle.score.size());

    std::printf("%s vs %s: fast %.1f ms (%llu ops), dense %.1f ms (%llu ops), speedup %.2fx\n",
                lr_path.c_str(), ref_path.c_str(), fast_ms,
                static_cast<unsigned long long>(coarse.ops + fine_ops), dense_ms,
                static_cast<unsigned long long>(oracle.ops),
                fast_ms > 0.0 ? dense_ms / fast_ms : 0.0);
    rows.push_back({{"lr", lr_path},
                    {"ref", ref_path},
                    {"fast_ms", fast_ms},
                    {"dense_ms", dense_ms},
                    {"fast_ops", coarse.ops + fine_ops},
                    {"dense_ops", oracle.ops},
                    {"mean_r_fast", masa::mean_similarity(field)},
                    {"mean_r_oracle", mean_r_oracle}});
  }
  if (!o.out.empty()) write_json({{"pairs", rows}}, o.out);
  return 0;
}

int cmd_ablate(const CommonOpts& o) {
  const masa::PipelineConfig cfg = make_config(o);
  std::vector<std::pair<masa::FeatureMap, masa::FeatureMap>> features;
  for (const auto& [lr_path, ref_path] : paired_paths(o)) {
    const masa::Image lr = masa::read_image(lr_path);
    const masa::Image ref = masa::read_image(ref_path);
    FeaturePair f = encode_pair(lr, ref, cfg);
    features.emplace_back(std::move(f.f_lr), std::move(f.f_rd));
  }
  const masa::AblationReport report = masa::ablate(features, cfg.match, cfg.workers);
  nlohmann::json j;
  auto print_sweep = [&](const char* name, const std::vector<masa::SweepPoint>& points) {
    std::printf("%s sweep:\n", name);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : points) {
      std::printf("  %-22s %14llu ops  %9.1f ms  mean R %.6f\n", p.label.c_str(),
                  static_cast<unsigned long long>(p.ops), p.wall_ms, p.mean_r);
      rows.push_back(
          {{"label", p.label}, {"ops", p.ops}, {"wall_ms", p.wall_ms}, {"mean_r", p.mean_r}});
    }
    j[name] = rows;
  };
  print_sweep("lr_block", report.lr_block);
  print_sweep("ref_block_scale", report.ref_block_scale);
  print_sweep("dilations", report.dilations);
  if (!o.out.empty()) write_json(j, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coarse-to-fine reference patch matching and texture transfer"};
  app.require_subcommand(1);

  CommonOpts match_opts, transfer_opts, oracle_opts, bench_opts, ablate_opts;
  std::string viz_path, manifest_path, corr_path;

  CLI::App* match = app.add_subcommand("match", "emit a correspondence file and visualization");
  add_common(match, match_opts, true);
  match->add_option("--viz", viz_path, "visualization image path");

  CLI::App* transfer = app.add_subcommand("transfer", "run the full texture-transfer pipeline");
  add_common(transfer, transfer_opts, true);
  transfer->add_option("--manifest", manifest_path, "manifest JSON path");
  transfer->add_option("--correspondence", corr_path, "also write the correspondence file");

  CLI::App* oracle = app.add_subcommand("oracle-compare",
                                        "compare the matcher against the exhaustive baseline");
  add_common(oracle, oracle_opts, false);

  CLI::App* bench = app.add_subcommand("bench", "time the matcher against the dense baseline");
  add_common(bench, bench_opts, false);

  CLI::App* ablate = app.add_subcommand("ablate", "sweep block size, block scale and dilations");
  add_common(ablate, ablate_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (match->parsed()) return cmd_match(match_opts, viz_path);
    if (transfer->parsed()) return cmd_transfer(transfer_opts, manifest_path, corr_path);
    if (oracle->parsed()) return cmd_oracle_compare(oracle_opts);
    if (bench->parsed()) return cmd_bench(bench_opts);
    if (ablate->parsed()) return cmd_ablate(ablate_opts);
  } catch (const masa::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const masa::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const masa::InvariantError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
