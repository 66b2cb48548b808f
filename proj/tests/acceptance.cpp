// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

// Release gate. Runs every gate criterion, prints one PASS/FAIL line each,
// and exits nonzero on any failure.
//
//   masa_acceptance <cli-path> [data-dir] [--freeze]
//
// --freeze re-measures the corpus and records the results (plus a few
// end-to-end checksums) into <data-dir>/goldens.json for later regression.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "masa/masa.hpp"
#include "support/goldens.hpp"
#include "support/scenarios.hpp"
#include "support/synthetic.hpp"

using namespace masa;

namespace {

int pick_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return std::max(1, std::min(8, static_cast<int>(hc == 0 ? 4 : hc)));
}

struct Gate {
  bool all_ok = true;
  void line(int num, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d, %s: %s\n", ok ? "PASS" : "FAIL", num, name, detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- criterion 1: degenerate configuration equals the dense oracle --------

void criterion_full_extent(Gate& gate, int workers) {
  std::mt19937 gen(1);
  auto dim = [&](int lo, int hi) { return lo + static_cast<int>(gen() % (hi - lo + 1)); };

  int trials = 0;
  std::size_t patches = 0;
  bool ok = true;
  std::string why;
  for (int t = 0; t < 20 && ok; ++t) {
    const int c = (t % 3 == 2) ? 12 : 3;
    const int lr_h = t == 0 ? 128 : dim(32, 64);
    const int lr_w = t == 0 ? 96 : dim(32, 64);
    const int rd_h = c == 12 ? dim(32, 64) : dim(32, 128);
    const int rd_w = c == 12 ? dim(32, 64) : (t == 0 ? 64 : dim(32, 128));
    const FeatureMap f_lr = synth::random_feature(c, lr_h, lr_w, gen);
    const FeatureMap f_rd = synth::random_feature(c, rd_h, rd_w, gen);

    MatchConfig cfg;
    cfg.ref_block_override_h = rd_h;
    cfg.ref_block_override_w = rd_w;

    const CoarseResult coarse = coarse_match(f_lr, f_rd, cfg, workers);
    std::uint64_t fine_ops = 0;
    const CorrespondenceField field = fine_match(f_lr, f_rd, coarse, cfg, workers, &fine_ops);
    const DenseMatchResult dense = dense_match_oracle(f_lr, f_rd, cfg, workers);

    if (fine_ops != dense.ops) {
      ok = false;
      why = fmt("trial %d: fine ops %llu != dense ops %llu", t,
                static_cast<unsigned long long>(fine_ops),
                static_cast<unsigned long long>(dense.ops));
      break;
    }
    const std::size_t per = field.per_block();
    for (int k = 0; k < field.partition.block_count() && ok; ++k) {
      const BlockMatch& m = field.blocks[k];
      if (m.anchor_y != 0 || m.anchor_x != 0 || m.side_y != rd_h || m.side_x != rd_w) {
        ok = false;
        why = fmt("trial %d: block %d did not span the full reference extent", t, k);
        break;
      }
      const int local_cols = m.side_x - field.patch + 1;
      for (std::size_t i = 0; i < per; ++i) {
        const std::size_t at = k * per + i;
        const std::uint32_t local = field.index[at];
        const std::uint32_t global =
            (local / local_cols) * static_cast<std::uint32_t>(dense.grid_cols) +
            (local % local_cols);
        if (global != dense.index[at] || field.score[at] != dense.score[at]) {
          ok = false;
          why = fmt("trial %d block %d patch %zu: (%u, %.9g) vs oracle (%u, %.9g)", t, k, i,
                    global, field.score[at], dense.index[at], dense.score[at]);
          break;
        }
      }
    }
    patches += field.index.size();
    ++trials;
  }
  gate.line(1, "full-extent blocks reproduce the dense oracle exactly", ok && trials == 20,
            ok ? fmt("%d random maps, %zu patches, C in {3,12}, indexes and scores identical",
                     trials, patches)
               : why);
}

// ---- criterion 2: corpus quality vs oracle --------------------------------

struct CorpusMeasurement {
  std::vector<std::string> labels;
  std::vector<OracleComparison> pairs;
  double mean_agreement = 0.0;
  double mean_ratio = 0.0;
  double wall_s = 0.0;
};

CorpusMeasurement measure_corpus(const std::vector<std::pair<FeatureMap, FeatureMap>>& features,
                                 const std::vector<std::string>& labels, int workers) {
  CorpusMeasurement m;
  m.labels = labels;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [f_lr, f_rd] : features) {
    m.pairs.push_back(oracle_compare_features(f_lr, f_rd, MatchConfig{}, workers));
    m.mean_agreement += m.pairs.back().agreement;
    m.mean_ratio += m.pairs.back().ratio;
  }
  m.mean_agreement /= static_cast<double>(m.pairs.size());
  m.mean_ratio /= static_cast<double>(m.pairs.size());
  m.wall_s = seconds_since(t0);
  return m;
}

void criterion_corpus(Gate& gate, const CorpusMeasurement& m, bool freeze) {
  bool ok = m.mean_ratio >= 0.95 && m.mean_agreement >= 0.60 && m.wall_s < 300.0;
  std::string detail = fmt("mean ratio %.4f (>= 0.95), mean agreement %.4f (>= 0.60), "
                           "%zu pairs in %.1f s",
                           m.mean_ratio, m.mean_agreement, m.pairs.size(), m.wall_s);
  if (!freeze) {
    try {
      const nlohmann::json g = golden::load();
      const auto& rows = g.at("corpus");
      bool match = rows.size() == m.pairs.size();
      for (std::size_t i = 0; match && i < m.pairs.size(); ++i) {
        match = rows[i].at("label") == m.labels[i] &&
                std::abs(rows[i].at("agreement").get<double>() - m.pairs[i].agreement) < 1e-9 &&
                std::abs(rows[i].at("ratio").get<double>() - m.pairs[i].ratio) < 1e-9;
      }
      ok = ok && match;
      detail += match ? ", goldens match" : ", MEASUREMENTS DRIFTED FROM GOLDENS";
    } catch (const IoError& e) {
      ok = false;
      detail += fmt(", goldens missing (%s)", e.what());
    }
  } else {
    detail += ", frozen as goldens";
  }
  gate.line(2, "default-config corpus quality vs oracle", ok, detail);
}

// ---- criterion 3: complexity accounting and speedup ------------------------

void criterion_complexity(Gate& gate, const std::vector<std::pair<FeatureMap, FeatureMap>>& features,
                          int workers) {
  const FeatureMap& f_lr = features.front().first;
  const FeatureMap& f_rd = features.front().second;

  std::vector<MatchConfig> configs(6);
  configs[1].dilations = {1};
  configs[2].dilations = {1, 2, 3};
  configs[3].lr_block = 4;
  configs[3].dilations = {1};
  configs[4].lr_block = 16;
  configs[4].ref_block_scale = 2.0;
  configs[5].ref_block_override_h = 40;
  configs[5].ref_block_override_w = 11;

  bool counts_ok = true;
  std::string why;
  for (std::size_t i = 0; i < configs.size() && counts_ok; ++i) {
    const MatchConfig& cfg = configs[i];
    const CoarseResult coarse = coarse_match(f_lr, f_rd, cfg, workers);
    std::uint64_t fine_ops = 0;
    fine_match(f_lr, f_rd, coarse, cfg, workers, &fine_ops);
    const ComplexityReport pred = predicted_ops(cfg, f_lr.height, f_lr.width, f_rd.height,
                                                f_rd.width);
    if (coarse.ops != pred.predicted_coarse || fine_ops != pred.predicted_fine) {
      counts_ok = false;
      why = fmt("config %zu: counted %llu+%llu vs predicted %llu+%llu", i,
                static_cast<unsigned long long>(coarse.ops),
                static_cast<unsigned long long>(fine_ops),
                static_cast<unsigned long long>(pred.predicted_coarse),
                static_cast<unsigned long long>(pred.predicted_fine));
    }
  }

  const ComplexityReport base = predicted_ops(MatchConfig{}, 128, 128, 128, 128);
  const double reduction =
      static_cast<double>(base.dense_baseline) / static_cast<double>(base.predicted_total());

  double fast_ms = 1e30;
  for (int rep = 0; rep < 3; ++rep) {
    detail::StageTimer timer;
    const CoarseResult coarse = coarse_match(f_lr, f_rd, MatchConfig{}, workers);
    fine_match(f_lr, f_rd, coarse, MatchConfig{}, workers);
    fast_ms = std::min(fast_ms, timer.take());
  }
  detail::StageTimer timer;
  dense_match_oracle(f_lr, f_rd, MatchConfig{}, workers);
  const double dense_ms = timer.take();
  const double speedup = fast_ms > 0.0 ? dense_ms / fast_ms : 0.0;

  const bool ok = counts_ok && reduction >= 15.0 && speedup >= 5.0;
  gate.line(3, "instrumented cost matches the closed form and beats dense", ok,
            counts_ok ? fmt("counted == predicted on 6 configs; 128/512 ops %llu vs dense %llu "
                            "(%.1fx, >= 15), wall %.0f ms vs %.0f ms (%.1fx, >= 5)",
                            static_cast<unsigned long long>(base.predicted_total()),
                            static_cast<unsigned long long>(base.dense_baseline), reduction,
                            fast_ms, dense_ms, speedup)
                      : why);
}

// ---- criterion 4: ablation orderings ---------------------------------------

void criterion_ablation(Gate& gate, const std::vector<std::pair<FeatureMap, FeatureMap>>& features,
                        int workers) {
  const AblationReport rep = ablate(features, MatchConfig{}, workers);
  bool ok = rep.lr_block.size() == 4 && rep.ref_block_scale.size() == 4 && rep.dilations.size() == 3;
  std::string why;

  for (std::size_t i = 1; ok && i < rep.lr_block.size(); ++i)
    if (rep.lr_block[i].ops >= rep.lr_block[i - 1].ops) {
      ok = false;
      why = fmt("ops did not strictly decrease at %s", rep.lr_block[i].label.c_str());
    }
  for (std::size_t i = 1; ok && i < rep.ref_block_scale.size(); ++i) {
    if (rep.ref_block_scale[i].ops < rep.ref_block_scale[i - 1].ops ||
        rep.ref_block_scale[i].mean_r < rep.ref_block_scale[i - 1].mean_r) {
      ok = false;
      why = fmt("ops or mean R decreased at %s", rep.ref_block_scale[i].label.c_str());
    }
  }
  for (std::size_t i = 1; ok && i < rep.dilations.size(); ++i) {
    if (rep.dilations[i].ops < rep.dilations[i - 1].ops ||
        rep.dilations[i].mean_r < rep.dilations[i - 1].mean_r) {
      ok = false;
      why = fmt("ops or mean R decreased at %s (mean R %.6f -> %.6f)",
                rep.dilations[i].label.c_str(), rep.dilations[i - 1].mean_r,
                rep.dilations[i].mean_r);
    }
  }
  gate.line(4, "sweeps order cost and quality as expected", ok,
            ok ? fmt("lr_block ops strictly fall; scale mean R %.4f -> %.4f and dilation "
                     "mean R %.4f -> %.4f never fall",
                     rep.ref_block_scale.front().mean_r, rep.ref_block_scale.back().mean_r,
                     rep.dilations.front().mean_r, rep.dilations.back().mean_r)
               : why);
}

// ---- criterion 5: adaptation preserves LR statistics ------------------------

void criterion_adaptation(Gate& gate) {
  std::mt19937 gen(5);
  const ParamPredictor zero = ParamPredictor::zero();
  double worst_stat = 0.0, worst_shift = 0.0;
  int shifted = 0;
  bool ok = true;
  for (int t = 0; t < 100 && ok; ++t) {
    const int h = 12 + static_cast<int>(gen() % 21);
    const int w = 12 + static_cast<int>(gen() % 21);
    const FeatureMap f_lr = synth::random_feature(3, h, w, gen);
    FeatureMap f_ref = synth::random_feature(3, h, w, gen);

    FeatureMap out = apply_sam(f_lr, f_ref, zero);
    if (t % 3 == 0) {
      FeatureMap lifted = f_ref;
      for (auto& v : lifted.values) v += 0.35f;
      const FeatureMap out_lifted = apply_sam(f_lr, lifted, zero);
      for (std::size_t i = 0; i < out.values.size(); ++i)
        worst_shift = std::max(worst_shift,
                               static_cast<double>(std::abs(out_lifted.values[i] - out.values[i])));
      out = out_lifted;
      ++shifted;
    }
    const ChannelStats want = channel_stats(f_lr);
    const ChannelStats got = channel_stats(out);
    for (int c = 0; c < 3; ++c) {
      worst_stat = std::max({worst_stat, std::abs(got.mu[c] - want.mu[c]),
                             std::abs(got.sigma[c] - want.sigma[c])});
    }
    ok = worst_stat <= 1e-4 && worst_shift <= 1e-4;
  }
  gate.line(5, "zero-predictor adaptation carries LR statistics", ok,
            fmt("100 pairs (%d with +0.35 reference offset): worst stat error %.2e, "
                "worst shift sensitivity %.2e (both <= 1e-4)",
                shifted, worst_stat, worst_shift));
}

// ---- criterion 6: fusion residual identities --------------------------------

void criterion_fusion(Gate& gate) {
  std::mt19937 gen(6);
  bool cancel_ok = true, fixed_ok = true, linear_ok = true;
  double worst_linear = 0.0;

  for (DramMode mode : {DramMode::kFixedDefault, DramMode::kSeeded}) {
    const DramWeights w = make_dram_weights(mode, 3, 7);
    for (int t = 0; t < 5; ++t) {
      const int h = 6 + static_cast<int>(gen() % 9);
      const int wd = 6 + static_cast<int>(gen() % 9);
      const FeatureMap a_lr = synth::random_feature(3, h, wd, gen);
      const FeatureMap a_ref = synth::random_feature(3, 2 * h, 2 * wd, gen);
      const DramTrace trace = dram_forward_traced(a_lr, a_ref, w);
      for (std::size_t i = 0; i < trace.res_ref.values.size(); ++i)
        cancel_ok = cancel_ok && trace.res_ref.values[i] + trace.res_lr.values[i] == 0.0f;

      const FeatureMap b_lr = synth::random_feature(3, h, wd, gen);
      const FeatureMap b_ref = synth::random_feature(3, 2 * h, 2 * wd, gen);
      FeatureMap sum_lr = a_lr, sum_ref = a_ref;
      for (std::size_t i = 0; i < sum_lr.values.size(); ++i) sum_lr.values[i] += b_lr.values[i];
      for (std::size_t i = 0; i < sum_ref.values.size(); ++i) sum_ref.values[i] += b_ref.values[i];
      const FeatureMap fa = dram_forward(a_lr, a_ref, w);
      const FeatureMap fb = dram_forward(b_lr, b_ref, w);
      const FeatureMap fab = dram_forward(sum_lr, sum_ref, w);
      for (std::size_t i = 0; i < fab.values.size(); ++i)
        worst_linear = std::max(worst_linear, static_cast<double>(std::abs(
                                                  fab.values[i] - fa.values[i] - fb.values[i])));
    }
  }
  linear_ok = worst_linear <= 1e-5;

  const DramWeights defaults = make_dram_weights(DramMode::kFixedDefault, 3);
  const FeatureMap f_ref = synth::random_feature(3, 20, 24, gen);
  const FeatureMap downsampled = conv2d(f_ref, defaults.conv_down);
  const DramTrace fp = dram_forward_traced(downsampled, f_ref, defaults);
  for (float v : fp.res_ref.values) fixed_ok = fixed_ok && v == 0.0f;
  for (float v : fp.res_lr.values) fixed_ok = fixed_ok && v == 0.0f;
  for (std::size_t i = 0; i < f_ref.values.size(); ++i)
    fixed_ok = fixed_ok && fp.ref_refined.values[i] == f_ref.values[i];

  gate.line(6, "dual residual identities hold", cancel_ok && fixed_ok && linear_ok,
            fmt("residuals cancel exactly on 10 traces, downsampled input is a fixed point, "
                "superposition error %.2e (<= 1e-5)",
                worst_linear));
}

// ---- criterion 7: structural round trips ------------------------------------

void criterion_round_trips(Gate& gate) {
  std::mt19937 gen(7);
  bool fold_ok = true;
  for (int t = 0; t < 50 && fold_ok; ++t) {
    const int c = 1 + static_cast<int>(gen() % 4);
    const int h = 5 + static_cast<int>(gen() % 40);
    const int w = 5 + static_cast<int>(gen() % 40);
    const int block = std::min({2 + static_cast<int>(gen() % 7), h, w});
    const FeatureMap f = synth::random_feature(c, h, w, gen);
    const auto [part, blocks] = unfold_blocks(f, block, block);
    const FeatureMap back = fold_blocks(blocks, part);
    fold_ok = back.same_shape(f) && back.values == f.values;
  }

  bool unity_ok = true;
  for (const auto [patch, stride, h, w] : {std::array<int, 4>{3, 1, 10, 8},
                                           std::array<int, 4>{4, 2, 12, 8},
                                           std::array<int, 4>{5, 5, 15, 10}}) {
    std::vector<FeatureMap> patches;
    std::vector<std::pair<int, int>> anchors;
    for (int y = 0; y + patch <= h; y += stride)
      for (int x = 0; x + patch <= w; x += stride) {
        patches.emplace_back(2, patch, patch, 1.0f);
        anchors.emplace_back(y, x);
      }
    const FeatureMap folded = overlap_fold(patches, anchors, 2, h, w);
    for (float v : folded.values) unity_ok = unity_ok && v == 1.0f;
  }

  const FeatureMap f_lr = synth::random_feature(3, 32, 40, gen);
  const FeatureMap f_rd = synth::random_feature(3, 48, 44, gen);
  MatchConfig cfg;
  const CoarseResult coarse = coarse_match(f_lr, f_rd, cfg, 1);
  const CorrespondenceField field = fine_match(f_lr, f_rd, coarse, cfg, 1);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string p1 = (dir / "masa_gate_corr1.masa").string();
  const std::string p2 = (dir / "masa_gate_corr2.masa").string();
  write_correspondence(field, p1);
  const CorrespondenceField loaded = read_correspondence(p1);
  write_correspondence(loaded, p2);
  std::ifstream a(p1, std::ios::binary), b(p2, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  const bool file_ok = !bytes_a.empty() && bytes_a == bytes_b &&
                       loaded.index == field.index && loaded.score == field.score;
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);

  gate.line(7, "fold, overlap and serialization round trips are exact", fold_ok && unity_ok && file_ok,
            fmt("50 fold shapes identical, overlap weights sum to one, %zu-byte correspondence "
                "file round trip byte-exact",
                bytes_a.size()));
}

// ---- criterion 8: CLI determinism across worker counts ----------------------

void criterion_cli_determinism(Gate& gate, const std::string& cli) {
  const auto dir = std::filesystem::temp_directory_path() / "masa_gate_cli";
  std::filesystem::create_directories(dir);
  const Image ref = synth::noise_image(256, 256, 7);
  const Image lr = bicubic_resize(ref, Fraction{1, 4});
  const std::string lr_path = (dir / "lr.png").string();
  const std::string ref_path = (dir / "ref.png").string();
  write_image(lr, lr_path);
  write_image(ref, ref_path);

  auto run = [&](int workers, const char* tag) {
    const std::string sr = (dir / (std::string("sr_") + tag + ".png")).string();
    const std::string corr = (dir / (std::string("corr_") + tag + ".masa")).string();
    const std::string manifest = (dir / (std::string("manifest_") + tag + ".json")).string();
    const std::string cmd = "'" + cli + "' transfer --lr '" + lr_path + "' --ref '" + ref_path +
                            "' --workers " + std::to_string(workers) + " --out '" + sr +
                            "' --correspondence '" + corr + "' --manifest '" + manifest +
                            "' > /dev/null";
    return std::system(cmd.c_str()) == 0 ? std::make_pair(sr, corr) : std::make_pair(std::string(), corr);
  };
  const auto [sr1, corr1] = run(1, "w1");
  const auto [sr8, corr8] = run(8, "w8");

  auto read_all = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  bool ok = !sr1.empty() && !sr8.empty();
  std::size_t sr_bytes = 0;
  if (ok) {
    const std::string a = read_all(sr1), b = read_all(sr8);
    const std::string ca = read_all(corr1), cb = read_all(corr8);
    sr_bytes = a.size();
    ok = !a.empty() && a == b && !ca.empty() && ca == cb;
  }
  gate.line(8, "CLI transfer is byte-identical for 1 and 8 workers", ok,
            ok ? fmt("sr.png (%zu bytes) and correspondence files identical", sr_bytes)
               : "outputs differ or the CLI run failed");
  std::filesystem::remove_all(dir);
}

// ---- golden freezing ---------------------------------------------------------

void freeze_goldens(const CorpusMeasurement& m, int workers) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.pairs.size(); ++i)
    rows.push_back({{"label", m.labels[i]},
                    {"agreement", m.pairs[i].agreement},
                    {"ratio", m.pairs[i].ratio},
                    {"mean_r_fast", m.pairs[i].mean_r_fast},
                    {"mean_r_oracle", m.pairs[i].mean_r_oracle}});

  const scenario::SelfReference self = scenario::self_reference_transfer(workers);
  nlohmann::json g;
  g["corpus"] = rows;
  g["corpus_mean_agreement"] = m.mean_agreement;
  g["corpus_mean_ratio"] = m.mean_ratio;
  g["self_reference_psnr"] = self.psnr_vs_ref;
  g["self_reference_sr"] = golden::to_hex(self.sr_checksum);
  g["viz_checksum"] = golden::to_hex(scenario::corpus_pair0_viz_checksum(workers));
  g["seeded_predictor"] = golden::to_hex(scenario::seeded_predictor_checksum());
  g["seeded_dram"] = golden::to_hex(scenario::seeded_dram_checksum());

  std::filesystem::create_directories(golden::data_dir());
  std::ofstream out(golden::goldens_path());
  out << g.dump(2) << "\n";
  std::printf("froze goldens at %s (self-reference psnr %.3f dB)\n",
              golden::goldens_path().c_str(), self.psnr_vs_ref);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli, data_dir;
  bool freeze = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--freeze")
      freeze = true;
    else if (cli.empty())
      cli = arg;
    else
      data_dir = arg;
  }
  if (cli.empty()) {
    std::fprintf(stderr, "usage: masa_acceptance <cli-path> [data-dir] [--freeze]\n");
    return 2;
  }
  if (!data_dir.empty()) setenv("MASA_TEST_DATA", data_dir.c_str(), 1);

  const int workers = pick_workers();
  std::printf("acceptance gate, %d workers%s\n", workers, freeze ? ", freezing goldens" : "");

  std::vector<std::pair<FeatureMap, FeatureMap>> features;
  std::vector<std::string> labels;
  {
    const EncoderSpec enc = make_encoder("identity-rgb");
    for (const synth::CorpusPair& pair : synth::desk_corpus()) {
      features.emplace_back(encode(pair.lr, enc, 1),
                            encode(bicubic_resize(pair.ref, Fraction{1, 4}), enc, 1));
      labels.push_back(pair.label);
    }
  }

  Gate gate;
  try {
    criterion_full_extent(gate, workers);
    const CorpusMeasurement corpus = measure_corpus(features, labels, workers);
    if (freeze) freeze_goldens(corpus, workers);
    criterion_corpus(gate, corpus, freeze);
    criterion_complexity(gate, features, workers);
    criterion_ablation(gate, features, workers);
    criterion_adaptation(gate);
    criterion_fusion(gate);
    criterion_round_trips(gate);
    criterion_cli_determinism(gate, cli);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 1;
  }

  std::printf("%s\n", gate.all_ok ? "all criteria passed" : "ACCEPTANCE FAILED");
  return gate.all_ok ? 0 : 1;
}
