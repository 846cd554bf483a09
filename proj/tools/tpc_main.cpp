// Copyright 2026 the tpc authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <filesystem>

#include "tpc/codec.hpp"
#include "tpc/errors.hpp"
#include "tpc/image_io.hpp"
#include "tpc/trainer.hpp"
#include "tpc/wavelet.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCorrupt = 3;

struct CommonOptions {
  int threads = 0;  // 0 = all cores
  bool deterministic = false;
  bool show_config = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  cmd->add_flag("--deterministic", opts.deterministic,
                "ordered reductions; bit-identical reruns for a fixed thread count");
}

int require_input(const std::string& path) {
  if (!fs::exists(path)) {
    std::fprintf(stderr, "error: input file not found: %s\n", path.c_str());
    return kExitUsage;
  }
  return kExitOk;
}

// Exit-code policy: validation and usage problems -> 2; corrupted or
// truncated compressed data -> 3 (reading compressed inputs makes IoError a
// corruption signal); verification mismatches -> 1, reported by the command.
template <typename Fn>
int run_guarded(bool reading_compressed, Fn&& fn) {
  try {
    return fn();
  } catch (const tpc::CorruptionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCorrupt;
  } catch (const tpc::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return reading_compressed ? kExitCorrupt : kExitUsage;
  } catch (const tpc::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}

void print_stats(const tpc::CodecStats& stats) {
  std::printf("%-12s %12s %12s %16s\n", "section", "bytes", "symbols", "estimate-bits");
  for (const auto& s : stats.sections)
    std::printf("%-12s %12" PRIu64 " %12" PRIu64 " %16.1f\n", s.name.c_str(), s.bytes,
                s.symbols, s.estimate_bits);
  std::printf("total bytes          %" PRIu64 "\n", stats.total_bytes);
  std::printf("anchors              %" PRIu64 "\n", stats.anchor_count);
  std::printf("bits-per-anchor      %.3f\n", stats.bits_per_anchor);
  std::printf("attr estimate bytes  %.1f\n", stats.attribute_estimate_bits / 8.0);
  std::printf("attr actual bytes    %" PRIu64 "\n", stats.attribute_payload_bytes);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tri-plane context codec for anchor clouds"};
  app.require_subcommand(1);
  app.fallthrough();  // top-level flags remain reachable after the subcommand
  app.set_config("--config", "", "read options from a key=value config file");
  bool show_config = false;
  app.add_flag("--show-config", show_config, "print the effective configuration and exit")
      ->configurable(false);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic correlated cloud")->configurable();
  struct {
    std::string out;
    std::uint64_t seed = 0;
    std::int64_t count = 1000;
    double corr_len = 0.5;
    int k = 4;
  } synth_opt;
  synth->add_option("--out", synth_opt.out, "output cloud path")->required();
  synth->add_option("--seed", synth_opt.seed)->capture_default_str();
  synth->add_option("--n", synth_opt.count, "anchor count")->capture_default_str();
  synth->add_option("--corr-len", synth_opt.corr_len, "correlation length")
      ->capture_default_str();
  synth->add_option("--k", synth_opt.k, "offsets per anchor")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "fit the codec to a cloud")->configurable();
  struct {
    std::string in, out;
    CommonOptions common;
    tpc::TrainConfig cfg;
  } train_opt;
  train->add_option("--in", train_opt.in, "input cloud")->required();
  train->add_option("--out", train_opt.out, "output checkpoint")->required();
  add_common(train, train_opt.common);
  train->add_option("--steps", train_opt.cfg.total_steps)->capture_default_str();
  train->add_option("--seed", train_opt.cfg.seed)->capture_default_str();
  train->add_option("--batch", train_opt.cfg.batch_size)->capture_default_str();
  train->add_option("--resolution", train_opt.cfg.resolution)->capture_default_str();
  train->add_option("--channels", train_opt.cfg.channels)->capture_default_str();
  train->add_option("--hidden", train_opt.cfg.hidden_dim)->capture_default_str();
  train->add_option("--knn", train_opt.cfg.knn_k)->capture_default_str();
  train->add_option("--warmup-fraction", train_opt.cfg.warmup_fraction)
      ->capture_default_str();
  train->add_option("--lambda-e", train_opt.cfg.lambda_e)->capture_default_str();
  train->add_option("--lambda-m", train_opt.cfg.lambda_m)->capture_default_str();
  train->add_option("--lambda-tc", train_opt.cfg.lambda_tc)->capture_default_str();
  train->add_option("--epsilon", train_opt.cfg.epsilon,
                    "entropy scaling divisor (0 = N*(38+3k))")
      ->capture_default_str();
  train->add_option("--q-feature", train_opt.cfg.quant.feature)->capture_default_str();
  train->add_option("--q-scaling", train_opt.cfg.quant.scaling)->capture_default_str();
  train->add_option("--q-offsets", train_opt.cfg.quant.offsets)->capture_default_str();
  bool no_masks = false;
  train->add_flag("--no-masks", no_masks, "disable mask training");

  // encode / decode
  auto* encode = app.add_subcommand("encode", "compress a cloud with a checkpoint")->configurable();
  struct {
    std::string in, checkpoint, out;
    CommonOptions common;
  } encode_opt;
  encode->add_option("--in", encode_opt.in, "input cloud")->required();
  encode->add_option("--checkpoint", encode_opt.checkpoint, "trained checkpoint")
      ->required();
  encode->add_option("--out", encode_opt.out, "output compressed scene")->required();
  add_common(encode, encode_opt.common);

  auto* decode = app.add_subcommand("decode", "decompress a scene to a cloud")->configurable();
  struct {
    std::string in, out;
    CommonOptions common;
  } decode_opt;
  decode->add_option("--in", decode_opt.in, "compressed scene")->required();
  decode->add_option("--out", decode_opt.out, "output cloud")->required();
  add_common(decode, decode_opt.common);

  // verify
  auto* verify = app.add_subcommand("verify", "check a decoded cloud against the original")->configurable();
  struct {
    std::string original, decoded;
    tpc::QuantConfig quant;
  } verify_opt;
  verify->add_option("--original", verify_opt.original)->required();
  verify->add_option("--decoded", verify_opt.decoded)->required();
  verify->add_option("--q-feature", verify_opt.quant.feature)->capture_default_str();
  verify->add_option("--q-scaling", verify_opt.quant.scaling)->capture_default_str();
  verify->add_option("--q-offsets", verify_opt.quant.offsets)->capture_default_str();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "report size breakdown of a scene")->configurable();
  struct {
    std::string in, csv;
  } stats_opt;
  stats_cmd->add_option("--in", stats_opt.in)->required();
  stats_cmd->add_option("--csv", stats_opt.csv, "also write a CSV row per section");

  // wavelet
  auto* wavelet_cmd = app.add_subcommand("wavelet", "adaptive wavelet loss of two images")->configurable();
  struct {
    std::string a, b;
    long step = 0;
    tpc::WaveletSchedule schedule;
  } wav_opt;
  wavelet_cmd->add_option("--a", wav_opt.a)->required();
  wavelet_cmd->add_option("--b", wav_opt.b)->required();
  wavelet_cmd->add_option("--step", wav_opt.step)->capture_default_str();
  wavelet_cmd->add_option("--total-steps", wav_opt.schedule.total_steps)
      ->capture_default_str();
  wavelet_cmd->add_option("--l1-start", wav_opt.schedule.l1_start)->capture_default_str();
  wavelet_cmd->add_option("--l1-end", wav_opt.schedule.l1_end)->capture_default_str();
  wavelet_cmd->add_option("--l2-start", wav_opt.schedule.l2_start)->capture_default_str();
  wavelet_cmd->add_option("--l2-end", wav_opt.schedule.l2_end)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (show_config) {
    std::printf("%s", app.config_to_str(true, false).c_str());
    return kExitOk;
  }

  if (synth->parsed()) {
    return run_guarded(false, [&] {
      const tpc::AnchorCloud cloud = tpc::synth_correlated_cloud(
          synth_opt.seed, synth_opt.count, synth_opt.corr_len, synth_opt.k);
      tpc::save_anchor_cloud(cloud, synth_opt.out);
      std::printf("wrote %s (n=%lld, k=%d)\n", synth_opt.out.c_str(),
                  static_cast<long long>(cloud.anchor_count()), cloud.offsets_per_anchor);
      return kExitOk;
    });
  }

  if (train->parsed()) {
    if (int rc = require_input(train_opt.in); rc != kExitOk) return rc;
    return run_guarded(false, [&] {
      train_opt.cfg.threads = train_opt.common.threads;
      train_opt.cfg.deterministic = train_opt.common.deterministic;
      train_opt.cfg.enable_masks = !no_masks;
      const tpc::AnchorCloud cloud = tpc::load_anchor_cloud(train_opt.in);
      tpc::FitReport report;
      tpc::OptimizerMoments moments;
      const tpc::TrainedState state = tpc::fit(cloud, train_opt.cfg, &report, &moments);
      tpc::save_checkpoint(state, &moments, train_opt.out);

      std::printf("%-8s %-8s %14s\n", "step", "phase", "loss");
      for (const auto& [step, loss] : report.loss_history)
        std::printf("%-8ld %-8s %14.6f\n", step,
                    step < report.warmup_steps ? "warmup" : "main", loss);
      const double n = static_cast<double>(cloud.anchor_count());
      std::printf("entropy estimate before: %.1f bits (%.2f bits/anchor)\n",
                  report.entropy_estimate_before, report.entropy_estimate_before / n);
      std::printf("entropy estimate after:  %.1f bits (%.2f bits/anchor)\n",
                  report.entropy_estimate_after, report.entropy_estimate_after / n);
      std::printf("wrote checkpoint %s\n", train_opt.out.c_str());
      return kExitOk;
    });
  }

  if (encode->parsed()) {
    if (int rc = require_input(encode_opt.in); rc != kExitOk) return rc;
    if (int rc = require_input(encode_opt.checkpoint); rc != kExitOk) return rc;
    return run_guarded(true, [&] {
      const tpc::AnchorCloud cloud = tpc::load_anchor_cloud(encode_opt.in);
      const tpc::TrainedState state = tpc::load_checkpoint(encode_opt.checkpoint);
      tpc::CodecStats stats;
      const tpc::CompressedScene scene =
          tpc::compress_scene(cloud, state, encode_opt.common.threads, &stats);
      tpc::write_container_file(scene, encode_opt.out);
      print_stats(stats);
      return kExitOk;
    });
  }

  if (decode->parsed()) {
    if (int rc = require_input(decode_opt.in); rc != kExitOk) return rc;
    return run_guarded(true, [&] {
      const tpc::CompressedScene scene = tpc::read_container_file(decode_opt.in);
      const tpc::DecodedScene decoded =
          tpc::decompress_scene(scene, decode_opt.common.threads);
      tpc::save_anchor_cloud(decoded.cloud, decode_opt.out);
      std::printf("decoded %" PRIu64 " anchors to %s\n", decoded.stats.anchor_count,
                  decode_opt.out.c_str());
      return kExitOk;
    });
  }

  if (verify->parsed()) {
    if (int rc = require_input(verify_opt.original); rc != kExitOk) return rc;
    if (int rc = require_input(verify_opt.decoded); rc != kExitOk) return rc;
    return run_guarded(false, [&] {
      const tpc::AnchorCloud original = tpc::load_anchor_cloud(verify_opt.original);
      const tpc::AnchorCloud decoded = tpc::load_anchor_cloud(verify_opt.decoded);
      if (original.anchor_count() != decoded.anchor_count() ||
          original.offsets_per_anchor != decoded.offsets_per_anchor) {
        std::fprintf(stderr, "error: cloud shapes differ (N=%lld/%lld, k=%d/%d)\n",
                     static_cast<long long>(original.anchor_count()),
                     static_cast<long long>(decoded.anchor_count()),
                     original.offsets_per_anchor, decoded.offsets_per_anchor);
        return kExitUsage;
      }
      const tpc::QuantConfig quant = tpc::normalized_quant(verify_opt.quant);

      // The compressed file stores attributes as fp32 after s*q
      // reconstruction, so compare at fp32 resolution.
      double max_attr_dev = 0.0;
      auto check = [&](double orig, double dec, double q) {
        const double expect =
            static_cast<double>(static_cast<float>(tpc::quantize_eval(orig, q).reconstructed));
        max_attr_dev = std::max(max_attr_dev, std::abs(expect - dec));
        return expect == dec;
      };
      bool ok = true;
      for (Eigen::Index i = 0; i < original.anchor_count(); ++i) {
        for (int j = 0; j < tpc::kFeatureDim; ++j)
          ok &= check(original.features(i, j), decoded.features(i, j), quant.feature);
        for (int j = 0; j < 3; ++j)
          ok &= check(original.scalings(i, j), decoded.scalings(i, j), quant.scaling);
        for (Eigen::Index j = 0; j < original.offsets.cols(); ++j)
          ok &= check(original.offsets(i, j), decoded.offsets(i, j), quant.offsets);
      }

      const Eigen::Vector3d lo = original.positions.colwise().minCoeff();
      const Eigen::Vector3d hi = original.positions.colwise().maxCoeff();
      double max_pos_dev = 0.0;
      bool pos_ok = true;
      for (Eigen::Index i = 0; i < original.anchor_count(); ++i)
        for (int a = 0; a < 3; ++a) {
          const double cell = tpc::position_cell_size(lo, hi, a);
          const double dev = std::abs(original.positions(i, a) - decoded.positions(i, a));
          max_pos_dev = std::max(max_pos_dev, dev);
          // fp32 storage of the decoded cloud adds half-ulp noise on top of
          // the half-cell quantization bound.
          if (dev > 0.5 * cell + 1e-6 * std::max(1.0, std::abs(original.positions(i, a))))
            pos_ok = false;
        }

      std::printf("max attribute deviation: %.3g\n", max_attr_dev);
      std::printf("max position deviation:  %.3g\n", max_pos_dev);
      if (!ok || !pos_ok) {
        std::fprintf(stderr, "verification FAILED\n");
        return kExitVerifyFailed;
      }
      std::printf("verification passed\n");
      return kExitOk;
    });
  }

  if (stats_cmd->parsed()) {
    if (int rc = require_input(stats_opt.in); rc != kExitOk) return rc;
    return run_guarded(true, [&] {
      const tpc::CompressedScene scene = tpc::read_container_file(stats_opt.in);
      const tpc::CodecStats stats = tpc::collect_stats(scene);
      print_stats(stats);
      const double raw_bytes =
          24.0 + static_cast<double>(stats.anchor_count) * 4.0 *
                     (38.0 + 3.0 * scene.header.offsets_per_anchor);
      std::printf("raw fp32 cloud bytes %.0f\n", raw_bytes);
      std::printf("compression ratio    %.2fx\n",
                  raw_bytes / static_cast<double>(stats.total_bytes));
      if (!stats_opt.csv.empty()) {
        std::FILE* f = std::fopen(stats_opt.csv.c_str(), "w");
        if (f == nullptr) throw tpc::IoError("cannot write CSV: " + stats_opt.csv);
        for (const auto& s : stats.sections)
          std::fprintf(f, "%s,%" PRIu64 ",%" PRIu64 ",%.3f\n", s.name.c_str(), s.bytes,
                       s.symbols, s.estimate_bits);
        std::fclose(f);
      }
      return kExitOk;
    });
  }

  if (wavelet_cmd->parsed()) {
    if (int rc = require_input(wav_opt.a); rc != kExitOk) return rc;
    if (int rc = require_input(wav_opt.b); rc != kExitOk) return rc;
    return run_guarded(false, [&] {
      tpc::Image a = tpc::load_image(wav_opt.a);
      tpc::Image b = tpc::load_image(wav_opt.b);
      if (a[0].rows() % 4 != 0 || a[0].cols() % 4 != 0 || b[0].rows() % 4 != 0 ||
          b[0].cols() % 4 != 0) {
        std::printf("note: cropping images to a multiple of 4\n");
        a = tpc::crop_to_multiple(a, 4);
        b = tpc::crop_to_multiple(b, 4);
      }
      const tpc::WaveletLossBreakdown d =
          tpc::wavelet_loss_breakdown(a, b, wav_opt.step, wav_opt.schedule);
      std::printf("lambda1 %.6f\n", d.lambda1);
      std::printf("lambda2 %.6f\n", d.lambda2);
      std::printf("YL term %.9f\n", d.low_term);
      std::printf("YH term %.9f\n", d.high_term);
      std::printf("total   %.9f\n", d.total);
      return kExitOk;
    });
  }

  return kExitUsage;
}
