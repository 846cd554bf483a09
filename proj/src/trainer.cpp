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

#include "tpc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tpc/bin_model.hpp"
#include "tpc/entropy_model.hpp"
#include "tpc/errors.hpp"
#include "tpc/parallel.hpp"
#include "tpc/rng.hpp"
#include "tpc/serialize.hpp"

namespace tpc {

double LrSchedule::at(long step, long total_steps) const {
  if (!(start > 0.0) || !(end > 0.0)) throw ValidationError("learning rates must be positive");
  const long denom = std::max<long>(1, total_steps - 1);
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(denom), 0.0, 1.0);
  return start * std::pow(end / start, t);
}

void TrainConfig::validate() const {
  if (total_steps < 1) throw ValidationError("total_steps must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (knn_k < 1) throw ValidationError("knn K must be >= 1");
  if (hidden_dim < 1) throw ValidationError("hidden_dim must be >= 1");
  if (resolution < 8 || resolution % 8 != 0)
    throw ValidationError("resolution must be a positive multiple of 8");
  if (channels < 1) throw ValidationError("channels must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0))
    throw ValidationError("warmup_fraction must lie in [0, 1]");
  if (lambda_e < 0.0 || lambda_m < 0.0 || lambda_w < 0.0 || lambda_tc < 0.0)
    throw ValidationError("loss weights must be nonnegative");
  if (epsilon < 0.0) throw ValidationError("epsilon must be positive (or 0 for auto)");
  quant.validate();
}

double TrainConfig::resolved_epsilon(Eigen::Index anchors, int offsets_per_anchor) const {
  if (epsilon > 0.0) return epsilon;
  return static_cast<double>(anchors) *
         static_cast<double>(kFeatureDim + 3 + 3 * offsets_per_anchor);
}

long TrainConfig::warmup_steps() const {
  return static_cast<long>(warmup_fraction * static_cast<double>(total_steps));
}

double total_loss(const LossParts& parts, const TrainConfig& cfg) {
  const struct {
    const char* name;
    double value;
  } named[] = {{"fidelity", parts.fidelity},
               {"entropy", parts.entropy_bits},
               {"mask", parts.mask},
               {"tri_rec", parts.tri_rec},
               {"wavelet", parts.wavelet}};
  for (const auto& [name, value] : named)
    if (!std::isfinite(value))
      throw TrainingError(std::string("non-finite loss component: ") + name);
  const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : 1.0;
  return parts.fidelity + cfg.lambda_e * parts.entropy_bits / eps +
         cfg.lambda_m * parts.mask + cfg.lambda_w * parts.wavelet +
         cfg.lambda_tc * parts.tri_rec;
}

std::vector<ParamBlock> parameter_blocks(TriPlaneGrid& grid) {
  std::vector<ParamBlock> blocks;
  for (auto& plane : grid.planes)
    for (auto& image : plane)
      blocks.push_back({image.data(), static_cast<std::size_t>(image.size())});
  return blocks;
}

std::vector<ParamBlock> parameter_blocks(PlaneAutoencoder& ae) {
  std::vector<ParamBlock> blocks;
  for (auto* half : {&ae.encoder, &ae.decoder})
    for (ConvLayer& layer : *half) {
      for (Eigen::Matrix3d& k : layer.kernels) blocks.push_back({k.data(), 9});
      blocks.push_back({layer.bias.data(), static_cast<std::size_t>(layer.bias.size())});
    }
  return blocks;
}

std::vector<ParamBlock> parameter_blocks(DistributionModel& model) {
  std::vector<ParamBlock> blocks;
  auto add = [&blocks](Eigen::MatrixXd& m) {
    blocks.push_back({m.data(), static_cast<std::size_t>(m.size())});
  };
  auto addv = [&blocks](Eigen::VectorXd& v) {
    blocks.push_back({v.data(), static_cast<std::size_t>(v.size())});
  };
  add(model.w1);
  addv(model.b1);
  add(model.w2);
  addv(model.b2);
  for (int g = 0; g < 3; ++g) {
    add(model.head_w[g]);
    addv(model.head_b[g]);
  }
  return blocks;
}

std::vector<ParamBlock> parameter_blocks(MaskParams& masks) {
  return {{masks.anchor_logits.data(), static_cast<std::size_t>(masks.anchor_logits.size())},
          {masks.offset_logits.data(), static_cast<std::size_t>(masks.offset_logits.size())}};
}

std::size_t total_size(std::span<const ParamBlock> blocks) {
  std::size_t n = 0;
  for (const ParamBlock& b : blocks) n += b.size;
  return n;
}

AdamState make_adam(std::size_t size) {
  AdamState st;
  st.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  st.v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  return st;
}

void adam_step(std::span<ParamBlock> params, std::span<const ParamBlock> grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size())
    throw ValidationError("adam: parameter/gradient block mismatch");
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++state.step;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  std::size_t offset = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size != grads[b].size)
      throw ValidationError("adam: parameter/gradient block mismatch");
    for (std::size_t i = 0; i < params[b].size; ++i, ++offset) {
      const double g = grads[b].values[i];
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in optimizer step");
      double& m = state.m(static_cast<Eigen::Index>(offset));
      double& v = state.v(static_cast<Eigen::Index>(offset));
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g * g;
      params[b].values[i] -= lr * (m / c1) / (std::sqrt(v / c2) + kEps);
    }
  }
  if (offset != static_cast<std::size_t>(state.m.size()))
    throw ValidationError("adam: moment size mismatch");
}

Grads make_grads(const TrainedState& state) {
  Grads g;
  g.grid = make_triplane(state.grid.resolution, state.grid.channels);
  g.ae = zeros_like(state.ae);
  g.model = zeros_like(state.model);
  g.masks = zeros_like(state.masks);
  return g;
}

void set_zero(Grads& grads) {
  set_zero(grads.grid);
  set_zero(grads.ae);
  set_zero(grads.model);
  grads.masks.anchor_logits.setZero();
  grads.masks.offset_logits.setZero();
}

TrainingObjective::TrainingObjective(const AnchorCloud& cloud, const TrainConfig& cfg)
    : cfg_(cfg) {
  validate_cloud(cloud);
  cfg_.validate();
  cfg_.quant = normalized_quant(cfg_.quant);
  cloud_ = cloud;
  cloud_.positions = quantize_positions(cloud.positions).dequantized;
  params_ = contract_params(scene_bounds(cloud_.positions));
  index_ = KnnIndex(cloud_.positions);
  epsilon_ = cfg_.resolved_epsilon(cloud_.anchor_count(), cloud_.offsets_per_anchor);

  footprints_.resize(static_cast<std::size_t>(cloud_.anchor_count()));
  parallel_chunks(cloud_.anchor_count(), cfg_.threads,
                  [&](int, std::int64_t begin, std::int64_t end) {
                    for (std::int64_t i = begin; i < end; ++i)
                      footprints_[static_cast<std::size_t>(i)] =
                          context_footprint(cloud_.positions, params_, index_, i,
                                            cfg_.knn_k, cfg_.resolution);
                  });
}

namespace {

struct ChunkAccumulator {
  std::array<double, 3> fidelity{};
  double entropy_bits = 0.0;
  TriPlaneGrid d_src;
  DistributionModel d_model;
  MaskParams d_masks;
  bool with_grads = false;
};

double group_value(const AnchorCloud& cloud, Group g, Eigen::Index anchor, int dim) {
  switch (g) {
    case Group::kFeature: return cloud.features(anchor, dim);
    case Group::kScaling: return cloud.scalings(anchor, dim);
    default: return cloud.offsets(anchor, dim);
  }
}

}  // namespace

LossParts TrainingObjective::evaluate(const TrainedState& state, long step, Grads* grads,
                                      bool soft_masks) const {
  validate_state(state, cloud_.anchor_count(), cloud_.offsets_per_anchor);
  const Eigen::Index n = cloud_.anchor_count();
  const int k = cloud_.offsets_per_anchor;
  const bool phase_two = phase2(step);
  const bool use_masks = phase_two && cfg_.enable_masks;
  const bool use_noise = phase_two;
  if (grads != nullptr) set_zero(*grads);

  // Batch selection: pure function of (seed, step).
  std::vector<Eigen::Index> batch;
  if (static_cast<Eigen::Index>(cfg_.batch_size) >= n) {
    batch.resize(static_cast<std::size_t>(n));
    std::iota(batch.begin(), batch.end(), Eigen::Index{0});
  } else {
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    Rng rng(hash_combine(hash_combine(cfg_.seed, 0xBA7C4ull), static_cast<std::uint64_t>(step)));
    for (int t = 0; t < cfg_.batch_size; ++t) {
      const std::size_t j =
          static_cast<std::size_t>(t) +
          static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(n - t)));
      std::swap(pool[static_cast<std::size_t>(t)], pool[j]);
    }
    batch.assign(pool.begin(), pool.begin() + cfg_.batch_size);
  }
  const double batch_scale = static_cast<double>(n) / static_cast<double>(batch.size());

  TriPlaneGrid latent, reconstruction;
  AeCache cache;
  const TriPlaneGrid* src = &state.grid;
  if (phase_two) {
    autoencoder_forward(state.ae, state.grid, latent, reconstruction,
                        grads != nullptr ? &cache : nullptr, cfg_.threads);
    src = &reconstruction;
  }

  const double inv_eps = 1.0 / epsilon_;
  const double entropy_coeff = cfg_.lambda_e * inv_eps * batch_scale;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const std::uint64_t noise_seed = hash_combine(cfg_.seed, 0x4015Eull);

  const int workers = std::max(1, std::min<int>(effective_threads(cfg_.threads),
                                                static_cast<int>(batch.size())));
  std::vector<ChunkAccumulator> accs(static_cast<std::size_t>(workers));
  for (ChunkAccumulator& acc : accs) {
    acc.with_grads = grads != nullptr;
    if (acc.with_grads) {
      acc.d_src = make_triplane(src->resolution, src->channels);
      acc.d_model = zeros_like(state.model);
      acc.d_masks = zeros_like(state.masks);
    }
  }

  parallel_chunks(static_cast<std::int64_t>(batch.size()), workers,
                  [&](int chunk, std::int64_t begin, std::int64_t end) {
    ChunkAccumulator& acc = accs[static_cast<std::size_t>(chunk)];
    Eigen::VectorXd ctx, d_ctx;
    ModelCache mcache;
    GroupGaussians gauss;
    std::array<Eigen::VectorXd, 3> d_mu, d_sigma;
    for (int g = 0; g < 3; ++g) {
      d_mu[g].resize(state.model.group_dims[g]);
      d_sigma[g].resize(state.model.group_dims[g]);
    }
    for (std::int64_t bi = begin; bi < end; ++bi) {
      const Eigen::Index i = batch[static_cast<std::size_t>(bi)];
      const ContextFootprint& fp = footprints_[static_cast<std::size_t>(i)];
      context_from_footprint(*src, fp, cfg_.knn_k, ctx);
      model_forward(state.model, ctx, acc.with_grads ? &mcache : nullptr, &gauss);
      if (acc.with_grads)
        for (int g = 0; g < 3; ++g) {
          d_mu[g].setZero();
          d_sigma[g].setZero();
        }

      double anchor_gate = 1.0, anchor_soft = 1.0;
      if (use_masks) {
        anchor_soft = sigmoid(state.masks.anchor_logits(i));
        anchor_gate = soft_masks
                          ? anchor_soft
                          : (mask_forward(state.masks.anchor_logits(i),
                                          state.masks.threshold)
                                 ? 1.0
                                 : 0.0);
      }
      double d_anchor_gate = 0.0;

      for (Group g : kGroups) {
        const int gi = static_cast<int>(g);
        const double q = cfg_.quant.step(g);
        const double w_fid = cfg_.fidelity_weights[static_cast<std::size_t>(gi)];
        for (int j = 0; j < state.model.group_dims[gi]; ++j) {
          const double value = group_value(cloud_, g, i, j);
          const double u =
              use_noise ? counter_noise(noise_seed, static_cast<std::uint64_t>(step),
                                        static_cast<std::uint64_t>(i),
                                        (static_cast<std::uint64_t>(gi) << 24) |
                                            static_cast<std::uint64_t>(j))
                        : 0.0;
          const double center = quantize_train(value, q, u);

          double slot_gate = 1.0, slot_soft = 1.0;
          int slot = 0;
          if (g == Group::kOffsets && use_masks) {
            slot = j / 3;
            slot_soft = sigmoid(state.masks.offset_logits(i, slot));
            slot_gate = soft_masks
                            ? slot_soft
                            : (mask_forward(state.masks.offset_logits(i, slot),
                                            state.masks.threshold)
                                   ? 1.0
                                   : 0.0);
          }
          const double gate = anchor_gate * slot_gate;

          BinGrad bg;
          const double bits = bin_bits(center, gauss.mu[gi](j), gauss.sigma[gi](j), q,
                                       acc.with_grads ? &bg : nullptr);
          acc.entropy_bits += gate * bits;
          const double keep_err = std::abs(value - center);
          const double drop_err = std::abs(value);
          acc.fidelity[static_cast<std::size_t>(gi)] +=
              gate * keep_err + (1.0 - gate) * drop_err;

          if (acc.with_grads) {
            d_mu[gi](j) = entropy_coeff * gate * bg.d_mu;
            d_sigma[gi](j) = entropy_coeff * gate * bg.d_sigma;
            if (use_masks) {
              const double d_gate =
                  entropy_coeff * bits + w_fid * inv_batch * (keep_err - drop_err);
              if (g == Group::kOffsets) {
                d_anchor_gate += slot_gate * d_gate;
                acc.d_masks.offset_logits(i, slot) +=
                    anchor_gate * d_gate * slot_soft * (1.0 - slot_soft);
              } else {
                d_anchor_gate += d_gate;
              }
            }
          }
        }
      }
      if (acc.with_grads) {
        if (use_masks)
          acc.d_masks.anchor_logits(i) += d_anchor_gate * anchor_soft * (1.0 - anchor_soft);
        d_ctx = Eigen::VectorXd::Zero(ctx.size());
        model_backward(state.model, mcache, d_mu, d_sigma, acc.d_model, &d_ctx);
        context_grad_to_grid(fp, cfg_.knn_k, d_ctx, acc.d_src);
      }
    }
  });

  LossParts parts;
  std::array<double, 3> fid{};
  TriPlaneGrid d_src_total;
  if (grads != nullptr) d_src_total = make_triplane(src->resolution, src->channels);
  for (ChunkAccumulator& acc : accs) {
    parts.entropy_bits += acc.entropy_bits;
    for (int g = 0; g < 3; ++g) fid[static_cast<std::size_t>(g)] += acc.fidelity[g];
    if (grads != nullptr) {
      for (int p = 0; p < 3; ++p)
        for (int c = 0; c < d_src_total.channels; ++c)
          d_src_total.planes[p][c] += acc.d_src.planes[p][c];
      auto dst = parameter_blocks(grads->model);
      auto src_blocks = parameter_blocks(acc.d_model);
      for (std::size_t b = 0; b < dst.size(); ++b)
        for (std::size_t e = 0; e < dst[b].size; ++e)
          dst[b].values[e] += src_blocks[b].values[e];
      grads->masks.anchor_logits += acc.d_masks.anchor_logits;
      grads->masks.offset_logits += acc.d_masks.offset_logits;
    }
  }
  parts.entropy_bits *= batch_scale;
  for (int g = 0; g < 3; ++g)
    parts.fidelity +=
        cfg_.fidelity_weights[static_cast<std::size_t>(g)] * fid[static_cast<std::size_t>(g)] *
        inv_batch;

  if (use_masks) {
    parts.mask = mask_loss(state.masks);
    if (grads != nullptr) mask_loss_grad(state.masks, cfg_.lambda_m, grads->masks);
  }

  if (phase_two) {
    parts.tri_rec = tri_rec_loss(state.grid, reconstruction);
    if (grads != nullptr) {
      const double scale =
          cfg_.lambda_tc / static_cast<double>(state.grid.value_count());
      for (int p = 0; p < 3; ++p)
        for (int c = 0; c < state.grid.channels; ++c) {
          const Eigen::MatrixXd diff =
              reconstruction.planes[p][c] - state.grid.planes[p][c];
          d_src_total.planes[p][c] += scale * diff.array().sign().matrix();
        }
      autoencoder_backward(state.ae, cache, d_src_total, grads->ae, grads->grid,
                           cfg_.threads);
      for (int p = 0; p < 3; ++p)
        for (int c = 0; c < state.grid.channels; ++c) {
          const Eigen::MatrixXd diff =
              state.grid.planes[p][c] - reconstruction.planes[p][c];
          grads->grid.planes[p][c] += scale * diff.array().sign().matrix();
        }
    }
  } else if (grads != nullptr) {
    for (int p = 0; p < 3; ++p)
      for (int c = 0; c < state.grid.channels; ++c)
        grads->grid.planes[p][c] += d_src_total.planes[p][c];
  }
  (void)k;
  return parts;
}

TrainedState fit(const AnchorCloud& cloud, const TrainConfig& cfg, FitReport* report,
                 OptimizerMoments* moments_out) {
  validate_cloud(cloud);
  TrainConfig local = cfg;
  local.validate();
  local.quant = normalized_quant(cfg.quant);
  local.epsilon = local.resolved_epsilon(cloud.anchor_count(), cloud.offsets_per_anchor);

  const TrainingObjective objective(cloud, local);
  TrainedState state = make_initial_state(cloud.anchor_count(), cloud.offsets_per_anchor,
                                          local.resolution, local.channels,
                                          local.hidden_dim, local.knn_k, local.quant,
                                          local.seed);
  if (report != nullptr) {
    report->warmup_steps = local.warmup_steps();
    TrainedState probe = state;
    probe.trained = true;
    report->entropy_estimate_before =
        estimate_bits_hard(objective.coding_cloud(), probe, local.threads);
  }

  Grads grads = make_grads(state);
  AdamState adam_grid = make_adam(total_size(parameter_blocks(state.grid)));
  AdamState adam_ae = make_adam(total_size(parameter_blocks(state.ae)));
  AdamState adam_model = make_adam(total_size(parameter_blocks(state.model)));
  AdamState adam_masks = make_adam(total_size(parameter_blocks(state.masks)));

  TrainedState snapshot = state;
  long snapshot_step = -1;
  const long log_every = std::max<long>(1, local.total_steps / 50);
  double last_total = 0.0;

  for (long step = 0; step < local.total_steps; ++step) {
    LossParts parts;
    double total = 0.0;
    try {
      parts = objective.evaluate(state, step, &grads);
      total = total_loss(parts, local);
      if (!std::isfinite(total)) throw TrainingError("non-finite total loss");

      const bool phase_two = objective.phase2(step);
      {
        auto p = parameter_blocks(state.grid);
        auto g = parameter_blocks(grads.grid);
        adam_step(p, std::vector<ParamBlock>(g.begin(), g.end()), adam_grid,
                  local.lr_grid.at(step, local.total_steps));
      }
      {
        auto p = parameter_blocks(state.model);
        auto g = parameter_blocks(grads.model);
        adam_step(p, std::vector<ParamBlock>(g.begin(), g.end()), adam_model,
                  local.lr_model.at(step, local.total_steps));
      }
      if (phase_two) {
        auto p = parameter_blocks(state.ae);
        auto g = parameter_blocks(grads.ae);
        adam_step(p, std::vector<ParamBlock>(g.begin(), g.end()), adam_ae,
                  local.lr_ae.at(step, local.total_steps));
        if (local.enable_masks) {
          auto pm = parameter_blocks(state.masks);
          auto gm = parameter_blocks(grads.masks);
          adam_step(pm, std::vector<ParamBlock>(gm.begin(), gm.end()), adam_masks,
                    local.lr_masks.at(step, local.total_steps));
        }
      }
    } catch (const TrainingError& err) {
      throw TrainingDivergence(std::string(err.what()) + " at step " +
                                   std::to_string(step) + " (last good checkpoint: step " +
                                   std::to_string(snapshot_step) + ")",
                               std::make_shared<TrainedState>(snapshot));
    }

    last_total = total;
    if (report != nullptr && (step % log_every == 0 || step + 1 == local.total_steps))
      report->loss_history.emplace_back(step, total);
    if (step % 25 == 0) {
      snapshot = state;
      snapshot_step = step;
    }
  }

  state.trained = true;
  if (report != nullptr) {
    report->final_loss = last_total;
    report->entropy_estimate_after =
        estimate_bits_hard(objective.coding_cloud(), state, local.threads);
  }
  if (moments_out != nullptr)
    *moments_out = OptimizerMoments{adam_grid, adam_ae, adam_model, adam_masks};
  return state;
}

double estimate_bits_hard(const AnchorCloud& cloud, const TrainedState& state,
                          int threads) {
  validate_cloud(cloud);
  validate_state(state, cloud.anchor_count(), cloud.offsets_per_anchor);
  const QuantConfig quant = normalized_quant(state.quant);
  const PruneResult prune = apply_masks(cloud, state.masks);
  const QuantizedPositions qp = quantize_positions(prune.cloud.positions);
  const ContractParams params = contract_params(scene_bounds(qp.dequantized));
  const KnnIndex index(qp.dequantized);
  const TriPlaneGrid reconstruction =
      decode_planes(encode_planes(state.grid, state.ae), state.ae);

  const Eigen::Index n = prune.cloud.anchor_count();
  const int k = prune.cloud.offsets_per_anchor;
  const int workers = std::max(1, std::min<int>(effective_threads(threads),
                                                static_cast<int>(n)));
  std::vector<double> partial(static_cast<std::size_t>(workers), 0.0);
  parallel_chunks(n, workers, [&](int chunk, std::int64_t begin, std::int64_t end) {
    double sum = 0.0;
    for (std::int64_t i = begin; i < end; ++i) {
      const Eigen::VectorXd ctx =
          assemble_context(qp.dequantized, reconstruction, params, index, i, state.knn_k);
      const GroupGaussians gauss = predict_distribution(state.model, ctx);
      for (Group g : kGroups) {
        const int gi = static_cast<int>(g);
        const double q = quant.step(g);
        for (int j = 0; j < state.model.group_dims[gi]; ++j) {
          if (g == Group::kOffsets &&
              !prune.slot_mask[static_cast<std::size_t>(i) * k + j / 3])
            continue;
          const long long s = quantize_symbol(group_value(prune.cloud, g, i, j), q);
          sum += bits_from_probability(
              coeff_probability(s, gauss.mu[gi](j), gauss.sigma[gi](j), q));
        }
      }
    }
    partial[static_cast<std::size_t>(chunk)] = sum;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double baseline_bits_hard(const AnchorCloud& cloud, const QuantConfig& quant_in) {
  validate_cloud(cloud);
  const QuantConfig quant = normalized_quant(quant_in);
  quant.validate();
  const Eigen::Index n = cloud.anchor_count();
  double total = 0.0;
  const std::array<int, 3> dims{kFeatureDim, 3, 3 * cloud.offsets_per_anchor};
  for (Group g : kGroups) {
    const int gi = static_cast<int>(g);
    const double q = quant.step(g);
    for (int j = 0; j < dims[static_cast<std::size_t>(gi)]; ++j) {
      std::vector<long long> symbols(static_cast<std::size_t>(n));
      double mean = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        symbols[static_cast<std::size_t>(i)] = quantize_symbol(group_value(cloud, g, i, j), q);
        mean += dequantize_symbol(symbols[static_cast<std::size_t>(i)], q);
      }
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (long long s : symbols) {
        const double d = dequantize_symbol(s, q) - mean;
        var += d * d;
      }
      var /= static_cast<double>(n);
      const double sigma = std::max(std::sqrt(var), kSigmaMin);
      for (long long s : symbols)
        total += bits_from_probability(coeff_probability(s, mean, sigma, q));
    }
  }
  return total;
}

namespace {

void write_conv_f64(ByteWriter& w, const ConvLayer& layer) {
  for (int oc = 0; oc < layer.out_channels; ++oc)
    for (int ic = 0; ic < layer.in_channels; ++ic)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) w.f64(layer.kernel(oc, ic)(r, c));
  for (int oc = 0; oc < layer.out_channels; ++oc) w.f64(layer.bias(oc));
}

void read_conv_f64(ByteReader& r, ConvLayer& layer) {
  for (int oc = 0; oc < layer.out_channels; ++oc)
    for (int ic = 0; ic < layer.in_channels; ++ic)
      for (int kr = 0; kr < 3; ++kr)
        for (int kc = 0; kc < 3; ++kc) layer.kernel(oc, ic)(kr, kc) = r.f64();
  for (int oc = 0; oc < layer.out_channels; ++oc) layer.bias(oc) = r.f64();
}

void write_matrix_f64(ByteWriter& w, const Eigen::MatrixXd& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
}

Eigen::MatrixXd read_matrix_f64(ByteReader& r) {
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
  return m;
}

void write_adam(ByteWriter& w, const AdamState& st) {
  w.u64(static_cast<std::uint64_t>(st.step));
  w.u64(static_cast<std::uint64_t>(st.m.size()));
  for (Eigen::Index i = 0; i < st.m.size(); ++i) w.f64(st.m(i));
  for (Eigen::Index i = 0; i < st.v.size(); ++i) w.f64(st.v(i));
}

AdamState read_adam(ByteReader& r) {
  AdamState st;
  st.step = static_cast<long>(r.u64());
  const std::uint64_t size = r.u64();
  st.m.resize(static_cast<Eigen::Index>(size));
  st.v.resize(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < st.m.size(); ++i) st.m(i) = r.f64();
  for (Eigen::Index i = 0; i < st.v.size(); ++i) st.v(i) = r.f64();
  return st;
}

}  // namespace

void save_checkpoint(const TrainedState& state, const OptimizerMoments* moments,
                     const std::filesystem::path& path) {
  const Eigen::Index n = state.masks.anchor_logits.size();
  const int k = static_cast<int>(state.masks.offset_logits.cols());

  CompressedScene container;
  container.header.anchor_count = static_cast<std::uint64_t>(n);
  container.header.offsets_per_anchor = static_cast<std::uint32_t>(k);
  container.header.knn_k = static_cast<std::uint32_t>(state.knn_k);
  container.header.resolution = static_cast<std::uint32_t>(state.grid.resolution);
  container.header.channels = static_cast<std::uint32_t>(state.grid.channels);
  const QuantConfig q = normalized_quant(state.quant);
  container.header.quant_steps = {static_cast<float>(q.feature),
                                  static_cast<float>(q.scaling),
                                  static_cast<float>(q.offsets)};
  container.sections.push_back(
      {SectionId::kPlanes,
       build_planes_section(encode_planes(state.grid, state.ae), state.ae)});
  container.sections.push_back({SectionId::kModel, build_model_section(state.model)});

  ByteWriter w;
  w.u8(state.trained ? 1 : 0);
  w.f64(state.masks.threshold);
  w.u32(static_cast<std::uint32_t>(state.grid.resolution));
  w.u32(static_cast<std::uint32_t>(state.grid.channels));
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < state.grid.channels; ++c)
      for (int row = 0; row < state.grid.resolution; ++row)
        for (int col = 0; col < state.grid.resolution; ++col)
          w.f64(state.grid.planes[p][c](row, col));
  for (const ConvLayer& layer : state.ae.encoder) write_conv_f64(w, layer);
  for (const ConvLayer& layer : state.ae.decoder) write_conv_f64(w, layer);
  write_matrix_f64(w, state.model.w1);
  write_matrix_f64(w, state.model.b1);
  write_matrix_f64(w, state.model.w2);
  write_matrix_f64(w, state.model.b2);
  for (int g = 0; g < 3; ++g) {
    write_matrix_f64(w, state.model.head_w[g]);
    write_matrix_f64(w, state.model.head_b[g]);
  }
  write_matrix_f64(w, state.masks.anchor_logits);
  write_matrix_f64(w, state.masks.offset_logits);
  w.u8(moments != nullptr ? 1 : 0);
  if (moments != nullptr) {
    write_adam(w, moments->grid);
    write_adam(w, moments->ae);
    write_adam(w, moments->model);
    write_adam(w, moments->masks);
  }
  container.sections.push_back({SectionId::kTraining, w.take()});
  write_container_file(container, path);
}

TrainedState load_checkpoint(const std::filesystem::path& path, OptimizerMoments* moments) {
  const CompressedScene container = read_container_file(path);
  const Section& training = container.require(SectionId::kTraining);
  ByteReader r({training.bytes.data(), training.bytes.size()});

  TrainedState state;
  state.knn_k = static_cast<int>(container.header.knn_k);
  state.quant.feature = static_cast<double>(container.header.quant_steps[0]);
  state.quant.scaling = static_cast<double>(container.header.quant_steps[1]);
  state.quant.offsets = static_cast<double>(container.header.quant_steps[2]);

  state.trained = r.u8() != 0;
  const double threshold = r.f64();
  const std::uint32_t resolution = r.u32();
  const std::uint32_t channels = r.u32();
  state.grid = make_triplane(static_cast<int>(resolution), static_cast<int>(channels));
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < state.grid.channels; ++c)
      for (int row = 0; row < state.grid.resolution; ++row)
        for (int col = 0; col < state.grid.resolution; ++col)
          state.grid.planes[p][c](row, col) = r.f64();
  state.ae = make_plane_autoencoder(static_cast<int>(channels), 0);
  for (ConvLayer& layer : state.ae.encoder) read_conv_f64(r, layer);
  for (ConvLayer& layer : state.ae.decoder) read_conv_f64(r, layer);
  state.model.group_dims =
      std::array<int, 3>{kFeatureDim, 3,
                         3 * static_cast<int>(container.header.offsets_per_anchor)};
  state.model.w1 = read_matrix_f64(r);
  state.model.b1 = read_matrix_f64(r).col(0);
  state.model.w2 = read_matrix_f64(r);
  state.model.b2 = read_matrix_f64(r).col(0);
  for (int g = 0; g < 3; ++g) {
    state.model.head_w[g] = read_matrix_f64(r);
    state.model.head_b[g] = read_matrix_f64(r).col(0);
  }
  state.masks.anchor_logits = read_matrix_f64(r).col(0);
  state.masks.offset_logits = read_matrix_f64(r);
  state.masks.threshold = threshold;
  const bool has_moments = r.u8() != 0;
  if (has_moments) {
    OptimizerMoments m;
    m.grid = read_adam(r);
    m.ae = read_adam(r);
    m.model = read_adam(r);
    m.masks = read_adam(r);
    if (moments != nullptr) *moments = std::move(m);
  }
  if (!r.at_end()) throw CorruptionError("training section has trailing bytes");
  return state;
}

GradCheckReport grad_check(const std::function<double()>& loss,
                           std::span<ParamBlock> params,
                           std::span<const ParamBlock> analytic, int samples,
                           std::uint64_t seed, const std::string& group_name) {
  GradCheckReport report;
  const std::size_t total = total_size({params.data(), params.size()});
  if (total == 0) return report;
  if (total_size(analytic) != total)
    throw ValidationError("grad_check: analytic gradient layout mismatch");

  std::vector<std::size_t> picks;
  if (total <= static_cast<std::size_t>(samples)) {
    picks.resize(total);
    std::iota(picks.begin(), picks.end(), std::size_t{0});
  } else {
    Rng rng(hash_combine(seed, 0x9CADull));
    std::vector<std::uint8_t> seen(total, 0);
    while (picks.size() < static_cast<std::size_t>(samples)) {
      const std::size_t idx = static_cast<std::size_t>(rng.next_below(total));
      if (seen[idx]) continue;
      seen[idx] = 1;
      picks.push_back(idx);
    }
    std::sort(picks.begin(), picks.end());
  }

  auto locate = [](std::span<const ParamBlock> blocks, std::size_t flat)
      -> std::pair<std::size_t, std::size_t> {
    std::size_t b = 0;
    while (flat >= blocks[b].size) {
      flat -= blocks[b].size;
      ++b;
    }
    return {b, flat};
  };

  std::vector<std::pair<double, double>> pairs;  // (analytic, numeric)
  pairs.reserve(picks.size());
  double scale = 0.0;
  for (std::size_t flat : picks) {
    const auto [b, off] = locate({params.data(), params.size()}, flat);
    double& theta = params[b].values[off];
    const double saved = theta;
    const double h = 1e-6 * std::max(1.0, std::abs(saved));
    theta = saved + h;
    const double f_plus = loss();
    theta = saved - h;
    const double f_minus = loss();
    theta = saved;
    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const auto [ab, aoff] = locate(analytic, flat);
    pairs.emplace_back(analytic[ab].values[aoff], numeric);
    scale = std::max({scale, std::abs(numeric), std::abs(pairs.back().first)});
  }
  // Coordinates far below the group's gradient scale are judged against that
  // scale; finite differences cannot resolve them beyond it.
  const double floor = std::max(1e-10, 3e-3 * scale);
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const auto [exact, numeric] = pairs[i];
    const double rel = std::abs(exact - numeric) / std::max(std::abs(numeric), floor);
    report.entries.push_back(GradCheckEntry{group_name, picks[i], exact, numeric, rel});
    report.max_rel_err = std::max(report.max_rel_err, rel);
  }
  std::sort(report.entries.begin(), report.entries.end(),
            [](const GradCheckEntry& a, const GradCheckEntry& b) {
              return a.rel_err > b.rel_err;
            });
  if (report.entries.size() > 10) report.entries.resize(10);
  return report;
}

}  // namespace tpc
