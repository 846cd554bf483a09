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

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tpc/anchor_cloud.hpp"
#include "tpc/codec.hpp"
#include "tpc/context.hpp"
#include "tpc/trained_state.hpp"

namespace tpc {

struct LrSchedule {
  double start = 1e-3;
  double end = 1e-5;

  // Exponential interpolation, pinned to `end` at the final step.
  double at(long step, long total_steps) const;
};

struct TrainConfig {
  double lambda_e = 1.0;
  double lambda_m = 5e-4;
  double lambda_w = 0.0;
  double lambda_tc = 1.0;
  double epsilon = 0.0;  // 0 resolves to N * (38 + 3k)
  std::array<double, 3> fidelity_weights{1.0, 1.0, 1.0};

  long total_steps = 2000;
  double warmup_fraction = 0.1;  // phase 1: no noise, no masks, no autoencoder
  int batch_size = 256;
  std::uint64_t seed = 0;
  bool deterministic = true;
  int threads = 1;
  bool enable_masks = true;

  int knn_k = 4;
  int resolution = 64;
  int channels = 8;
  int hidden_dim = 96;
  QuantConfig quant;

  LrSchedule lr_grid{5e-3, 1e-5};
  LrSchedule lr_masks{1e-2, 1e-4};
  LrSchedule lr_model{1e-3, 1e-5};
  LrSchedule lr_ae{1e-3, 1e-5};

  void validate() const;
  double resolved_epsilon(Eigen::Index anchors, int offsets_per_anchor) const;
  long warmup_steps() const;
};

struct LossParts {
  double fidelity = 0.0;
  double entropy_bits = 0.0;  // raw bits, scaled to the full cloud
  double mask = 0.0;
  double tri_rec = 0.0;
  double wavelet = 0.0;
};

// L_fid + lambda_e/epsilon * L_entropy + lambda_m * L_m + lambda_w * L_wav +
// lambda_tc * L_tri_rec, with cfg.epsilon already resolved. Throws
// TrainingError naming the first non-finite component.
double total_loss(const LossParts& parts, const TrainConfig& cfg);

// Contiguous view of one parameter (or gradient) array.
struct ParamBlock {
  double* values = nullptr;
  std::size_t size = 0;
};

std::vector<ParamBlock> parameter_blocks(TriPlaneGrid& grid);
std::vector<ParamBlock> parameter_blocks(PlaneAutoencoder& ae);
std::vector<ParamBlock> parameter_blocks(DistributionModel& model);
std::vector<ParamBlock> parameter_blocks(MaskParams& masks);
std::size_t total_size(std::span<const ParamBlock> blocks);

// Bias-corrected adaptive-moment update (beta1 0.9, beta2 0.999, eps 1e-8).
struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;
};
AdamState make_adam(std::size_t size);
void adam_step(std::span<ParamBlock> params, std::span<const ParamBlock> grads,
               AdamState& state, double lr);

struct Grads {
  TriPlaneGrid grid;
  PlaneAutoencoder ae;
  DistributionModel model;
  MaskParams masks;
};
Grads make_grads(const TrainedState& state);
void set_zero(Grads& grads);

// The full training objective over a fixed cloud. Positions are quantized to
// the codec's 16-bit grid up front so training and coding see identical
// geometry; contexts, KNN and bilinear footprints are precomputed.
class TrainingObjective {
 public:
  TrainingObjective(const AnchorCloud& cloud, const TrainConfig& cfg);

  // Loss at `state` for training step `step`; batch choice and quantization
  // noise are pure functions of (cfg.seed, step). Fills grads when non-null.
  // soft_masks swaps the hard straight-through gates for their sigmoid
  // surrogates so finite differences are meaningful.
  LossParts evaluate(const TrainedState& state, long step, Grads* grads,
                     bool soft_masks = false) const;

  const AnchorCloud& coding_cloud() const { return cloud_; }
  const ContractParams& contract_parameters() const { return params_; }
  const TrainConfig& config() const { return cfg_; }
  bool phase2(long step) const { return step >= cfg_.warmup_steps(); }

 private:
  AnchorCloud cloud_;
  TrainConfig cfg_;
  ContractParams params_;
  KnnIndex index_;
  std::vector<ContextFootprint> footprints_;
  double epsilon_ = 1.0;
};

struct FitReport {
  std::vector<std::pair<long, double>> loss_history;
  double entropy_estimate_before = 0.0;  // hard-rounding analysis estimate, bits
  double entropy_estimate_after = 0.0;
  long warmup_steps = 0;
  double final_loss = 0.0;
};

struct OptimizerMoments {
  AdamState grid, ae, model, masks;
};

// Two-phase joint optimization; deterministic given (cloud, cfg) for a fixed
// thread count. Throws TrainingError on divergence, carrying the last finite
// state.
TrainedState fit(const AnchorCloud& cloud, const TrainConfig& cfg,
                 FitReport* report = nullptr, OptimizerMoments* moments = nullptr);

class TrainingDivergence : public TrainingError {
 public:
  TrainingDivergence(const std::string& what, std::shared_ptr<TrainedState> last_good)
      : TrainingError(what), last_good_state(std::move(last_good)) {}
  std::shared_ptr<TrainedState> last_good_state;
};

// Eq-4 codelength of the cloud under hard rounding, evaluated through the
// same reconstruction structure the codec uses (fp64 analysis variant).
double estimate_bits_hard(const AnchorCloud& cloud, const TrainedState& state,
                          int threads = 1);

// Context-free reference: one Gaussian per attribute dimension fitted to the
// dequantized symbols.
double baseline_bits_hard(const AnchorCloud& cloud, const QuantConfig& quant);

// Checkpoint container: codec sections (planes/model/masks) plus a
// training-only section with fp64 parameters and optimizer moments.
void save_checkpoint(const TrainedState& state, const OptimizerMoments* moments,
                     const std::filesystem::path& path);
TrainedState load_checkpoint(const std::filesystem::path& path,
                             OptimizerMoments* moments = nullptr);

struct GradCheckEntry {
  std::string group;
  std::size_t index = 0;
  double analytic = 0.0, numeric = 0.0, rel_err = 0.0;
};
struct GradCheckReport {
  double max_rel_err = 0.0;
  std::vector<GradCheckEntry> entries;
};

// Central differences with h = 1e-6 * max(1, |theta|) on `samples` random
// coordinates of the group; rel err = |analytic - numeric| / max(|numeric|,
// 1e-10).
GradCheckReport grad_check(const std::function<double()>& loss,
                           std::span<ParamBlock> params,
                           std::span<const ParamBlock> analytic, int samples,
                           std::uint64_t seed, const std::string& group_name);

}  // namespace tpc
