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

#include <string>
#include <vector>

#include "tpc/anchor_cloud.hpp"
#include "tpc/container.hpp"
#include "tpc/context.hpp"
#include "tpc/trained_state.hpp"

namespace tpc {

struct SectionStats {
  std::string name;
  std::uint64_t bytes = 0;
  std::uint64_t symbols = 0;      // entropy-coded sections only
  double estimate_bits = 0.0;     // fp64 ideal codelength, hard rounding
};

struct CodecStats {
  std::vector<SectionStats> sections;
  std::uint64_t total_bytes = 0;
  std::uint64_t anchor_count = 0;
  double bits_per_anchor = 0.0;
  double attribute_estimate_bits = 0.0;
  std::uint64_t attribute_payload_bytes = 0;
};

// Everything the decoder derives before touching the attribute sections.
// The encoder codes against the exact same reconstruction, so both sides see
// bit-identical (mu, sigma).
struct CodingState {
  Eigen::Matrix<double, Eigen::Dynamic, 3> positions;  // dequantized survivors
  TriPlaneGrid planes;                                 // decoded latent
  DistributionModel model;
  std::vector<std::uint8_t> slot_mask;                 // survivor-major, k per anchor
  std::vector<Eigen::Index> survivor_map;              // survivor -> original anchor id
  ContractParams params;
  QuantConfig quant;
  int knn_k = 0;
  int offsets_per_anchor = 0;
  std::vector<GroupGaussians> gaussians;               // per survivor, pinned order
};

CodingState reconstruct_coding_state(const CompressedScene& scene, int threads = 1);

// 16 bits per axis over the survivor bounding box, stored raw.
struct QuantizedPositions {
  Eigen::Vector3d bbox_min, bbox_max;
  std::vector<std::uint16_t> codes;                    // anchor-major xyz
  Eigen::Matrix<double, Eigen::Dynamic, 3> dequantized;
};
QuantizedPositions quantize_positions(const Eigen::Matrix<double, Eigen::Dynamic, 3>& p);
double position_cell_size(const Eigen::Vector3d& bbox_min, const Eigen::Vector3d& bbox_max,
                          int axis);

CompressedScene compress_scene(const AnchorCloud& cloud, const TrainedState& state,
                               int threads = 1, CodecStats* stats = nullptr);

struct DecodedScene {
  AnchorCloud cloud;
  CodecStats stats;
  std::vector<Eigen::Index> survivor_map;
};

DecodedScene decompress_scene(const CompressedScene& scene, int threads = 1);

// Section payload helpers shared with the checkpoint writer.
std::vector<std::uint8_t> build_planes_section(const TriPlaneGrid& latent,
                                               const PlaneAutoencoder& ae);
std::vector<std::uint8_t> build_model_section(const DistributionModel& model);
void parse_planes_section(std::span<const std::uint8_t> bytes, TriPlaneGrid& latent,
                          std::array<ConvLayer, 3>& decoder);
DistributionModel parse_model_section(std::span<const std::uint8_t> bytes,
                                      int offsets_per_anchor);

CodecStats collect_stats(const CompressedScene& scene);

}  // namespace tpc
