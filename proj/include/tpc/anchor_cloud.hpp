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

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>

namespace tpc {

inline constexpr int kFeatureDim = 32;

// A cloud of anchors. Each anchor carries a position, a 32-d context feature,
// a 3-d scaling factor, and k 3-d offsets. Attribute math runs in fp64; the
// file format stores fp32. Immutable by convention once built: nothing in the
// library mutates a cloud it did not create.
struct AnchorCloud {
  Eigen::Matrix<double, Eigen::Dynamic, 3> positions;  // N x 3, scene units
  Eigen::MatrixXd features;                            // N x 32
  Eigen::Matrix<double, Eigen::Dynamic, 3> scalings;   // N x 3
  Eigen::MatrixXd offsets;                             // N x 3k, slot-major (slot*3 + axis)
  int offsets_per_anchor = 0;                          // k

  Eigen::Index anchor_count() const { return positions.rows(); }
  int attribute_dims() const { return kFeatureDim + 3 + 3 * offsets_per_anchor; }
};

// Throws ValidationError on shape mismatch, empty cloud, or non-finite values.
void validate_cloud(const AnchorCloud& cloud);

// Binary format: magic "TCGA", u32 version=1, u64 N, u32 k, u32 reserved;
// then N records of little-endian fp32: position(3), feature(32), scaling(3),
// offsets(3k). No padding.
AnchorCloud load_anchor_cloud(const std::filesystem::path& path);
void save_anchor_cloud(const AnchorCloud& cloud, const std::filesystem::path& path);

// Synthetic test cloud: positions uniform in [-1,1]^3, every attribute channel
// a sum of 12 random sinusoids with wavelength >= corr_len plus small i.i.d.
// noise. Pure function of (seed, n, corr_len).
AnchorCloud synth_correlated_cloud(std::uint64_t seed, Eigen::Index n, double corr_len,
                                   int offsets_per_anchor = 4);

// Amplitude constants for synth_correlated_cloud, exposed so tests can reason
// about channel statistics.
inline constexpr double kSynthFieldAmplitude = 1.0;
inline constexpr double kSynthNoiseHalfWidth = 0.0346410161513775;  // std 0.02

struct SceneBounds {
  Eigen::Vector3d center;
  double radius = 0.0;
};

// center = midpoint of the axis-aligned bounding box; radius = min(half the
// box diagonal, 3x the median anchor distance from center), floored at the
// smallest positive double so degenerate clouds stay usable.
SceneBounds scene_bounds(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions);
SceneBounds scene_bounds(const AnchorCloud& cloud);

}  // namespace tpc
