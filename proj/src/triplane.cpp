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

#include "tpc/triplane.hpp"

#include <algorithm>
#include <cmath>

#include "tpc/errors.hpp"
#include "tpc/rng.hpp"

namespace tpc {

TriPlaneGrid make_triplane(int resolution, int channels) {
  // Latent grids reuse this type and can be as small as 1x1; sampling
  // enforces resolution >= 2.
  if (resolution < 1) throw ValidationError("tri-plane resolution must be >= 1");
  if (channels < 1) throw ValidationError("tri-plane channel count must be >= 1");
  TriPlaneGrid grid;
  grid.resolution = resolution;
  grid.channels = channels;
  for (auto& plane : grid.planes) {
    plane.resize(channels);
    for (auto& image : plane) image = Eigen::MatrixXd::Zero(resolution, resolution);
  }
  return grid;
}

TriPlaneGrid random_triplane(int resolution, int channels, std::uint64_t seed,
                             double amplitude) {
  TriPlaneGrid grid = make_triplane(resolution, channels);
  Rng rng(hash_combine(seed, 0x791A7Eull));
  for (auto& plane : grid.planes)
    for (auto& image : plane)
      for (Eigen::Index r = 0; r < image.rows(); ++r)
        for (Eigen::Index c = 0; c < image.cols(); ++c)
          image(r, c) = amplitude * rng.next_symmetric();
  return grid;
}

void set_zero(TriPlaneGrid& grid) {
  for (auto& plane : grid.planes)
    for (auto& image : plane) image.setZero();
}

BilinearTap plane_tap(double a, double b, int resolution) {
  if (resolution < 2) throw ValidationError("sampling needs resolution >= 2");
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  const double t = a * (resolution - 1);
  const double u = b * (resolution - 1);
  BilinearTap tap;
  tap.row0 = std::min(static_cast<int>(t), resolution - 2);
  tap.col0 = std::min(static_cast<int>(u), resolution - 2);
  tap.frac_row = t - tap.row0;
  tap.frac_col = u - tap.col0;
  return tap;
}

std::array<BilinearTap, 3> triplane_taps(const Eigen::Vector3d& x,
                                         const ContractParams& params, int resolution) {
  const auto coords = project_to_planes(contract(x, params));
  std::array<BilinearTap, 3> taps;
  for (int p = 0; p < 3; ++p) taps[p] = plane_tap(coords[p].x(), coords[p].y(), resolution);
  return taps;
}

void sample_with_taps(const TriPlaneGrid& grid, const std::array<BilinearTap, 3>& taps,
                      double* out) {
  const int channels = grid.channels;
  for (int p = 0; p < 3; ++p) {
    const BilinearTap& t = taps[p];
    const double w00 = (1.0 - t.frac_row) * (1.0 - t.frac_col);
    const double w01 = (1.0 - t.frac_row) * t.frac_col;
    const double w10 = t.frac_row * (1.0 - t.frac_col);
    const double w11 = t.frac_row * t.frac_col;
    for (int c = 0; c < channels; ++c) {
      const Eigen::MatrixXd& img = grid.planes[p][c];
      out[p * channels + c] = w00 * img(t.row0, t.col0) + w01 * img(t.row0, t.col0 + 1) +
                              w10 * img(t.row0 + 1, t.col0) +
                              w11 * img(t.row0 + 1, t.col0 + 1);
    }
  }
}

Eigen::VectorXd sample_triplane(const TriPlaneGrid& grid, const Eigen::Vector3d& x,
                                const ContractParams& params) {
  Eigen::VectorXd out(3 * grid.channels);
  sample_with_taps(grid, triplane_taps(x, params, grid.resolution), out.data());
  return out;
}

void accumulate_tap_grad(const std::array<BilinearTap, 3>& taps, const double* upstream,
                         TriPlaneGrid& grad) {
  const int channels = grad.channels;
  for (int p = 0; p < 3; ++p) {
    const BilinearTap& t = taps[p];
    const double w00 = (1.0 - t.frac_row) * (1.0 - t.frac_col);
    const double w01 = (1.0 - t.frac_row) * t.frac_col;
    const double w10 = t.frac_row * (1.0 - t.frac_col);
    const double w11 = t.frac_row * t.frac_col;
    for (int c = 0; c < channels; ++c) {
      Eigen::MatrixXd& img = grad.planes[p][c];
      const double g = upstream[p * channels + c];
      img(t.row0, t.col0) += w00 * g;
      img(t.row0, t.col0 + 1) += w01 * g;
      img(t.row0 + 1, t.col0) += w10 * g;
      img(t.row0 + 1, t.col0 + 1) += w11 * g;
    }
  }
}

void sample_triplane_grad(const TriPlaneGrid& grid, const Eigen::Vector3d& x,
                          const ContractParams& params, const Eigen::VectorXd& upstream,
                          TriPlaneGrid& grad) {
  if (upstream.size() != 3 * grid.channels)
    throw ValidationError("upstream gradient must have 3C entries");
  if (grad.resolution != grid.resolution || grad.channels != grid.channels)
    throw ValidationError("gradient accumulator shape mismatch");
  accumulate_tap_grad(triplane_taps(x, params, grid.resolution), upstream.data(), grad);
}

}  // namespace tpc
