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
#include <array>
#include <cstdint>
#include <vector>

#include "tpc/triplane.hpp"

namespace tpc {

// 3x3 convolution, zero padding 1, stride 1 or 2.
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  std::vector<Eigen::Matrix3d> kernels;  // out-major: kernels[oc * in_channels + ic]
  Eigen::VectorXd bias;

  Eigen::Matrix3d& kernel(int oc, int ic) { return kernels[oc * in_channels + ic]; }
  const Eigen::Matrix3d& kernel(int oc, int ic) const {
    return kernels[oc * in_channels + ic];
  }
  Eigen::Index parameter_count() const {
    return 9ll * in_channels * out_channels + out_channels;
  }
};

// Plane compressor: three stride-2 convolutions down to an (R/8)^2 latent,
// mirrored by three (nearest-neighbor 2x upsample + convolution) stages.
// Channel widths C -> 2C -> 2C -> C; ReLU after the first two layers of each
// half, final layers linear.
struct PlaneAutoencoder {
  std::array<ConvLayer, 3> encoder;
  std::array<ConvLayer, 3> decoder;
  int channels = 0;

  Eigen::Index decoder_parameter_count() const {
    return decoder[0].parameter_count() + decoder[1].parameter_count() +
           decoder[2].parameter_count();
  }
};

PlaneAutoencoder make_plane_autoencoder(int channels, std::uint64_t seed);
PlaneAutoencoder zeros_like(const PlaneAutoencoder& ae);
void set_zero(PlaneAutoencoder& ae);

PlaneImage conv_forward(const ConvLayer& layer, const PlaneImage& input, bool relu);
PlaneImage upsample2(const PlaneImage& input);

// d_input may be null when the input gradient is not needed (first encoder
// layer in isolation). Parameter gradients accumulate into d_layer.
void conv_backward(const ConvLayer& layer, const PlaneImage& input,
                   const PlaneImage& output, const PlaneImage& d_output, bool relu,
                   PlaneImage* d_input, ConvLayer* d_layer);
void upsample2_backward(const PlaneImage& d_up, PlaneImage& d_input);

// Whole-grid forward with cached activations for the backward pass.
struct AePlaneCache {
  std::array<PlaneImage, 3> enc_in;   // input of each encoder conv
  std::array<PlaneImage, 3> enc_out;  // post-activation output
  std::array<PlaneImage, 3> dec_in;   // post-upsample input of each decoder conv
  std::array<PlaneImage, 3> dec_out;
};

struct AeCache {
  std::array<AePlaneCache, 3> planes;
};

void autoencoder_forward(const PlaneAutoencoder& ae, const TriPlaneGrid& grid,
                         TriPlaneGrid& latent, TriPlaneGrid& reconstruction,
                         AeCache* cache, int threads = 1);

// Backward through decoder then encoder. Accumulates parameter gradients into
// d_ae and the chained input gradient into d_grid.
void autoencoder_backward(const PlaneAutoencoder& ae, const AeCache& cache,
                          const TriPlaneGrid& d_reconstruction, PlaneAutoencoder& d_ae,
                          TriPlaneGrid& d_grid, int threads = 1);

// Stateless entry points used by the codec.
TriPlaneGrid encode_planes(const TriPlaneGrid& grid, const PlaneAutoencoder& ae);
TriPlaneGrid decode_planes(const TriPlaneGrid& latent, const PlaneAutoencoder& ae);

// Mean absolute difference over all plane entries.
double tri_rec_loss(const TriPlaneGrid& original, const TriPlaneGrid& reconstructed);

}  // namespace tpc
