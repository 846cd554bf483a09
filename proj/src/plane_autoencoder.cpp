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

#include "tpc/plane_autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "tpc/errors.hpp"
#include "tpc/parallel.hpp"
#include "tpc/rng.hpp"

namespace tpc {

namespace {

using StridedMap = Eigen::Map<const Eigen::MatrixXd, Eigen::Unaligned,
                              Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
using StridedMapMut =
    Eigen::Map<Eigen::MatrixXd, Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

StridedMap strided(const Eigen::MatrixXd& m, int r0, int c0, int rows, int cols, int step) {
  return StridedMap(m.data() + static_cast<std::ptrdiff_t>(c0) * m.rows() + r0, rows, cols,
                    Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(
                        static_cast<int>(m.rows()) * step, step));
}

StridedMapMut strided_mut(Eigen::MatrixXd& m, int r0, int c0, int rows, int cols, int step) {
  return StridedMapMut(m.data() + static_cast<std::ptrdiff_t>(c0) * m.rows() + r0, rows, cols,
                       Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(
                           static_cast<int>(m.rows()) * step, step));
}

// Output index range such that stride*y + delta stays inside [0, extent).
void conv_range(int stride, int delta, int extent, int out_extent, int* lo, int* hi) {
  *lo = delta < 0 ? 1 : 0;
  *hi = std::min(out_extent - 1, (extent - 1 - delta) / stride);
}

ConvLayer make_conv(int in_channels, int out_channels, int stride) {
  ConvLayer layer;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.stride = stride;
  layer.kernels.assign(static_cast<std::size_t>(in_channels) * out_channels,
                       Eigen::Matrix3d::Zero());
  layer.bias = Eigen::VectorXd::Zero(out_channels);
  return layer;
}

void init_conv(ConvLayer& layer, Rng& rng) {
  const double bound = 1.0 / std::sqrt(9.0 * layer.in_channels);
  for (int oc = 0; oc < layer.out_channels; ++oc)
    for (int ic = 0; ic < layer.in_channels; ++ic)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) layer.kernel(oc, ic)(r, c) = bound * rng.next_symmetric();
}

}  // namespace

PlaneAutoencoder make_plane_autoencoder(int channels, std::uint64_t seed) {
  if (channels < 1) throw ValidationError("autoencoder channel count must be >= 1");
  PlaneAutoencoder ae;
  ae.channels = channels;
  const int wide = 2 * channels;
  ae.encoder = {make_conv(channels, wide, 2), make_conv(wide, wide, 2),
                make_conv(wide, channels, 2)};
  ae.decoder = {make_conv(channels, wide, 1), make_conv(wide, wide, 1),
                make_conv(wide, channels, 1)};
  Rng rng(hash_combine(seed, 0xAE0ull));
  for (auto& layer : ae.encoder) init_conv(layer, rng);
  for (auto& layer : ae.decoder) init_conv(layer, rng);
  return ae;
}

PlaneAutoencoder zeros_like(const PlaneAutoencoder& ae) {
  PlaneAutoencoder z = ae;
  set_zero(z);
  return z;
}

void set_zero(PlaneAutoencoder& ae) {
  for (auto* half : {&ae.encoder, &ae.decoder})
    for (auto& layer : *half) {
      for (auto& k : layer.kernels) k.setZero();
      layer.bias.setZero();
    }
}

PlaneImage conv_forward(const ConvLayer& layer, const PlaneImage& input, bool relu) {
  if (static_cast<int>(input.size()) != layer.in_channels)
    throw ValidationError("conv input channel mismatch");
  const int in_extent = static_cast<int>(input[0].rows());
  if (layer.stride == 2 && in_extent % 2 != 0)
    throw ValidationError("stride-2 conv needs an even extent");
  const int out_extent = layer.stride == 2 ? in_extent / 2 : in_extent;

  PlaneImage out(layer.out_channels);
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    Eigen::MatrixXd& dst = out[oc];
    dst = Eigen::MatrixXd::Constant(out_extent, out_extent, layer.bias(oc));
    for (int ic = 0; ic < layer.in_channels; ++ic) {
      const Eigen::MatrixXd& src = input[ic];
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double w = layer.kernel(oc, ic)(ky, kx);
          const int dy = ky - 1, dx = kx - 1;
          int y0, y1, x0, x1;
          conv_range(layer.stride, dy, in_extent, out_extent, &y0, &y1);
          conv_range(layer.stride, dx, in_extent, out_extent, &x0, &x1);
          if (y1 < y0 || x1 < x0) continue;
          const int rows = y1 - y0 + 1, cols = x1 - x0 + 1;
          dst.block(y0, x0, rows, cols) +=
              w * strided(src, layer.stride * y0 + dy, layer.stride * x0 + dx, rows, cols,
                          layer.stride);
        }
      }
    }
    if (relu) dst = dst.cwiseMax(0.0);
  }
  return out;
}

void conv_backward(const ConvLayer& layer, const PlaneImage& input,
                   const PlaneImage& output, const PlaneImage& d_output, bool relu,
                   PlaneImage* d_input, ConvLayer* d_layer) {
  const int in_extent = static_cast<int>(input[0].rows());
  const int out_extent = layer.stride == 2 ? in_extent / 2 : in_extent;

  // ReLU: gradient passes only where the stored post-activation is positive.
  PlaneImage masked(layer.out_channels);
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    if (relu)
      masked[oc] = d_output[oc].cwiseProduct((output[oc].array() > 0.0).cast<double>().matrix());
    else
      masked[oc] = d_output[oc];
  }

  if (d_layer != nullptr) {
    for (int oc = 0; oc < layer.out_channels; ++oc) {
      d_layer->bias(oc) += masked[oc].sum();
      for (int ic = 0; ic < layer.in_channels; ++ic) {
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const int dy = ky - 1, dx = kx - 1;
            int y0, y1, x0, x1;
            conv_range(layer.stride, dy, in_extent, out_extent, &y0, &y1);
            conv_range(layer.stride, dx, in_extent, out_extent, &x0, &x1);
            if (y1 < y0 || x1 < x0) continue;
            const int rows = y1 - y0 + 1, cols = x1 - x0 + 1;
            d_layer->kernel(oc, ic)(ky, kx) +=
                masked[oc]
                    .block(y0, x0, rows, cols)
                    .cwiseProduct(strided(input[ic], layer.stride * y0 + dy,
                                          layer.stride * x0 + dx, rows, cols, layer.stride))
                    .sum();
          }
        }
      }
    }
  }

  if (d_input != nullptr) {
    d_input->assign(static_cast<std::size_t>(layer.in_channels),
                    Eigen::MatrixXd::Zero(in_extent, in_extent));
    for (int ic = 0; ic < layer.in_channels; ++ic) {
      Eigen::MatrixXd& dst = (*d_input)[ic];
      for (int oc = 0; oc < layer.out_channels; ++oc) {
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const double w = layer.kernel(oc, ic)(ky, kx);
            const int dy = ky - 1, dx = kx - 1;
            int y0, y1, x0, x1;
            conv_range(layer.stride, dy, in_extent, out_extent, &y0, &y1);
            conv_range(layer.stride, dx, in_extent, out_extent, &x0, &x1);
            if (y1 < y0 || x1 < x0) continue;
            const int rows = y1 - y0 + 1, cols = x1 - x0 + 1;
            strided_mut(dst, layer.stride * y0 + dy, layer.stride * x0 + dx, rows, cols,
                        layer.stride) += w * masked[oc].block(y0, x0, rows, cols);
          }
        }
      }
    }
  }
}

PlaneImage upsample2(const PlaneImage& input) {
  PlaneImage out(input.size());
  for (std::size_t c = 0; c < input.size(); ++c) {
    const int h = static_cast<int>(input[c].rows());
    out[c].resize(2 * h, 2 * h);
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) strided_mut(out[c], dy, dx, h, h, 2) = input[c];
  }
  return out;
}

void upsample2_backward(const PlaneImage& d_up, PlaneImage& d_input) {
  d_input.resize(d_up.size());
  for (std::size_t c = 0; c < d_up.size(); ++c) {
    const int h = static_cast<int>(d_up[c].rows()) / 2;
    d_input[c] = Eigen::MatrixXd::Zero(h, h);
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) d_input[c] += strided(d_up[c], dy, dx, h, h, 2);
  }
}

namespace {

void check_encode_shapes(const TriPlaneGrid& grid, const PlaneAutoencoder& ae) {
  if (grid.channels != ae.channels) throw ValidationError("autoencoder channel mismatch");
  if (grid.resolution % 8 != 0)
    throw ValidationError("tri-plane resolution must be divisible by 8");
}

void forward_one_plane(const PlaneAutoencoder& ae, const PlaneImage& plane,
                       AePlaneCache& cache) {
  cache.enc_in[0] = plane;
  cache.enc_out[0] = conv_forward(ae.encoder[0], cache.enc_in[0], true);
  cache.enc_in[1] = cache.enc_out[0];
  cache.enc_out[1] = conv_forward(ae.encoder[1], cache.enc_in[1], true);
  cache.enc_in[2] = cache.enc_out[1];
  cache.enc_out[2] = conv_forward(ae.encoder[2], cache.enc_in[2], false);

  cache.dec_in[0] = upsample2(cache.enc_out[2]);
  cache.dec_out[0] = conv_forward(ae.decoder[0], cache.dec_in[0], true);
  cache.dec_in[1] = upsample2(cache.dec_out[0]);
  cache.dec_out[1] = conv_forward(ae.decoder[1], cache.dec_in[1], true);
  cache.dec_in[2] = upsample2(cache.dec_out[1]);
  cache.dec_out[2] = conv_forward(ae.decoder[2], cache.dec_in[2], false);
}

}  // namespace

void autoencoder_forward(const PlaneAutoencoder& ae, const TriPlaneGrid& grid,
                         TriPlaneGrid& latent, TriPlaneGrid& reconstruction,
                         AeCache* cache, int threads) {
  check_encode_shapes(grid, ae);
  latent = make_triplane(grid.resolution / 8, grid.channels);
  reconstruction = make_triplane(grid.resolution, grid.channels);
  AeCache local;
  AeCache& store = cache != nullptr ? *cache : local;
  parallel_chunks(3, std::min(threads, 3), [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t p = begin; p < end; ++p) {
      forward_one_plane(ae, grid.planes[p], store.planes[p]);
      latent.planes[p] = store.planes[p].enc_out[2];
      reconstruction.planes[p] = store.planes[p].dec_out[2];
    }
  });
}

void autoencoder_backward(const PlaneAutoencoder& ae, const AeCache& cache,
                          const TriPlaneGrid& d_reconstruction, PlaneAutoencoder& d_ae,
                          TriPlaneGrid& d_grid, int threads) {
  std::array<PlaneAutoencoder, 3> partials{zeros_like(ae), zeros_like(ae), zeros_like(ae)};
  parallel_chunks(3, std::min(threads, 3), [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t p = begin; p < end; ++p) {
      const AePlaneCache& c = cache.planes[p];
      PlaneAutoencoder& grads = partials[p];

      PlaneImage d = d_reconstruction.planes[p];
      PlaneImage d_up, d_pre;
      conv_backward(ae.decoder[2], c.dec_in[2], c.dec_out[2], d, false, &d_up,
                    &grads.decoder[2]);
      upsample2_backward(d_up, d);
      conv_backward(ae.decoder[1], c.dec_in[1], c.dec_out[1], d, true, &d_up,
                    &grads.decoder[1]);
      upsample2_backward(d_up, d);
      conv_backward(ae.decoder[0], c.dec_in[0], c.dec_out[0], d, true, &d_up,
                    &grads.decoder[0]);
      upsample2_backward(d_up, d);  // now d = d(latent)

      conv_backward(ae.encoder[2], c.enc_in[2], c.enc_out[2], d, false, &d_pre,
                    &grads.encoder[2]);
      d = std::move(d_pre);
      d_pre.clear();
      conv_backward(ae.encoder[1], c.enc_in[1], c.enc_out[1], d, true, &d_pre,
                    &grads.encoder[1]);
      d = std::move(d_pre);
      d_pre.clear();
      conv_backward(ae.encoder[0], c.enc_in[0], c.enc_out[0], d, true, &d_pre,
                    &grads.encoder[0]);
      for (int ch = 0; ch < d_grid.channels; ++ch) d_grid.planes[p][ch] += d_pre[ch];
    }
  });
  // Merge per-plane parameter gradients in plane order.
  for (const PlaneAutoencoder& part : partials) {
    for (int half = 0; half < 2; ++half) {
      const auto& src = half == 0 ? part.encoder : part.decoder;
      auto& dst = half == 0 ? d_ae.encoder : d_ae.decoder;
      for (int l = 0; l < 3; ++l) {
        for (std::size_t k = 0; k < src[l].kernels.size(); ++k)
          dst[l].kernels[k] += src[l].kernels[k];
        dst[l].bias += src[l].bias;
      }
    }
  }
}

TriPlaneGrid encode_planes(const TriPlaneGrid& grid, const PlaneAutoencoder& ae) {
  check_encode_shapes(grid, ae);
  TriPlaneGrid latent = make_triplane(grid.resolution / 8, grid.channels);
  for (int p = 0; p < 3; ++p) {
    PlaneImage x = conv_forward(ae.encoder[0], grid.planes[p], true);
    x = conv_forward(ae.encoder[1], x, true);
    latent.planes[p] = conv_forward(ae.encoder[2], x, false);
  }
  return latent;
}

TriPlaneGrid decode_planes(const TriPlaneGrid& latent, const PlaneAutoencoder& ae) {
  if (latent.channels != ae.channels) throw ValidationError("autoencoder channel mismatch");
  TriPlaneGrid out = make_triplane(latent.resolution * 8, latent.channels);
  for (int p = 0; p < 3; ++p) {
    PlaneImage x = conv_forward(ae.decoder[0], upsample2(latent.planes[p]), true);
    x = conv_forward(ae.decoder[1], upsample2(x), true);
    out.planes[p] = conv_forward(ae.decoder[2], upsample2(x), false);
  }
  return out;
}

double tri_rec_loss(const TriPlaneGrid& original, const TriPlaneGrid& reconstructed) {
  if (original.resolution != reconstructed.resolution ||
      original.channels != reconstructed.channels)
    throw ValidationError("tri_rec_loss shape mismatch");
  double total = 0.0;
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < original.channels; ++c)
      total += (original.planes[p][c] - reconstructed.planes[p][c]).cwiseAbs().sum();
  return total / static_cast<double>(original.value_count());
}

}  // namespace tpc
