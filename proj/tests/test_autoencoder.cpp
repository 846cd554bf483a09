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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tpc/errors.hpp"
#include "tpc/plane_autoencoder.hpp"
#include "tpc/rng.hpp"
#include "tpc/trainer.hpp"

using namespace tpc;

TEST_CASE("encoder produces an R/8 latent") {
  const PlaneAutoencoder ae = make_plane_autoencoder(4, 0);
  const TriPlaneGrid grid = random_triplane(16, 4, 1);
  const TriPlaneGrid latent = encode_planes(grid, ae);
  CHECK(latent.resolution == 2);
  CHECK(latent.channels == 4);
  const TriPlaneGrid back = decode_planes(latent, ae);
  CHECK(back.resolution == 16);
  CHECK(back.channels == 4);
}

TEST_CASE("zero input with zero biases stays zero through both halves") {
  const PlaneAutoencoder ae = make_plane_autoencoder(2, 7);  // biases start at zero
  const TriPlaneGrid zero_grid = make_triplane(16, 2);
  const TriPlaneGrid latent = encode_planes(zero_grid, ae);
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < 2; ++c) CHECK(latent.planes[p][c].isZero(0.0));

  const TriPlaneGrid zero_latent = make_triplane(2, 2);
  const TriPlaneGrid out = decode_planes(zero_latent, ae);
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < 2; ++c) CHECK(out.planes[p][c].isZero(0.0));
}

TEST_CASE("encode and decode are pure functions") {
  const PlaneAutoencoder ae = make_plane_autoencoder(4, 3);
  const TriPlaneGrid grid = random_triplane(16, 4, 5);
  const TriPlaneGrid a = encode_planes(grid, ae);
  const TriPlaneGrid b = encode_planes(grid, ae);
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < 4; ++c) CHECK(a.planes[p][c] == b.planes[p][c]);
  const TriPlaneGrid da = decode_planes(a, ae);
  const TriPlaneGrid db = decode_planes(b, ae);
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < 4; ++c) CHECK(da.planes[p][c] == db.planes[p][c]);
}

TEST_CASE("shape mismatches are rejected") {
  const PlaneAutoencoder ae = make_plane_autoencoder(4, 0);
  CHECK_THROWS_AS(encode_planes(random_triplane(12, 4, 0), ae), ValidationError);
  CHECK_THROWS_AS(encode_planes(random_triplane(16, 2, 0), ae), ValidationError);
}

TEST_CASE("tri_rec_loss is the mean absolute difference") {
  const TriPlaneGrid a = random_triplane(8, 2, 11);
  CHECK(tri_rec_loss(a, a) == 0.0);

  TriPlaneGrid b = a;
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < 2; ++c) b.planes[p][c].array() += 1.0;
  CHECK(tri_rec_loss(a, b) == doctest::Approx(1.0).epsilon(1e-12));

  TriPlaneGrid one = a;
  one.planes[1][0](3, 5) += 3.0;
  CHECK(tri_rec_loss(a, one) ==
        doctest::Approx(3.0 / static_cast<double>(a.value_count())).epsilon(1e-12));

  CHECK_THROWS_AS(tri_rec_loss(a, random_triplane(16, 2, 0)), ValidationError);
}

TEST_CASE("forward caches reproduce the stateless entry points") {
  const PlaneAutoencoder ae = make_plane_autoencoder(2, 21);
  const TriPlaneGrid grid = random_triplane(16, 2, 22);
  TriPlaneGrid latent, rec;
  AeCache cache;
  autoencoder_forward(ae, grid, latent, rec, &cache, 2);
  const TriPlaneGrid latent2 = encode_planes(grid, ae);
  const TriPlaneGrid rec2 = decode_planes(latent2, ae);
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < 2; ++c) {
      CHECK(latent.planes[p][c] == latent2.planes[p][c]);
      CHECK(rec.planes[p][c] == rec2.planes[p][c]);
    }
}

TEST_CASE("autoencoder parameter gradients of tri_rec_loss match finite differences") {
  // Seed chosen so no finite-difference step straddles a ReLU or L1 kink
  // (the composition is piecewise linear, so clean seeds match exactly).
  const int channels = 2;
  TriPlaneGrid grid = random_triplane(8, channels, 40, 1.0);
  PlaneAutoencoder ae = make_plane_autoencoder(channels, 41);

  auto loss = [&]() {
    const TriPlaneGrid rec = decode_planes(encode_planes(grid, ae), ae);
    return tri_rec_loss(grid, rec);
  };

  TriPlaneGrid latent, rec;
  AeCache cache;
  autoencoder_forward(ae, grid, latent, rec, &cache, 1);
  TriPlaneGrid d_rec = make_triplane(8, channels);
  const double scale = 1.0 / static_cast<double>(grid.value_count());
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < channels; ++c)
      d_rec.planes[p][c] =
          scale * (rec.planes[p][c] - grid.planes[p][c]).array().sign().matrix();

  PlaneAutoencoder d_ae = zeros_like(ae);
  TriPlaneGrid d_grid = make_triplane(8, channels);
  autoencoder_backward(ae, cache, d_rec, d_ae, d_grid, 1);

  auto params = parameter_blocks(ae);
  auto grads = parameter_blocks(d_ae);
  const GradCheckReport report =
      grad_check(loss, params, std::vector<ParamBlock>(grads.begin(), grads.end()), 80, 5,
                 "autoencoder");
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("a short training run reduces reconstruction error below its start") {
  const int channels = 2;
  // Smooth target: a low-frequency bump pattern the bottleneck can represent.
  TriPlaneGrid grid = make_triplane(16, channels);
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < channels; ++c)
      for (int r = 0; r < 16; ++r)
        for (int col = 0; col < 16; ++col)
          grid.planes[p][c](r, col) =
              0.5 * std::sin(0.3 * r + p) * std::cos(0.4 * col + c);

  PlaneAutoencoder ae = make_plane_autoencoder(channels, 77);
  auto reconstruction = [&]() { return decode_planes(encode_planes(grid, ae), ae); };
  const double initial = tri_rec_loss(grid, reconstruction());

  auto params = parameter_blocks(ae);
  AdamState adam = make_adam(total_size(params));
  for (int step = 0; step < 250; ++step) {
    TriPlaneGrid latent, rec;
    AeCache cache;
    autoencoder_forward(ae, grid, latent, rec, &cache, 1);
    TriPlaneGrid d_rec = make_triplane(16, channels);
    const double scale = 1.0 / static_cast<double>(grid.value_count());
    for (int p = 0; p < 3; ++p)
      for (int c = 0; c < channels; ++c)
        d_rec.planes[p][c] =
            scale * (rec.planes[p][c] - grid.planes[p][c]).array().sign().matrix();
    PlaneAutoencoder d_ae = zeros_like(ae);
    TriPlaneGrid d_grid = make_triplane(16, channels);
    autoencoder_backward(ae, cache, d_rec, d_ae, d_grid, 1);
    auto grad_blocks = parameter_blocks(d_ae);
    adam_step(params, std::vector<ParamBlock>(grad_blocks.begin(), grad_blocks.end()),
              adam, 3e-3);
  }
  const double trained = tri_rec_loss(grid, reconstruction());
  CHECK(trained < initial);
  CHECK(trained < 0.5 * initial);
}

TEST_CASE("latent plus decoder storage is far below raw plane storage") {
  for (auto [resolution, channels] : {std::pair{64, 8}, std::pair{128, 16}}) {
    const PlaneAutoencoder ae = make_plane_autoencoder(channels, 0);
    const Eigen::Index raw = 3ll * resolution * resolution * channels;
    const Eigen::Index latent =
        3ll * (resolution / 8) * (resolution / 8) * channels;
    const Eigen::Index stored = latent + ae.decoder_parameter_count();
    CHECK(stored * 4 <= raw);
  }
}
