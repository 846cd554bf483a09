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
#include "tpc/rng.hpp"
#include "tpc/wavelet.hpp"

using namespace tpc;

namespace {

Image random_image(std::uint64_t seed, int h, int w, int channels = 1) {
  Rng rng(seed);
  Image img(static_cast<std::size_t>(channels));
  for (auto& ch : img) {
    ch.resize(h, w);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) ch(r, c) = rng.next_symmetric();
  }
  return img;
}

double image_energy(const Image& img) {
  double e = 0.0;
  for (const auto& ch : img) e += ch.squaredNorm();
  return e;
}

double pyramid_energy(const WaveletPyramid& pyr) {
  double e = 0.0;
  for (const auto& ch : pyr.low) e += ch.squaredNorm();
  for (const auto& level : pyr.high)
    for (const Image* band : {&level.detail_cols, &level.detail_rows, &level.detail_both})
      for (const auto& ch : *band) e += ch.squaredNorm();
  return e;
}

double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    m = std::max(m, (a[c] - b[c]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("a constant image has zero detail and a 4c approximation band") {
  Image img(1);
  img[0] = Eigen::MatrixXd::Constant(8, 8, 0.75);
  const WaveletPyramid pyr = dwt2(img, 2);
  for (const auto& level : pyr.high)
    for (const Image* band : {&level.detail_cols, &level.detail_rows, &level.detail_both})
      for (const auto& ch : *band) CHECK(ch.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(pyr.low[0].rows() == 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      CHECK(pyr.low[0](r, c) == doctest::Approx(4.0 * 0.75).epsilon(1e-12));
}

TEST_CASE("single-level transform of the all-ones 2x2 image") {
  Image img(1);
  img[0] = Eigen::MatrixXd::Ones(2, 2);
  const WaveletPyramid pyr = dwt2(img, 1);
  CHECK(pyr.low[0](0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(pyr.high[0].detail_cols[0](0, 0) == 0.0);
  CHECK(pyr.high[0].detail_rows[0](0, 0) == 0.0);
  CHECK(pyr.high[0].detail_both[0](0, 0) == 0.0);
}

TEST_CASE("two-level transform reconstructs perfectly") {
  for (int seed = 0; seed < 10; ++seed) {
    const Image img = random_image(seed, 8, 8, 2);
    CHECK(max_abs_diff(idwt2(dwt2(img, 2)), img) < 1e-9);
  }
  const Image big = random_image(99, 32, 32, 3);
  CHECK(max_abs_diff(idwt2(dwt2(big, 2)), big) < 1e-9);
}

TEST_CASE("the orthonormal transform preserves energy") {
  for (int seed = 0; seed < 5; ++seed) {
    const Image img = random_image(100 + seed, 32, 32, 1);
    const WaveletPyramid pyr = dwt2(img, 2);
    CHECK(std::abs(pyramid_energy(pyr) - image_energy(img)) < 1e-9);
  }
}

TEST_CASE("zero pyramids and scaling behave linearly") {
  const Image img = random_image(7, 8, 8, 1);
  WaveletPyramid pyr = dwt2(img, 2);

  WaveletPyramid zero = pyr;
  zero.low[0].setZero();
  for (auto& level : zero.high)
    for (Image* band : {&level.detail_cols, &level.detail_rows, &level.detail_both})
      (*band)[0].setZero();
  CHECK(image_energy(idwt2(zero)) == 0.0);

  WaveletPyramid scaled = pyr;
  scaled.low[0] *= 3.0;
  for (auto& level : scaled.high)
    for (Image* band : {&level.detail_cols, &level.detail_rows, &level.detail_both})
      (*band)[0] *= 3.0;
  Image tripled = idwt2(pyr);
  for (auto& ch : tripled) ch *= 3.0;
  CHECK(max_abs_diff(idwt2(scaled), tripled) < 1e-12);
}

TEST_CASE("indivisible dimensions are rejected") {
  CHECK_THROWS_AS(dwt2(random_image(1, 6, 8, 1), 2), ValidationError);
  CHECK_THROWS_AS(dwt2(random_image(1, 8, 10, 1), 2), ValidationError);
  CHECK_NOTHROW(dwt2(random_image(1, 6, 8, 1), 1));
}

TEST_CASE("the schedule interpolates linearly and clamps") {
  WaveletSchedule sched;
  sched.l1_start = 1.0;
  sched.l1_end = 0.2;
  sched.l2_start = 0.0;
  sched.l2_end = 0.8;
  sched.total_steps = 100;
  CHECK(lambda_schedule(0, sched) == std::pair{1.0, 0.0});
  CHECK(lambda_schedule(100, sched).first == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(lambda_schedule(100, sched).second == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(lambda_schedule(50, sched).first == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(lambda_schedule(50, sched).second == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(lambda_schedule(1000, sched) == lambda_schedule(100, sched));
}

TEST_CASE("the default schedule moves weight toward high frequencies") {
  WaveletSchedule sched;
  sched.total_steps = 64;
  double prev = -1.0;
  for (long step = 0; step <= 64; ++step) {
    const auto [l1, l2] = lambda_schedule(step, sched);
    CHECK(l2 >= prev);
    prev = l2;
    CHECK(l1 >= 0.0);
  }
}

TEST_CASE("wavelet loss vanishes on identical images") {
  const Image img = random_image(11, 16, 16, 2);
  WaveletSchedule sched;
  sched.total_steps = 10;
  CHECK(wavelet_loss(img, img, 3, sched) == 0.0);
}

TEST_CASE("constant offsets live entirely in the low band") {
  const Image a = random_image(12, 16, 16, 1);
  Image b = a;
  b[0].array() += 0.37;
  WaveletSchedule sched;
  sched.l1_start = 0.0;
  sched.l1_end = 0.0;  // high-frequency term only
  sched.l2_start = 1.0;
  sched.l2_end = 1.0;
  sched.total_steps = 10;
  CHECK(wavelet_loss(a, b, 0, sched) < 1e-12);

  const WaveletLossBreakdown d = wavelet_loss_breakdown(a, b, 0, sched);
  CHECK(d.high_term < 1e-12);
  CHECK(d.low_term > 0.1);
}

TEST_CASE("fine-detail differences weigh more under the high-frequency lambda") {
  // Checkerboard detail difference: pure high-frequency content.
  Image a(1), b(1);
  a[0] = Eigen::MatrixXd::Zero(16, 16);
  b[0] = a[0];
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) b[0](r, c) += ((r + c) % 2 == 0 ? 0.1 : -0.1);

  WaveletSchedule low_only{1.0, 1.0, 0.0, 0.0, 10};
  WaveletSchedule high_only{0.0, 0.0, 1.0, 1.0, 10};
  CHECK(wavelet_loss(a, b, 0, high_only) > wavelet_loss(a, b, 0, low_only));
  CHECK(wavelet_loss(a, b, 0, low_only) < 1e-12);
}

TEST_CASE("wavelet loss is a pseudometric") {
  WaveletSchedule sched;
  sched.total_steps = 10;
  for (int seed = 0; seed < 10; ++seed) {
    const Image x = random_image(200 + seed, 8, 8, 1);
    const Image y = random_image(300 + seed, 8, 8, 1);
    const Image z = random_image(400 + seed, 8, 8, 1);
    const double xy = wavelet_loss(x, y, 5, sched);
    const double yx = wavelet_loss(y, x, 5, sched);
    const double yz = wavelet_loss(y, z, 5, sched);
    const double xz = wavelet_loss(x, z, 5, sched);
    CHECK(xy == doctest::Approx(yx).epsilon(1e-12));
    CHECK(xy >= 0.0);
    CHECK(xz <= xy + yz + 1e-12);
  }
}

TEST_CASE("wavelet loss validates shapes") {
  WaveletSchedule sched;
  CHECK_THROWS_AS(wavelet_loss(random_image(1, 8, 8, 1), random_image(2, 8, 8, 2), 0, sched),
                  ValidationError);
  CHECK_THROWS_AS(wavelet_loss(random_image(1, 8, 8, 1), random_image(2, 16, 16, 1), 0, sched),
                  ValidationError);
}
