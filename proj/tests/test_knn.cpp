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

#include "tpc/errors.hpp"
#include "tpc/knn.hpp"
#include "tpc/rng.hpp"

using namespace tpc;

namespace {

Eigen::Matrix<double, Eigen::Dynamic, 3> random_points(std::uint64_t seed, Eigen::Index n) {
  Rng rng(seed);
  Eigen::Matrix<double, Eigen::Dynamic, 3> p(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) p(i, a) = rng.next_symmetric();
  return p;
}

}  // namespace

TEST_CASE("collinear points are returned in distance order") {
  Eigen::Matrix<double, Eigen::Dynamic, 3> p(5, 3);
  for (int i = 0; i < 5; ++i) p.row(i) << static_cast<double>(i), 0.0, 0.0;
  const KnnIndex index(p);
  const auto nn = index.query(0, 2);
  REQUIRE(nn.size() == 2);
  CHECK(nn[0] == 1);
  CHECK(nn[1] == 2);
}

TEST_CASE("a single-point index returns empty neighbor lists") {
  const KnnIndex index(random_points(1, 1));
  CHECK(index.query(0, 4).empty());
}

TEST_CASE("queries never include the anchor itself") {
  const auto p = random_points(3, 64);
  const KnnIndex index(p);
  for (Eigen::Index i = 0; i < 64; ++i)
    for (Eigen::Index nb : index.query(i, 8)) CHECK(nb != i);
}

TEST_CASE("index matches brute force on random clouds") {
  const auto p = random_points(17, 500);
  const KnnIndex index(p);
  for (Eigen::Index i = 0; i < 500; ++i) {
    const auto expected = knn_brute_force(p, i, 4);
    CHECK(index.query(i, 4) == expected);
  }
}

TEST_CASE("ties between duplicate positions break toward the smaller index") {
  Eigen::Matrix<double, Eigen::Dynamic, 3> p(6, 3);
  p.row(0) << 0, 0, 0;
  p.row(1) << 1, 0, 0;  // duplicates at distance 1
  p.row(2) << 1, 0, 0;
  p.row(3) << 1, 0, 0;
  p.row(4) << 0, 2, 0;
  p.row(5) << 0, 0, 3;
  const KnnIndex index(p);
  const auto nn = index.query(0, 4);
  REQUIRE(nn.size() == 4);
  CHECK(nn[0] == 1);
  CHECK(nn[1] == 2);
  CHECK(nn[2] == 3);
  CHECK(nn[3] == 4);
  CHECK(index.query(0, 4) == knn_brute_force(p, 0, 4));
}

TEST_CASE("heavily duplicated clouds still match brute force") {
  Rng rng(5);
  Eigen::Matrix<double, Eigen::Dynamic, 3> p(200, 3);
  for (Eigen::Index i = 0; i < 200; ++i) {
    // Snap to a coarse lattice to force many exact ties.
    for (int a = 0; a < 3; ++a)
      p(i, a) = static_cast<double>(rng.next_below(4)) * 0.5;
  }
  const KnnIndex index(p);
  for (Eigen::Index i = 0; i < 200; ++i)
    for (int k : {1, 4, 8}) CHECK(index.query(i, k) == knn_brute_force(p, i, k));
}

TEST_CASE("out-of-range queries are rejected") {
  const KnnIndex index(random_points(9, 10));
  CHECK_THROWS_AS(index.query(10, 2), ValidationError);
  CHECK_THROWS_AS(index.query(-1, 2), ValidationError);
}
