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
#include <vector>

namespace tpc {

// Exact k-nearest-neighbor index over anchor positions (kd-tree). Queries
// return indices sorted by nondecreasing Euclidean distance, ties broken by
// the smaller index, and never include the query anchor itself.
class KnnIndex {
 public:
  KnnIndex() = default;
  explicit KnnIndex(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions);

  std::vector<Eigen::Index> query(Eigen::Index self, int k) const;

  Eigen::Index size() const { return positions_.rows(); }

 private:
  struct Node {
    int axis = -1;          // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build(int begin, int end);

  Eigen::Matrix<double, Eigen::Dynamic, 3> positions_;
  std::vector<Node> nodes_;
  std::vector<Eigen::Index> order_;
  int root_ = -1;
};

// Brute-force reference used by tests.
std::vector<Eigen::Index> knn_brute_force(
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions, Eigen::Index self, int k);

}  // namespace tpc
