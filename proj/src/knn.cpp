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

#include "tpc/knn.hpp"

#include <algorithm>
#include <queue>
#include <utility>

#include "tpc/errors.hpp"

namespace tpc {

namespace {

constexpr int kLeafSize = 16;

using Candidate = std::pair<double, Eigen::Index>;  // (squared distance, index)

}  // namespace

KnnIndex::KnnIndex(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions)
    : positions_(positions) {
  if (positions_.rows() < 1) throw ValidationError("knn index needs at least one point");
  order_.resize(static_cast<std::size_t>(positions_.rows()));
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<Eigen::Index>(i);
  nodes_.reserve(2 * order_.size() / kLeafSize + 4);
  root_ = build(0, static_cast<int>(order_.size()));
}

int KnnIndex::build(int begin, int end) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  Eigen::Vector3d lo = positions_.row(order_[begin]);
  Eigen::Vector3d hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(positions_.row(order_[i]).transpose());
    hi = hi.cwiseMax(positions_.row(order_[i]).transpose());
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Eigen::Index a, Eigen::Index b) {
                     return positions_(a, axis) < positions_(b, axis);
                   });
  node.axis = axis;
  node.split = positions_(order_[mid], axis);
  nodes_.push_back(node);
  const int self = static_cast<int>(nodes_.size()) - 1;
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

std::vector<Eigen::Index> KnnIndex::query(Eigen::Index self, int k) const {
  if (self < 0 || self >= positions_.rows()) throw ValidationError("knn query out of range");
  const auto want = static_cast<std::size_t>(
      std::max<Eigen::Index>(0, std::min<Eigen::Index>(k, positions_.rows() - 1)));
  if (want == 0) return {};

  const Eigen::Vector3d target = positions_.row(self);
  std::vector<Candidate> heap;  // max-heap on (d2, index)
  heap.reserve(want + 1);

  // Recursive descent: near child first, far child only when the splitting
  // plane can still hold a closer (or equal-distance, smaller-index) point.
  auto visit = [&](auto&& visit_ref, int node_id) -> void {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const Eigen::Index idx = order_[i];
        if (idx == self) continue;
        const double d2 = (positions_.row(idx).transpose() - target).squaredNorm();
        Candidate cand{d2, idx};
        if (heap.size() < want) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double delta = target(node.axis) - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    visit_ref(visit_ref, near);
    if (heap.size() < want || delta * delta <= heap.front().first) visit_ref(visit_ref, far);
  };
  visit(visit, root_);

  std::sort(heap.begin(), heap.end());
  std::vector<Eigen::Index> result(heap.size());
  for (std::size_t i = 0; i < heap.size(); ++i) result[i] = heap[i].second;
  return result;
}

std::vector<Eigen::Index> knn_brute_force(
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions, Eigen::Index self, int k) {
  std::vector<Candidate> all;
  all.reserve(static_cast<std::size_t>(positions.rows()));
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    if (i == self) continue;
    all.emplace_back((positions.row(i) - positions.row(self)).squaredNorm(), i);
  }
  std::sort(all.begin(), all.end());
  const std::size_t want =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(0, k)), all.size());
  std::vector<Eigen::Index> result(want);
  for (std::size_t i = 0; i < want; ++i) result[i] = all[i].second;
  return result;
}

}  // namespace tpc
