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

#include "tpc/anchor_cloud.hpp"

namespace tpc {

struct ContractParams {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
};

inline ContractParams contract_params(const SceneBounds& bounds) {
  return ContractParams{bounds.center, bounds.radius};
}

// Radial scene contraction. Normalized coordinates u = (x - center)/radius
// are kept as-is inside the unit ball and squeezed onto the shell of radius
// (2 - 1/|u|) outside it, then the radius-2 ball is mapped affinely onto the
// unit cube. Total on finite inputs; output strictly inside (0,1)^3.
inline Eigen::Vector3d contract(const Eigen::Vector3d& x, const ContractParams& params) {
  Eigen::Vector3d u = (x - params.center) / params.radius;
  const double norm = u.norm();
  if (norm > 1.0) u *= (2.0 - 1.0 / norm) / norm;
  return (u.array() + 2.0) / 4.0;
}

// Plane coordinates in order xy, yz, xz.
inline std::array<Eigen::Vector2d, 3> project_to_planes(const Eigen::Vector3d& c) {
  return {Eigen::Vector2d(c.x(), c.y()), Eigen::Vector2d(c.y(), c.z()),
          Eigen::Vector2d(c.x(), c.z())};
}

}  // namespace tpc
