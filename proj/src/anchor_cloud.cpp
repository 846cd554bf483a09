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

#include "tpc/anchor_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tpc/errors.hpp"
#include "tpc/rng.hpp"
#include "tpc/serialize.hpp"

namespace tpc {

namespace {

constexpr std::uint32_t kCloudVersion = 1;

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

void validate_cloud(const AnchorCloud& cloud) {
  const Eigen::Index n = cloud.positions.rows();
  if (n < 1) throw ValidationError("anchor cloud must contain at least one anchor");
  if (cloud.offsets_per_anchor < 1) throw ValidationError("offsets_per_anchor must be >= 1");
  if (cloud.features.rows() != n || cloud.features.cols() != kFeatureDim)
    throw ValidationError("feature matrix must be N x 32");
  if (cloud.scalings.rows() != n) throw ValidationError("scaling matrix must be N x 3");
  if (cloud.offsets.rows() != n || cloud.offsets.cols() != 3 * cloud.offsets_per_anchor)
    throw ValidationError("offset matrix must be N x 3k");
  if (!cloud.positions.allFinite() || !all_finite(cloud.features) ||
      !cloud.scalings.allFinite() || !all_finite(cloud.offsets))
    throw ValidationError("anchor cloud contains non-finite values");
}

AnchorCloud load_anchor_cloud(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  ByteReader r({bytes.data(), bytes.size()});

  std::uint64_t n = 0;
  std::uint32_t k = 0;
  try {
    if (!r.expect_tag("TCGA")) throw FormatError("bad magic, not an anchor cloud file");
    const std::uint32_t version = r.u32();
    if (version != kCloudVersion) throw FormatError("unsupported anchor cloud version");
    n = r.u64();
    k = r.u32();
    r.u32();  // reserved
  } catch (const IoError&) {
    throw FormatError("malformed anchor cloud header");
  }
  if (n == 0 || k == 0) throw FormatError("anchor cloud header declares empty cloud");

  const std::size_t record_floats = 3 + kFeatureDim + 3 + 3 * static_cast<std::size_t>(k);
  const std::size_t expected = n * record_floats * 4;
  if (r.remaining() < expected) throw IoError("anchor cloud payload truncated");
  if (r.remaining() > expected) throw FormatError("anchor cloud has trailing bytes");

  AnchorCloud cloud;
  cloud.offsets_per_anchor = static_cast<int>(k);
  cloud.positions.resize(static_cast<Eigen::Index>(n), 3);
  cloud.features.resize(static_cast<Eigen::Index>(n), kFeatureDim);
  cloud.scalings.resize(static_cast<Eigen::Index>(n), 3);
  cloud.offsets.resize(static_cast<Eigen::Index>(n), 3 * static_cast<Eigen::Index>(k));

  for (Eigen::Index i = 0; i < cloud.positions.rows(); ++i) {
    for (int a = 0; a < 3; ++a) cloud.positions(i, a) = r.f32();
    for (int a = 0; a < kFeatureDim; ++a) cloud.features(i, a) = r.f32();
    for (int a = 0; a < 3; ++a) cloud.scalings(i, a) = r.f32();
    for (Eigen::Index a = 0; a < cloud.offsets.cols(); ++a) cloud.offsets(i, a) = r.f32();
  }
  validate_cloud(cloud);
  return cloud;
}

void save_anchor_cloud(const AnchorCloud& cloud, const std::filesystem::path& path) {
  validate_cloud(cloud);
  ByteWriter w;
  w.tag("TCGA");
  w.u32(kCloudVersion);
  w.u64(static_cast<std::uint64_t>(cloud.anchor_count()));
  w.u32(static_cast<std::uint32_t>(cloud.offsets_per_anchor));
  w.u32(0);
  for (Eigen::Index i = 0; i < cloud.anchor_count(); ++i) {
    for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(cloud.positions(i, a)));
    for (int a = 0; a < kFeatureDim; ++a) w.f32(static_cast<float>(cloud.features(i, a)));
    for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(cloud.scalings(i, a)));
    for (Eigen::Index a = 0; a < cloud.offsets.cols(); ++a)
      w.f32(static_cast<float>(cloud.offsets(i, a)));
  }
  write_file_bytes(path, w.data());
}

AnchorCloud synth_correlated_cloud(std::uint64_t seed, Eigen::Index n, double corr_len,
                                   int offsets_per_anchor) {
  if (n < 1) throw ValidationError("synth cloud needs n >= 1");
  if (!(corr_len > 0.0)) throw ValidationError("synth cloud needs corr_len > 0");
  if (offsets_per_anchor < 1) throw ValidationError("offsets_per_anchor must be >= 1");

  Rng rng(hash_combine(seed, 0x5C10Dull));

  AnchorCloud cloud;
  cloud.offsets_per_anchor = offsets_per_anchor;
  cloud.positions.resize(n, 3);
  cloud.features.resize(n, kFeatureDim);
  cloud.scalings.resize(n, 3);
  cloud.offsets.resize(n, 3 * offsets_per_anchor);

  for (Eigen::Index i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) cloud.positions(i, a) = rng.next_symmetric();

  constexpr int kWaves = 12;
  const int channels = cloud.attribute_dims();
  const double amp_scale = kSynthFieldAmplitude / std::sqrt(static_cast<double>(kWaves));

  for (int ch = 0; ch < channels; ++ch) {
    Eigen::Matrix<double, kWaves, 3> wave_vec;
    Eigen::Matrix<double, kWaves, 1> amp, phase;
    for (int m = 0; m < kWaves; ++m) {
      Eigen::Vector3d dir(rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric());
      if (dir.norm() < 1e-9) dir = Eigen::Vector3d(1, 0, 0);
      dir.normalize();
      // Wavelengths uniform in [corr_len, 4 corr_len].
      const double wavelength = corr_len * rng.next_range(1.0, 4.0);
      wave_vec.row(m) = dir.transpose() * (2.0 * M_PI / wavelength);
      amp(m) = amp_scale * rng.next_symmetric();
      phase(m) = rng.next_range(0.0, 2.0 * M_PI);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = 0.0;
      for (int m = 0; m < kWaves; ++m)
        v += amp(m) * std::sin(wave_vec.row(m).dot(cloud.positions.row(i)) + phase(m));
      v += kSynthNoiseHalfWidth * rng.next_symmetric();
      if (ch < kFeatureDim) {
        cloud.features(i, ch) = v;
      } else if (ch < kFeatureDim + 3) {
        cloud.scalings(i, ch - kFeatureDim) = v;
      } else {
        cloud.offsets(i, ch - kFeatureDim - 3) = v;
      }
    }
  }
  return cloud;
}

SceneBounds scene_bounds(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions) {
  if (positions.rows() < 1) throw ValidationError("scene_bounds needs a non-empty cloud");
  const Eigen::Vector3d lo = positions.colwise().minCoeff();
  const Eigen::Vector3d hi = positions.colwise().maxCoeff();

  SceneBounds bounds;
  bounds.center = 0.5 * (lo + hi);

  const double half_diagonal = 0.5 * (hi - lo).norm();

  std::vector<double> dist(static_cast<std::size_t>(positions.rows()));
  for (Eigen::Index i = 0; i < positions.rows(); ++i)
    dist[static_cast<std::size_t>(i)] =
        (positions.row(i).transpose() - bounds.center).norm();
  std::sort(dist.begin(), dist.end());
  const std::size_t m = dist.size();
  const double median =
      (m % 2 == 1) ? dist[m / 2] : 0.5 * (dist[m / 2 - 1] + dist[m / 2]);

  bounds.radius = std::max(std::min(half_diagonal, 3.0 * median),
                           std::numeric_limits<double>::min());
  return bounds;
}

SceneBounds scene_bounds(const AnchorCloud& cloud) { return scene_bounds(cloud.positions); }

}  // namespace tpc
