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

#include "tpc/wavelet.hpp"

#include <algorithm>

#include "tpc/errors.hpp"

namespace tpc {

namespace {

// One orthonormal Haar step on 2x2 blocks.
void haar_step(const Eigen::MatrixXd& in, Eigen::MatrixXd& low, Eigen::MatrixXd& dc,
               Eigen::MatrixXd& dr, Eigen::MatrixXd& db) {
  const Eigen::Index h = in.rows() / 2;
  const Eigen::Index w = in.cols() / 2;
  low.resize(h, w);
  dc.resize(h, w);
  dr.resize(h, w);
  db.resize(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      const double a = in(2 * r, 2 * c);
      const double b = in(2 * r, 2 * c + 1);
      const double cc = in(2 * r + 1, 2 * c);
      const double d = in(2 * r + 1, 2 * c + 1);
      low(r, c) = 0.5 * (a + b + cc + d);
      dc(r, c) = 0.5 * (a - b + cc - d);
      dr(r, c) = 0.5 * (a + b - cc - d);
      db(r, c) = 0.5 * (a - b - cc + d);
    }
  }
}

void haar_step_inverse(const Eigen::MatrixXd& low, const Eigen::MatrixXd& dc,
                       const Eigen::MatrixXd& dr, const Eigen::MatrixXd& db,
                       Eigen::MatrixXd& out) {
  const Eigen::Index h = low.rows();
  const Eigen::Index w = low.cols();
  out.resize(2 * h, 2 * w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      const double l = low(r, c);
      const double x = dc(r, c);
      const double y = dr(r, c);
      const double z = db(r, c);
      out(2 * r, 2 * c) = 0.5 * (l + x + y + z);
      out(2 * r, 2 * c + 1) = 0.5 * (l - x + y - z);
      out(2 * r + 1, 2 * c) = 0.5 * (l + x - y - z);
      out(2 * r + 1, 2 * c + 1) = 0.5 * (l - x - y + z);
    }
  }
}

double band_l1(const Image& a, const Image& b) {
  double sum = 0.0;
  Eigen::Index count = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    sum += (a[c] - b[c]).cwiseAbs().sum();
    count += a[c].size();
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

void check_image(const Image& img, int levels) {
  if (img.empty()) throw ValidationError("image has no channels");
  const Eigen::Index divisor = Eigen::Index{1} << levels;
  for (const Eigen::MatrixXd& ch : img) {
    if (ch.rows() != img[0].rows() || ch.cols() != img[0].cols())
      throw ValidationError("image channels have mismatched shapes");
    if (ch.rows() % divisor != 0 || ch.cols() % divisor != 0 || ch.rows() == 0 ||
        ch.cols() == 0)
      throw ValidationError("image dimensions must be divisible by 2^levels");
  }
}

}  // namespace

WaveletPyramid dwt2(const Image& img, int levels) {
  if (levels < 1) throw ValidationError("dwt2 needs at least one level");
  check_image(img, levels);
  WaveletPyramid pyr;
  pyr.low = img;
  pyr.high.resize(static_cast<std::size_t>(levels));
  for (int lev = 0; lev < levels; ++lev) {
    auto& bands = pyr.high[static_cast<std::size_t>(lev)];
    bands.detail_cols.resize(img.size());
    bands.detail_rows.resize(img.size());
    bands.detail_both.resize(img.size());
    for (std::size_t c = 0; c < img.size(); ++c) {
      Eigen::MatrixXd next;
      haar_step(pyr.low[c], next, bands.detail_cols[c], bands.detail_rows[c],
                bands.detail_both[c]);
      pyr.low[c] = std::move(next);
    }
  }
  return pyr;
}

Image idwt2(const WaveletPyramid& pyramid) {
  if (pyramid.high.empty()) throw ValidationError("empty wavelet pyramid");
  Image out = pyramid.low;
  for (int lev = pyramid.levels() - 1; lev >= 0; --lev) {
    const auto& bands = pyramid.high[static_cast<std::size_t>(lev)];
    if (bands.detail_cols.size() != out.size())
      throw ValidationError("wavelet pyramid bands have mismatched channels");
    for (std::size_t c = 0; c < out.size(); ++c) {
      if (bands.detail_cols[c].rows() != out[c].rows() ||
          bands.detail_cols[c].cols() != out[c].cols())
        throw ValidationError("wavelet pyramid band shapes inconsistent");
      Eigen::MatrixXd up;
      haar_step_inverse(out[c], bands.detail_cols[c], bands.detail_rows[c],
                        bands.detail_both[c], up);
      out[c] = std::move(up);
    }
  }
  return out;
}

std::pair<double, double> lambda_schedule(long step, const WaveletSchedule& schedule) {
  const long total = std::max<long>(1, schedule.total_steps);
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
  return {schedule.l1_start + t * (schedule.l1_end - schedule.l1_start),
          schedule.l2_start + t * (schedule.l2_end - schedule.l2_start)};
}

WaveletLossBreakdown wavelet_loss_breakdown(const Image& a, const Image& b, long step,
                                            const WaveletSchedule& schedule) {
  if (a.size() != b.size()) throw ValidationError("wavelet_loss channel count mismatch");
  check_image(a, 2);
  check_image(b, 2);
  if (a[0].rows() != b[0].rows() || a[0].cols() != b[0].cols())
    throw ValidationError("wavelet_loss image shape mismatch");

  const WaveletPyramid pa = dwt2(a, 2);
  const WaveletPyramid pb = dwt2(b, 2);

  WaveletLossBreakdown out;
  std::tie(out.lambda1, out.lambda2) = lambda_schedule(step, schedule);
  out.low_term = band_l1(pa.low, pb.low);
  for (int lev = 0; lev < 2; ++lev) {
    const auto& ba = pa.high[static_cast<std::size_t>(lev)];
    const auto& bb = pb.high[static_cast<std::size_t>(lev)];
    out.high_term += (band_l1(ba.detail_cols, bb.detail_cols) +
                      band_l1(ba.detail_rows, bb.detail_rows) +
                      band_l1(ba.detail_both, bb.detail_both)) /
                     3.0;
  }
  out.total = out.lambda1 * out.low_term + out.lambda2 * out.high_term;
  return out;
}

double wavelet_loss(const Image& a, const Image& b, long step,
                    const WaveletSchedule& schedule) {
  return wavelet_loss_breakdown(a, b, step, schedule).total;
}

}  // namespace tpc
