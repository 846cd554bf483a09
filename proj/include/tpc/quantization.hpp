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

#include <cmath>

#include "tpc/distribution_model.hpp"
#include "tpc/errors.hpp"

namespace tpc {

// Per-group quantization steps. The steps are part of the bitstream header.
struct QuantConfig {
  double feature = 0.05;
  double scaling = 0.01;
  double offsets = 0.01;

  double step(Group g) const {
    switch (g) {
      case Group::kFeature: return feature;
      case Group::kScaling: return scaling;
      default: return offsets;
    }
  }

  void validate() const {
    if (!(feature > 0.0) || !(scaling > 0.0) || !(offsets > 0.0))
      throw ValidationError("quantization steps must be positive");
  }
};

// Steps travel as fp32 in the bitstream header; the trainer and both codec
// sides work with the fp32-rounded values so reconstructions agree bit for
// bit.
inline QuantConfig normalized_quant(const QuantConfig& q) {
  QuantConfig out;
  out.feature = static_cast<double>(static_cast<float>(q.feature));
  out.scaling = static_cast<double>(static_cast<float>(q.scaling));
  out.offsets = static_cast<double>(static_cast<float>(q.offsets));
  return out;
}

// Training-time noise proxy: uniform u in [-0.5, 0.5] makes the result
// uniform over the quantization bin around v.
inline double quantize_train(double v, double q, double u) { return v + u * q; }

// Hard rounding to an integer symbol, halfway cases away from zero.
inline long long quantize_symbol(double v, double q) { return std::llround(v / q); }

inline double dequantize_symbol(long long s, double q) {
  return static_cast<double>(s) * q;
}

struct QuantResult {
  long long symbol;
  double reconstructed;
};

inline QuantResult quantize_eval(double v, double q) {
  const long long s = quantize_symbol(v, q);
  return {s, dequantize_symbol(s, q)};
}

}  // namespace tpc
