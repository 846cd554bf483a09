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

#include <cstdint>
#include <span>
#include <vector>

namespace tpc {

// Fixed-point symbol distribution for one coefficient: a contiguous window of
// integer symbols around the predicted mean, plus one escape bucket covering
// everything else (coded as escape + raw 32-bit value). Frequencies are
// integers summing to 2^16, each bucket >= 1.
struct IntegerBinModel {
  static constexpr std::uint32_t kTotal = 1u << 16;
  static constexpr long long kMaxSymbol = (1ll << 15) - 1;

  long long first_symbol = 0;
  int alphabet_size = 0;               // window buckets, escape excluded
  std::vector<std::uint32_t> cum;      // size alphabet_size + 2; cum.back() == kTotal

  int bucket_count() const { return alphabet_size + 1; }
  int escape_bucket() const { return alphabet_size; }

  bool in_alphabet(long long s) const {
    return s >= first_symbol && s < first_symbol + alphabet_size;
  }
  int bucket_of(long long s) const {
    return in_alphabet(s) ? static_cast<int>(s - first_symbol) : escape_bucket();
  }
  std::uint32_t cum_of(int bucket) const { return cum[static_cast<std::size_t>(bucket)]; }
  std::uint32_t freq_of(int bucket) const {
    return cum[static_cast<std::size_t>(bucket) + 1] - cum[static_cast<std::size_t>(bucket)];
  }
  // Bucket whose cumulative interval contains f.
  int bucket_from_cum(std::uint32_t f) const;

  std::uint64_t mix_hash(std::uint64_t h) const;
};

// Largest-remainder rounding of nonnegative weights to integers summing to
// `total`. Ties between equal remainders go to the smaller index.
std::vector<std::uint32_t> largest_remainder_round(std::span<const double> weights,
                                                   std::uint32_t total);

// Deterministic fixed-point discretization of the Gaussian bin probabilities
// for quantization step q. Identical output on encoder and decoder given
// bit-identical (mu, sigma, q).
IntegerBinModel discretize_bin_model(double mu, double sigma, double q);

}  // namespace tpc
