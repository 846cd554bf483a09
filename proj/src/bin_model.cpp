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

#include "tpc/bin_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tpc/distribution_model.hpp"
#include "tpc/errors.hpp"
#include "tpc/normal.hpp"
#include "tpc/quantization.hpp"
#include "tpc/serialize.hpp"

namespace tpc {

int IntegerBinModel::bucket_from_cum(std::uint32_t f) const {
  const auto it = std::upper_bound(cum.begin(), cum.end(), f);
  return static_cast<int>(it - cum.begin()) - 1;
}

std::uint64_t IntegerBinModel::mix_hash(std::uint64_t h) const {
  h = fnv1a_u64(h, static_cast<std::uint64_t>(first_symbol));
  h = fnv1a_u64(h, static_cast<std::uint64_t>(alphabet_size));
  for (std::uint32_t c : cum) h = fnv1a_u64(h, c);
  return h;
}

std::vector<std::uint32_t> largest_remainder_round(std::span<const double> weights,
                                                   std::uint32_t total) {
  const std::size_t n = weights.size();
  if (n == 0) throw ValidationError("largest_remainder_round: empty weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("largest_remainder_round: negative weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw ValidationError("largest_remainder_round: zero total weight");

  std::vector<std::uint32_t> freq(n, 0);
  std::vector<double> remainder(n, 0.0);
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ideal = static_cast<double>(total) * (weights[i] / sum);
    const double base = std::floor(ideal);
    freq[i] = static_cast<std::uint32_t>(base);
    remainder[i] = ideal - base;
    used += freq[i];
  }
  // Floating-point drift can leave the floor sum one past the target.
  while (used > total) {
    const std::size_t top =
        static_cast<std::size_t>(std::max_element(freq.begin(), freq.end()) - freq.begin());
    --freq[top];
    --used;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return a < b;
  });
  std::uint64_t leftover = total - used;
  for (std::size_t i = 0; leftover > 0; ++i, --leftover) ++freq[order[i % n]];
  return freq;
}

IntegerBinModel discretize_bin_model(double mu, double sigma, double q) {
  if (!(q > 0.0)) throw ValidationError("discretize_bin_model: q must be positive");
  sigma = sigma < kSigmaMin ? kSigmaMin : sigma;

  constexpr long long kMax = IntegerBinModel::kMaxSymbol;
  const double ratio = mu / q;
  long long center;
  if (ratio >= static_cast<double>(kMax))
    center = kMax;
  else if (ratio <= static_cast<double>(-kMax))
    center = -kMax;
  else
    center = std::llround(ratio);

  const double span = 4.0 * sigma / q + 1.0;
  const long long half_width = span >= 1024.0 ? 1024 : static_cast<long long>(span) + 1;
  long long lo = std::max(-kMax, center - half_width);
  long long hi = std::min(kMax, center + half_width);

  // One CDF evaluation per bin boundary; adjacent bins share boundaries so
  // the window probability sum telescopes.
  const double half = 0.5 * q;
  std::vector<double> probs(static_cast<std::size_t>(hi - lo + 1));
  {
    double prev = normal_cdf((dequantize_symbol(lo, q) - half - mu) / sigma);
    for (long long s = lo; s <= hi; ++s) {
      const double next = normal_cdf((dequantize_symbol(s + 1, q) - half - mu) / sigma);
      double p = next - prev;
      if (p < 0.0) p = 0.0;
      probs[static_cast<std::size_t>(s - lo)] = p;
      prev = next;
    }
  }

  double escape_weight = 0.0;
  for (double p : probs) escape_weight += p;
  escape_weight = 1.0 - escape_weight;
  const double escape_floor = 1.5 / static_cast<double>(IntegerBinModel::kTotal);
  if (escape_weight < escape_floor) escape_weight = escape_floor;

  // Edge bins whose frequency rounds to zero leave the alphabet; their mass
  // joins the escape bucket. Bins below 0.3/T cannot survive rounding, so
  // they are folded before the first rounding pass; the loop then folds any
  // remaining zero-frequency edges in whole batches.
  const double hopeless = 0.3 / static_cast<double>(IntegerBinModel::kTotal);
  auto fold_front = [&](std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) escape_weight += probs[i];
    probs.erase(probs.begin(), probs.begin() + static_cast<std::ptrdiff_t>(count));
    lo += static_cast<long long>(count);
  };
  auto fold_back = [&](std::size_t count) {
    for (std::size_t i = probs.size() - count; i < probs.size(); ++i)
      escape_weight += probs[i];
    probs.resize(probs.size() - count);
    hi -= static_cast<long long>(count);
  };
  {
    std::size_t front = 0;
    while (front + 1 < probs.size() && probs[front] < hopeless) ++front;
    if (front > 0) fold_front(front);
    std::size_t back = 0;
    while (back + 1 < probs.size() && probs[probs.size() - 1 - back] < hopeless) ++back;
    if (back > 0) fold_back(back);
  }

  std::vector<std::uint32_t> freq;
  for (;;) {
    std::vector<double> weights(probs.begin(), probs.end());
    weights.push_back(escape_weight);
    freq = largest_remainder_round(weights, IntegerBinModel::kTotal);
    std::size_t front = 0;
    while (front + 1 < probs.size() && freq[front] == 0) ++front;
    std::size_t back = 0;
    while (back + 1 + front < probs.size() && freq[probs.size() - 1 - back] == 0) ++back;
    if (front == 0 && back == 0) break;
    if (front > 0) fold_front(front);
    if (back > 0) fold_back(back);
  }

  // Interior zeros are possible only through remainder ties; repair by
  // stealing from the largest bucket.
  for (;;) {
    const auto zero = std::find(freq.begin(), freq.end(), 0u);
    if (zero == freq.end()) break;
    const auto top = std::max_element(freq.begin(), freq.end());
    --*top;
    ++*zero;
  }

  IntegerBinModel model;
  model.first_symbol = lo;
  model.alphabet_size = static_cast<int>(probs.size());
  model.cum.resize(freq.size() + 1);
  model.cum[0] = 0;
  for (std::size_t i = 0; i < freq.size(); ++i) model.cum[i + 1] = model.cum[i] + freq[i];
  return model;
}

}  // namespace tpc
