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

#include "tpc/symbol_codec.hpp"

#include <limits>

#include "tpc/errors.hpp"
#include "tpc/serialize.hpp"

namespace tpc {

std::vector<std::uint8_t> encode_symbols(std::span<const long long> symbols,
                                         const ModelProvider& model_at,
                                         std::uint64_t* table_hash) {
  RangeEncoder enc;
  std::uint64_t hash = fnv1a_init();
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const IntegerBinModel model = model_at(i);
    hash = model.mix_hash(hash);
    const long long s = symbols[i];
    const int bucket = model.bucket_of(s);
    enc.encode(model.cum_of(bucket), model.freq_of(bucket));
    if (bucket == model.escape_bucket()) {
      if (s > std::numeric_limits<std::int32_t>::max() ||
          s < std::numeric_limits<std::int32_t>::min())
        throw RangeError("symbol exceeds raw 32-bit escape range");
      const auto raw = static_cast<std::uint32_t>(static_cast<std::int32_t>(s));
      enc.encode_uniform16(static_cast<std::uint16_t>(raw >> 16));
      enc.encode_uniform16(static_cast<std::uint16_t>(raw & 0xFFFFu));
    }
  }
  if (table_hash != nullptr) *table_hash = hash;
  return enc.finish();
}

std::vector<long long> decode_symbols(std::span<const std::uint8_t> stream,
                                      const ModelProvider& model_at, std::size_t count,
                                      std::uint64_t* table_hash) {
  RangeDecoder dec(stream);
  std::uint64_t hash = fnv1a_init();
  std::vector<long long> symbols(count);
  for (std::size_t i = 0; i < count; ++i) {
    const IntegerBinModel model = model_at(i);
    hash = model.mix_hash(hash);
    const int bucket = model.bucket_from_cum(dec.decode_freq());
    dec.decode_update(model.cum_of(bucket), model.freq_of(bucket));
    if (bucket == model.escape_bucket()) {
      std::uint32_t raw = static_cast<std::uint32_t>(dec.decode_uniform16()) << 16;
      raw |= dec.decode_uniform16();
      symbols[i] = static_cast<std::int32_t>(raw);
    } else {
      symbols[i] = model.first_symbol + bucket;
    }
  }
  if (dec.overran()) throw IoError("symbol stream truncated");
  if (table_hash != nullptr) *table_hash = hash;
  return symbols;
}

}  // namespace tpc
