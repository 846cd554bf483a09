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

#include <functional>

#include "tpc/bin_model.hpp"
#include "tpc/range_coder.hpp"

namespace tpc {

// Supplies the bin model of the i-th symbol. Encoder and decoder must observe
// identical models; the codec cross-checks this with a running table hash.
using ModelProvider = std::function<IntegerBinModel(std::size_t)>;

// Arithmetic-codes a symbol sequence. Symbols outside a model's alphabet are
// sent as escape + raw 32 bits; symbols outside int32 raise RangeError.
std::vector<std::uint8_t> encode_symbols(std::span<const long long> symbols,
                                         const ModelProvider& model_at,
                                         std::uint64_t* table_hash = nullptr);

// Exact inverse of encode_symbols. Throws IoError if the stream runs out
// before `count` symbols were decoded.
std::vector<long long> decode_symbols(std::span<const std::uint8_t> stream,
                                      const ModelProvider& model_at, std::size_t count,
                                      std::uint64_t* table_hash = nullptr);

}  // namespace tpc
