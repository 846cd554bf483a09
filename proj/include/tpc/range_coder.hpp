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

// Byte-oriented range coder: 64-bit low, 32-bit range, carries absorbed by a
// pending-byte cache so emitted bytes are never patched. Frequencies are
// 16-bit fixed point (total 2^16).
class RangeEncoder {
 public:
  static constexpr std::uint32_t kTotalBits = 16;
  static constexpr std::uint32_t kTotal = 1u << kTotalBits;

  void encode(std::uint32_t cum_freq, std::uint32_t freq, std::uint32_t total = kTotal);

  // One symbol uniform over 2^16; costs exactly 16 bits.
  void encode_uniform16(std::uint16_t value) { encode(value, 1, kTotal); }

  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> data);

  std::uint32_t decode_freq(std::uint32_t total = RangeEncoder::kTotal);
  void decode_update(std::uint32_t cum_freq, std::uint32_t freq,
                     std::uint32_t total = RangeEncoder::kTotal);
  std::uint16_t decode_uniform16();

  // True once the decoder has read past the end of the stream (padding with
  // zero bytes); a sign of truncation or corruption.
  bool overran() const { return overran_; }

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
  bool overran_ = false;
};

}  // namespace tpc
