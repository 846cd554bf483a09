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

#include "tpc/range_coder.hpp"

#include <algorithm>

#include "tpc/errors.hpp"

namespace tpc {

namespace {
constexpr std::uint32_t kTopValue = 1u << 24;
}

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_ >> 32) != 0 ||
      static_cast<std::uint32_t>(low_) < 0xFF000000u) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    do {
      out_.push_back(static_cast<std::uint8_t>(cache_ + carry));
      cache_ = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = static_cast<std::uint32_t>(low_) << 8;
}

void RangeEncoder::encode(std::uint32_t cum_freq, std::uint32_t freq, std::uint32_t total) {
  if (freq == 0 || cum_freq + freq > total)
    throw ValidationError("range encoder: invalid frequency interval");
  range_ /= total;
  low_ += static_cast<std::uint64_t>(cum_freq) * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    range_ <<= 8;
    shift_low();
  }
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> data) : data_(data) {
  next_byte();  // leading byte emitted by the encoder's first shift_low
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= data_.size()) {
    overran_ = true;
    return 0;
  }
  return data_[pos_++];
}

std::uint32_t RangeDecoder::decode_freq(std::uint32_t total) {
  range_ /= total;
  return std::min(code_ / range_, total - 1);
}

void RangeDecoder::decode_update(std::uint32_t cum_freq, std::uint32_t freq,
                                 std::uint32_t /*total*/) {
  code_ -= cum_freq * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

std::uint16_t RangeDecoder::decode_uniform16() {
  const std::uint32_t v = decode_freq(RangeEncoder::kTotal);
  decode_update(v, 1, RangeEncoder::kTotal);
  return static_cast<std::uint16_t>(v);
}

}  // namespace tpc
