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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tpc/bin_model.hpp"
#include "tpc/container.hpp"
#include "tpc/errors.hpp"
#include "tpc/quantization.hpp"
#include "tpc/range_coder.hpp"
#include "tpc/rng.hpp"
#include "tpc/serialize.hpp"
#include "tpc/symbol_codec.hpp"

using namespace tpc;

namespace {

// Independent roundings of the spec'd distribution for cross-checks.
double libm_phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

IntegerBinModel coin_model() {
  IntegerBinModel model;
  model.first_symbol = 0;
  model.alphabet_size = 2;
  model.cum = {0, 32767, 65534, 65536};  // symbols 0/1 at ~1 bit, tiny escape
  return model;
}

}  // namespace

TEST_CASE("range coder round-trips mixed frequency streams") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(3000));
    std::vector<std::uint32_t> cums(n), freqs(n);
    std::vector<std::uint16_t> raws;
    RangeEncoder enc;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t freq = 1 + static_cast<std::uint32_t>(rng.next_below(60000));
      const std::uint32_t cum =
          static_cast<std::uint32_t>(rng.next_below(RangeEncoder::kTotal - freq));
      cums[i] = cum;
      freqs[i] = freq;
      enc.encode(cum, freq);
      if (i % 7 == 0) {
        raws.push_back(static_cast<std::uint16_t>(rng.next_below(65536)));
        enc.encode_uniform16(raws.back());
      }
    }
    const std::vector<std::uint8_t> stream = enc.finish();

    RangeDecoder dec({stream.data(), stream.size()});
    std::size_t raw_at = 0;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t f = dec.decode_freq();
      CHECK(f >= cums[i]);
      CHECK(f < cums[i] + freqs[i]);
      dec.decode_update(cums[i], freqs[i]);
      if (i % 7 == 0) CHECK(dec.decode_uniform16() == raws[raw_at++]);
    }
    CHECK_FALSE(dec.overran());
  }
}

TEST_CASE("an empty stream is only the flush") {
  RangeEncoder enc;
  CHECK(enc.finish().size() <= 16);
}

TEST_CASE("ten thousand coin flips cost about 1250 bytes") {
  Rng rng(2);
  std::vector<long long> symbols(10000);
  for (auto& s : symbols) s = static_cast<long long>(rng.next_below(2));
  const auto provider = [](std::size_t) { return coin_model(); };
  const std::vector<std::uint8_t> payload = encode_symbols(symbols, provider);
  CHECK(payload.size() >= 1250);
  CHECK(payload.size() <= 1250 + 64);
  CHECK(decode_symbols({payload.data(), payload.size()}, provider, symbols.size()) ==
        symbols);
}

TEST_CASE("largest remainder rounding splits a uniform distribution exactly") {
  const std::vector<double> weights{1.0, 1.0, 1.0, 1.0};
  const auto freq = largest_remainder_round(weights, 65536);
  for (std::uint32_t f : freq) CHECK(f == 16384);
}

TEST_CASE("largest remainder rounding is exhaustive and deterministic") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.next_below(600);
    std::vector<double> weights(n);
    for (double& w : weights) w = rng.next_unit() + 1e-9;
    const auto freq = largest_remainder_round(weights, 65536);
    std::uint64_t total = 0;
    for (std::uint32_t f : freq) total += f;
    CHECK(total == 65536);
    CHECK(largest_remainder_round(weights, 65536) == freq);
  }
}

TEST_CASE("discretized frequencies always sum to 2^16 with positive buckets") {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const double mu = 50.0 * rng.next_symmetric();
    const double sigma = std::pow(10.0, 3.0 * rng.next_symmetric());  // 1e-3 .. 1e3
    const double q = std::pow(10.0, rng.next_symmetric());            // 0.1 .. 10
    const IntegerBinModel model = discretize_bin_model(mu, sigma, q);
    CHECK(model.cum.front() == 0);
    CHECK(model.cum.back() == IntegerBinModel::kTotal);
    CHECK(model.alphabet_size >= 1);
    for (int b = 0; b < model.bucket_count(); ++b) CHECK(model.freq_of(b) >= 1);
    // Strictly increasing cumulative table.
    for (std::size_t i = 1; i < model.cum.size(); ++i) CHECK(model.cum[i] > model.cum[i - 1]);
  }
}

TEST_CASE("tiny sigma concentrates all frequency in one bucket") {
  const IntegerBinModel model = discretize_bin_model(0.42, 1e-9, 0.1);
  const int bucket = model.bucket_of(4);
  CHECK(bucket != model.escape_bucket());
  CHECK(model.freq_of(bucket) > 65000);
}

TEST_CASE("central bucket frequency matches an independent discretization") {
  const IntegerBinModel model = discretize_bin_model(0.0, 1.0, 1.0);
  const double p0 = libm_phi(0.5) - libm_phi(-0.5);
  const auto oracle = static_cast<long long>(std::llround(p0 * 65536.0));
  const int bucket = model.bucket_of(0);
  REQUIRE(bucket != model.escape_bucket());
  CHECK(std::abs(static_cast<long long>(model.freq_of(bucket)) - oracle) <= 2);
}

TEST_CASE("identical inputs give identical tables and hashes") {
  const IntegerBinModel a = discretize_bin_model(0.73, 0.21, 0.05);
  const IntegerBinModel b = discretize_bin_model(0.73, 0.21, 0.05);
  CHECK(a.cum == b.cum);
  CHECK(a.first_symbol == b.first_symbol);
  CHECK(a.mix_hash(fnv1a_init()) == b.mix_hash(fnv1a_init()));
  const IntegerBinModel c = discretize_bin_model(0.73, 0.22, 0.05);
  CHECK(a.mix_hash(fnv1a_init()) != c.mix_hash(fnv1a_init()));
}

TEST_CASE("symbol codec handles escapes and is lossless") {
  Rng rng(5);
  for (std::size_t count : {std::size_t{0}, std::size_t{1}, std::size_t{100000}}) {
    for (int seed = 0; seed < (count == 100000 ? 2 : 10); ++seed) {
      Rng source(hash_combine(seed, count));
      std::vector<long long> symbols(count);
      for (auto& s : symbols) {
        const double roll = source.next_unit();
        if (roll < 0.95) {
          s = static_cast<long long>(source.next_below(41)) - 20;
        } else {
          s = static_cast<long long>(source.next_below(2000000)) - 1000000;  // escapes
        }
      }
      const auto provider = [&](std::size_t i) {
        Rng local(hash_combine(0xAB, i));
        return discretize_bin_model(3.0 * local.next_symmetric(),
                                    0.2 + 2.0 * local.next_unit(), 0.5);
      };
      std::uint64_t enc_hash = 0, dec_hash = 0;
      const auto payload = encode_symbols(symbols, provider, &enc_hash);
      const auto decoded =
          decode_symbols({payload.data(), payload.size()}, provider, count, &dec_hash);
      CHECK(decoded == symbols);
      CHECK(enc_hash == dec_hash);
    }
  }
}

TEST_CASE("symbols beyond the raw 32-bit escape range are rejected") {
  const std::vector<long long> symbols{1ll << 40};
  const auto provider = [](std::size_t) { return discretize_bin_model(0.0, 1.0, 1.0); };
  CHECK_THROWS_AS(encode_symbols(symbols, provider), RangeError);
}

TEST_CASE("payload length stays within the discretized codelength bound") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t count = 20000;
    std::vector<long long> symbols(count);
    const double mu = 2.0 * rng.next_symmetric();
    const double sigma = 0.3 + rng.next_unit();
    for (auto& s : symbols)
      s = quantize_eval(mu + sigma * (rng.next_unit() + rng.next_unit() +
                                      rng.next_unit() + rng.next_unit() - 2.0) *
                                 1.73,
                        0.1)
              .symbol;
    const auto provider = [&](std::size_t) { return discretize_bin_model(mu, sigma, 0.1); };
    const IntegerBinModel model = provider(0);
    double ideal_bits = 0.0;
    for (long long s : symbols) {
      const int bucket = model.bucket_of(s);
      double p = static_cast<double>(model.freq_of(bucket)) / IntegerBinModel::kTotal;
      ideal_bits += -std::log2(p);
      if (bucket == model.escape_bucket()) ideal_bits += 32.0;
    }
    const auto payload = encode_symbols(symbols, provider);
    CHECK(static_cast<double>(payload.size()) <= ideal_bits / 8.0 + 64.0);
  }
}

TEST_CASE("flipping payload bytes never crashes the decoder") {
  Rng rng(7);
  std::vector<long long> symbols(2000);
  for (auto& s : symbols) s = static_cast<long long>(rng.next_below(9)) - 4;
  const auto provider = [](std::size_t) { return discretize_bin_model(0.0, 1.3, 0.7); };
  auto payload = encode_symbols(symbols, provider);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto corrupted = payload;
    const std::size_t at = rng.next_below(corrupted.size());
    corrupted[at] ^= static_cast<std::uint8_t>(1 + rng.next_below(255));
    try {
      const auto decoded =
          decode_symbols({corrupted.data(), corrupted.size()}, provider, symbols.size());
      if (decoded != symbols) ++mismatches;
    } catch (const IoError&) {
      ++mismatches;
    }
  }
  // A flip in the final flush bytes can decode identically; everything else
  // must surface as garbage or a truncation error, never a crash.
  CHECK(mismatches >= 95);
}

TEST_CASE("truncated symbol streams raise an I/O error") {
  std::vector<long long> symbols(5000, 3);
  const auto provider = [](std::size_t) { return discretize_bin_model(-1.0, 0.8, 0.3); };
  auto payload = encode_symbols(symbols, provider);
  payload.resize(payload.size() / 2);
  CHECK_THROWS_AS(decode_symbols({payload.data(), payload.size()}, provider, symbols.size()),
                  IoError);
}

TEST_CASE("containers survive a write/read cycle and verify their checksums") {
  CompressedScene scene;
  scene.header.anchor_count = 7;
  scene.header.offsets_per_anchor = 4;
  scene.header.knn_k = 4;
  scene.header.resolution = 16;
  scene.header.channels = 2;
  scene.header.quant_steps = {0.05f, 0.01f, 0.01f};
  Rng rng(8);
  for (SectionId id : {SectionId::kPositions, SectionId::kPlanes, SectionId::kFeature}) {
    Section s;
    s.id = id;
    s.bytes.resize(rng.next_below(500) + 1);
    for (auto& b : s.bytes) b = static_cast<std::uint8_t>(rng.next_below(256));
    scene.sections.push_back(std::move(s));
  }

  const std::vector<std::uint8_t> bytes = serialize_container(scene);
  const CompressedScene back = parse_container({bytes.data(), bytes.size()});
  CHECK(back.header.anchor_count == scene.header.anchor_count);
  CHECK(back.header.resolution == scene.header.resolution);
  REQUIRE(back.sections.size() == scene.sections.size());
  for (std::size_t i = 0; i < scene.sections.size(); ++i)
    CHECK(back.sections[i].bytes == scene.sections[i].bytes);

  // Any corrupted payload byte trips a section checksum.
  auto corrupted = bytes;
  corrupted.back() ^= 0xFF;
  CHECK_THROWS_AS(parse_container({corrupted.data(), corrupted.size()}), CorruptionError);

  corrupted = bytes;
  corrupted[0] = 'X';
  CHECK_THROWS_AS(parse_container({corrupted.data(), corrupted.size()}), CorruptionError);

  corrupted = bytes;
  corrupted.resize(bytes.size() / 2);
  CHECK_THROWS((void)parse_container({corrupted.data(), corrupted.size()}));
}
