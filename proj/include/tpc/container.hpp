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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tpc {

// Compressed scene container. Layout (all little-endian):
//   magic "TCGS", u32 version = 1,
//   u64 coded anchor count, u32 k, u32 knn K, u32 plane resolution,
//   u32 plane channels, f32 quantization steps (feature, scaling, offsets),
//   u32 section count,
//   section table: per section u32 id, u32 crc32, u64 offset, u64 size,
//   section payloads at 8-byte aligned offsets.
// Decoding needs nothing outside the file.
enum class SectionId : std::uint32_t {
  kPositions = 1,
  kPlanes = 2,
  kModel = 3,
  kMasks = 4,
  kFeature = 5,
  kScaling = 6,
  kOffsets = 7,
  kTraining = 8,  // checkpoint-only, stripped by the encoder
};

const char* section_name(SectionId id);

struct Section {
  SectionId id{};
  std::vector<std::uint8_t> bytes;
};

struct ContainerHeader {
  std::uint64_t anchor_count = 0;
  std::uint32_t offsets_per_anchor = 0;
  std::uint32_t knn_k = 0;
  std::uint32_t resolution = 0;
  std::uint32_t channels = 0;
  std::array<float, 3> quant_steps{};
};

struct CompressedScene {
  ContainerHeader header;
  std::vector<Section> sections;

  const Section* find(SectionId id) const;
  const Section& require(SectionId id) const;
  std::size_t serialized_size() const;
};

std::vector<std::uint8_t> serialize_container(const CompressedScene& scene);

// Verifies magic, version and per-section CRCs; throws CorruptionError on any
// mismatch and IoError if the byte range is inconsistent.
CompressedScene parse_container(std::span<const std::uint8_t> bytes);

void write_container_file(const CompressedScene& scene, const std::filesystem::path& path);
CompressedScene read_container_file(const std::filesystem::path& path);

}  // namespace tpc
