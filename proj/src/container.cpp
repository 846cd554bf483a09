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

#include "tpc/container.hpp"

#include "tpc/errors.hpp"
#include "tpc/serialize.hpp"

namespace tpc {

namespace {
constexpr std::uint32_t kContainerVersion = 1;
}

const char* section_name(SectionId id) {
  switch (id) {
    case SectionId::kPositions: return "positions";
    case SectionId::kPlanes: return "planes";
    case SectionId::kModel: return "model";
    case SectionId::kMasks: return "masks";
    case SectionId::kFeature: return "feature";
    case SectionId::kScaling: return "scaling";
    case SectionId::kOffsets: return "offsets";
    case SectionId::kTraining: return "training";
  }
  return "unknown";
}

const Section* CompressedScene::find(SectionId id) const {
  for (const Section& s : sections)
    if (s.id == id) return &s;
  return nullptr;
}

const Section& CompressedScene::require(SectionId id) const {
  const Section* s = find(id);
  if (s == nullptr)
    throw CorruptionError(std::string("missing section: ") + section_name(id));
  return *s;
}

std::size_t CompressedScene::serialized_size() const {
  return serialize_container(*this).size();
}

std::vector<std::uint8_t> serialize_container(const CompressedScene& scene) {
  ByteWriter w;
  w.tag("TCGS");
  w.u32(kContainerVersion);
  w.u64(scene.header.anchor_count);
  w.u32(scene.header.offsets_per_anchor);
  w.u32(scene.header.knn_k);
  w.u32(scene.header.resolution);
  w.u32(scene.header.channels);
  for (float q : scene.header.quant_steps) w.f32(q);
  w.u32(static_cast<std::uint32_t>(scene.sections.size()));

  const std::size_t table_start = w.size();
  const std::size_t table_bytes = scene.sections.size() * 24;
  std::size_t offset = table_start + table_bytes;
  std::vector<std::uint64_t> offsets;
  for (const Section& s : scene.sections) {
    offset = (offset + 7) / 8 * 8;
    offsets.push_back(offset);
    offset += s.bytes.size();
  }
  for (std::size_t i = 0; i < scene.sections.size(); ++i) {
    const Section& s = scene.sections[i];
    w.u32(static_cast<std::uint32_t>(s.id));
    w.u32(crc32({s.bytes.data(), s.bytes.size()}));
    w.u64(offsets[i]);
    w.u64(s.bytes.size());
  }
  for (std::size_t i = 0; i < scene.sections.size(); ++i) {
    w.pad_to(8);
    w.bytes({scene.sections[i].bytes.data(), scene.sections[i].bytes.size()});
  }
  return w.take();
}

CompressedScene parse_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  CompressedScene scene;
  std::uint32_t count = 0;
  try {
    if (!r.expect_tag("TCGS")) throw CorruptionError("bad container magic");
    if (r.u32() != kContainerVersion) throw CorruptionError("unsupported container version");
    scene.header.anchor_count = r.u64();
    scene.header.offsets_per_anchor = r.u32();
    scene.header.knn_k = r.u32();
    scene.header.resolution = r.u32();
    scene.header.channels = r.u32();
    for (float& q : scene.header.quant_steps) q = r.f32();
    count = r.u32();
  } catch (const IoError&) {
    throw CorruptionError("truncated container header");
  }

  struct Entry {
    std::uint32_t id, crc;
    std::uint64_t offset, size;
  };
  std::vector<Entry> table(count);
  for (Entry& e : table) {
    e.id = r.u32();
    e.crc = r.u32();
    e.offset = r.u64();
    e.size = r.u64();
  }
  for (const Entry& e : table) {
    if (e.offset + e.size > bytes.size() || e.offset + e.size < e.offset)
      throw IoError("section extends past end of container");
    Section s;
    s.id = static_cast<SectionId>(e.id);
    s.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(e.offset),
                   bytes.begin() + static_cast<std::ptrdiff_t>(e.offset + e.size));
    if (crc32({s.bytes.data(), s.bytes.size()}) != e.crc)
      throw CorruptionError(std::string("checksum mismatch in section ") +
                            section_name(s.id));
    scene.sections.push_back(std::move(s));
  }
  return scene;
}

void write_container_file(const CompressedScene& scene, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_container(scene);
  write_file_bytes(path, {bytes.data(), bytes.size()});
}

CompressedScene read_container_file(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return parse_container({bytes.data(), bytes.size()});
}

}  // namespace tpc
