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

#include "tpc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tpc/bin_model.hpp"
#include "tpc/entropy_model.hpp"
#include "tpc/errors.hpp"
#include "tpc/parallel.hpp"
#include "tpc/serialize.hpp"
#include "tpc/symbol_codec.hpp"

namespace tpc {

namespace {

constexpr std::uint32_t kPositionLevels = 0xFFFFu;  // 16 bits per axis

std::vector<std::uint8_t> build_positions_section(const QuantizedPositions& qp) {
  ByteWriter w;
  for (int a = 0; a < 3; ++a) w.f64(qp.bbox_min(a));
  for (int a = 0; a < 3; ++a) w.f64(qp.bbox_max(a));
  for (std::uint16_t code : qp.codes) w.u16(code);
  return w.take();
}

Eigen::Matrix<double, Eigen::Dynamic, 3> parse_positions_section(
    std::span<const std::uint8_t> bytes, std::uint64_t n) {
  ByteReader r(bytes);
  Eigen::Vector3d lo, hi;
  for (int a = 0; a < 3; ++a) lo(a) = r.f64();
  for (int a = 0; a < 3; ++a) hi(a) = r.f64();
  Eigen::Matrix<double, Eigen::Dynamic, 3> out(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double cell = position_cell_size(lo, hi, a);
      out(i, a) = lo(a) + static_cast<double>(r.u16()) * cell;
    }
  }
  if (!r.at_end()) throw CorruptionError("positions section has trailing bytes");
  return out;
}

struct MasksInfo {
  std::uint64_t original_count = 0;
  std::vector<std::uint8_t> anchor_bits;  // original-major
  std::vector<std::uint8_t> slot_mask;    // survivor-major, unpacked
};

std::vector<std::uint8_t> build_masks_section(std::uint64_t original_count,
                                              const std::vector<std::uint8_t>& anchor_keep,
                                              const std::vector<std::uint8_t>& slot_mask) {
  std::uint64_t survivors = 0;
  for (std::uint8_t b : anchor_keep) survivors += b;
  ByteWriter w;
  w.u64(original_count);
  w.u64(survivors);
  auto pack = [&w](const std::vector<std::uint8_t>& bits) {
    std::uint8_t acc = 0;
    int filled = 0;
    for (std::uint8_t b : bits) {
      acc |= static_cast<std::uint8_t>((b & 1u) << filled);
      if (++filled == 8) {
        w.u8(acc);
        acc = 0;
        filled = 0;
      }
    }
    if (filled > 0) w.u8(acc);
  };
  pack(anchor_keep);
  pack(slot_mask);
  return w.take();
}

MasksInfo parse_masks_section(std::span<const std::uint8_t> bytes, std::uint64_t survivors,
                              std::uint32_t k) {
  ByteReader r(bytes);
  MasksInfo info;
  info.original_count = r.u64();
  const std::uint64_t stored_survivors = r.u64();
  if (stored_survivors != survivors)
    throw CorruptionError("mask section survivor count disagrees with header");
  auto unpack = [&r](std::uint64_t count) {
    std::vector<std::uint8_t> bits(count);
    std::uint8_t acc = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      if (i % 8 == 0) acc = r.u8();
      bits[i] = (acc >> (i % 8)) & 1u;
    }
    return bits;
  };
  info.anchor_bits = unpack(info.original_count);
  info.slot_mask = unpack(survivors * k);
  std::uint64_t kept = 0;
  for (std::uint8_t b : info.anchor_bits) kept += b;
  if (kept != survivors) throw CorruptionError("anchor mask popcount disagrees with header");
  if (!r.at_end()) throw CorruptionError("masks section has trailing bytes");
  return info;
}

void write_conv_layer(ByteWriter& w, const ConvLayer& layer) {
  for (int oc = 0; oc < layer.out_channels; ++oc)
    for (int ic = 0; ic < layer.in_channels; ++ic)
      for (int kr = 0; kr < 3; ++kr)
        for (int kc = 0; kc < 3; ++kc)
          w.f32(static_cast<float>(layer.kernel(oc, ic)(kr, kc)));
  for (int oc = 0; oc < layer.out_channels; ++oc)
    w.f32(static_cast<float>(layer.bias(oc)));
}

void read_conv_layer(ByteReader& r, ConvLayer& layer) {
  for (int oc = 0; oc < layer.out_channels; ++oc)
    for (int ic = 0; ic < layer.in_channels; ++ic)
      for (int kr = 0; kr < 3; ++kr)
        for (int kc = 0; kc < 3; ++kc)
          layer.kernel(oc, ic)(kr, kc) = r.f32();
  for (int oc = 0; oc < layer.out_channels; ++oc) layer.bias(oc) = r.f32();
}

ConvLayer blank_conv(int in_channels, int out_channels, int stride) {
  ConvLayer layer;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.stride = stride;
  layer.kernels.assign(static_cast<std::size_t>(in_channels) * out_channels,
                       Eigen::Matrix3d::Zero());
  layer.bias = Eigen::VectorXd::Zero(out_channels);
  return layer;
}

void write_tensor(ByteWriter& w, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f32(static_cast<float>(m(r, c)));
}

Eigen::MatrixXd read_tensor(ByteReader& r, std::uint32_t rows, std::uint32_t cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f32();
  return m;
}

}  // namespace

double position_cell_size(const Eigen::Vector3d& bbox_min, const Eigen::Vector3d& bbox_max,
                          int axis) {
  const double extent = bbox_max(axis) - bbox_min(axis);
  return extent > 0.0 ? extent / static_cast<double>(kPositionLevels) : 0.0;
}

QuantizedPositions quantize_positions(const Eigen::Matrix<double, Eigen::Dynamic, 3>& p) {
  QuantizedPositions qp;
  qp.bbox_min = p.colwise().minCoeff();
  qp.bbox_max = p.colwise().maxCoeff();
  qp.codes.resize(static_cast<std::size_t>(p.rows()) * 3);
  qp.dequantized.resize(p.rows(), 3);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double cell = position_cell_size(qp.bbox_min, qp.bbox_max, a);
      long long s = 0;
      if (cell > 0.0) {
        s = std::llround((p(i, a) - qp.bbox_min(a)) / cell);
        if (s < 0) s = 0;
        if (s > kPositionLevels) s = kPositionLevels;
      }
      qp.codes[static_cast<std::size_t>(i) * 3 + a] = static_cast<std::uint16_t>(s);
      qp.dequantized(i, a) = qp.bbox_min(a) + static_cast<double>(s) * cell;
    }
  }
  return qp;
}

std::vector<std::uint8_t> build_planes_section(const TriPlaneGrid& latent,
                                               const PlaneAutoencoder& ae) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(latent.resolution * 8));
  w.u32(static_cast<std::uint32_t>(latent.channels));
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < latent.channels; ++c)
      for (int r = 0; r < latent.resolution; ++r)
        for (int col = 0; col < latent.resolution; ++col)
          w.f32(static_cast<float>(latent.planes[p][c](r, col)));
  for (const ConvLayer& layer : ae.decoder) write_conv_layer(w, layer);
  return w.take();
}

void parse_planes_section(std::span<const std::uint8_t> bytes, TriPlaneGrid& latent,
                          std::array<ConvLayer, 3>& decoder) {
  ByteReader r(bytes);
  const std::uint32_t resolution = r.u32();
  const std::uint32_t channels = r.u32();
  if (resolution % 8 != 0 || resolution == 0 || channels == 0)
    throw CorruptionError("planes section has invalid dimensions");
  latent = make_triplane(static_cast<int>(resolution / 8), static_cast<int>(channels));
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < latent.channels; ++c)
      for (int row = 0; row < latent.resolution; ++row)
        for (int col = 0; col < latent.resolution; ++col)
          latent.planes[p][c](row, col) = r.f32();
  const int wide = 2 * static_cast<int>(channels);
  decoder = {blank_conv(static_cast<int>(channels), wide, 1), blank_conv(wide, wide, 1),
             blank_conv(wide, static_cast<int>(channels), 1)};
  for (ConvLayer& layer : decoder) read_conv_layer(r, layer);
  if (!r.at_end()) throw CorruptionError("planes section has trailing bytes");
}

std::vector<std::uint8_t> build_model_section(const DistributionModel& model) {
  ByteWriter w;
  std::vector<const Eigen::MatrixXd*> mats;
  std::vector<Eigen::MatrixXd> bias_holders;
  auto add = [&](const Eigen::MatrixXd& m) { mats.push_back(&m); };
  bias_holders.push_back(model.b1);
  bias_holders.push_back(model.b2);
  for (int g = 0; g < 3; ++g) bias_holders.push_back(model.head_b[g]);
  add(model.w1);
  add(bias_holders[0]);
  add(model.w2);
  add(bias_holders[1]);
  for (int g = 0; g < 3; ++g) {
    add(model.head_w[g]);
    add(bias_holders[2 + static_cast<std::size_t>(g)]);
  }
  w.u32(static_cast<std::uint32_t>(mats.size()));
  for (const auto* m : mats) {
    w.u32(static_cast<std::uint32_t>(m->rows()));
    w.u32(static_cast<std::uint32_t>(m->cols()));
  }
  for (const auto* m : mats) write_tensor(w, *m);
  return w.take();
}

DistributionModel parse_model_section(std::span<const std::uint8_t> bytes,
                                      int offsets_per_anchor) {
  ByteReader r(bytes);
  const std::uint32_t count = r.u32();
  if (count != 10) throw CorruptionError("model section must hold 10 tensors");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(count);
  for (auto& s : shapes) {
    s.first = r.u32();
    s.second = r.u32();
  }
  std::vector<Eigen::MatrixXd> tensors;
  tensors.reserve(count);
  for (const auto& s : shapes) tensors.push_back(read_tensor(r, s.first, s.second));
  if (!r.at_end()) throw CorruptionError("model section has trailing bytes");

  DistributionModel model;
  model.group_dims = std::array<int, 3>{kFeatureDim, 3, 3 * offsets_per_anchor};
  model.w1 = tensors[0];
  model.b1 = tensors[1].col(0);
  model.w2 = tensors[2];
  model.b2 = tensors[3].col(0);
  for (int g = 0; g < 3; ++g) {
    model.head_w[g] = tensors[4 + 2 * static_cast<std::size_t>(g)];
    model.head_b[g] = tensors[5 + 2 * static_cast<std::size_t>(g)].col(0);
    if (model.head_w[g].rows() != 2 * model.group_dims[g])
      throw CorruptionError("model head shape disagrees with header k");
  }
  if (model.w1.rows() != model.w2.rows() || model.w2.rows() != model.w2.cols())
    throw CorruptionError("model hidden shapes inconsistent");
  return model;
}

CodingState reconstruct_coding_state(const CompressedScene& scene, int threads) {
  const ContainerHeader& h = scene.header;
  if (h.anchor_count == 0) throw CorruptionError("container declares zero anchors");
  if (h.offsets_per_anchor == 0 || h.knn_k == 0 || h.channels == 0 ||
      h.resolution % 8 != 0 || h.resolution == 0)
    throw CorruptionError("container header fields invalid");

  CodingState st;
  st.quant.feature = static_cast<double>(h.quant_steps[0]);
  st.quant.scaling = static_cast<double>(h.quant_steps[1]);
  st.quant.offsets = static_cast<double>(h.quant_steps[2]);
  st.quant.validate();
  st.knn_k = static_cast<int>(h.knn_k);
  st.offsets_per_anchor = static_cast<int>(h.offsets_per_anchor);

  const Section& pos = scene.require(SectionId::kPositions);
  st.positions = parse_positions_section({pos.bytes.data(), pos.bytes.size()},
                                         h.anchor_count);

  const Section& masks = scene.require(SectionId::kMasks);
  MasksInfo mi = parse_masks_section({masks.bytes.data(), masks.bytes.size()},
                                     h.anchor_count, h.offsets_per_anchor);
  st.slot_mask = std::move(mi.slot_mask);
  for (std::uint64_t i = 0; i < mi.original_count; ++i)
    if (mi.anchor_bits[i]) st.survivor_map.push_back(static_cast<Eigen::Index>(i));

  const Section& planes = scene.require(SectionId::kPlanes);
  TriPlaneGrid latent;
  std::array<ConvLayer, 3> decoder;
  parse_planes_section({planes.bytes.data(), planes.bytes.size()}, latent, decoder);
  if (latent.resolution * 8 != static_cast<int>(h.resolution) ||
      latent.channels != static_cast<int>(h.channels))
    throw CorruptionError("planes section disagrees with header dimensions");
  PlaneAutoencoder dec_only;
  dec_only.channels = latent.channels;
  dec_only.decoder = std::move(decoder);
  st.planes = decode_planes(latent, dec_only);

  const Section& model = scene.require(SectionId::kModel);
  st.model = parse_model_section({model.bytes.data(), model.bytes.size()},
                                 st.offsets_per_anchor);
  if (st.model.input_dim() != context_dim(st.knn_k, st.planes.channels))
    throw CorruptionError("model input dim disagrees with context layout");

  st.params = contract_params(scene_bounds(st.positions));
  const KnnIndex index(st.positions);

  // (mu, sigma) for every anchor before any attribute decoding; pure
  // per-anchor work, deterministic under any thread count.
  const Eigen::Index n = st.positions.rows();
  st.gaussians.resize(static_cast<std::size_t>(n));
  parallel_chunks(n, threads, [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      const Eigen::VectorXd ctx =
          assemble_context(st.positions, st.planes, st.params, index, i, st.knn_k);
      model_forward(st.model, ctx, nullptr, &st.gaussians[static_cast<std::size_t>(i)]);
    }
  });
  return st;
}

namespace {

struct GroupPlan {
  Group group;
  double q = 0.0;
  std::vector<std::pair<Eigen::Index, int>> coords;  // (survivor anchor, dim)
};

GroupPlan make_plan(const CodingState& st, Group g) {
  GroupPlan plan;
  plan.group = g;
  plan.q = st.quant.step(g);
  const Eigen::Index n = st.positions.rows();
  const int k = st.offsets_per_anchor;
  if (g == Group::kFeature) {
    for (Eigen::Index a = 0; a < n; ++a)
      for (int j = 0; j < kFeatureDim; ++j) plan.coords.emplace_back(a, j);
  } else if (g == Group::kScaling) {
    for (Eigen::Index a = 0; a < n; ++a)
      for (int j = 0; j < 3; ++j) plan.coords.emplace_back(a, j);
  } else {
    for (Eigen::Index a = 0; a < n; ++a)
      for (int slot = 0; slot < k; ++slot) {
        if (!st.slot_mask[static_cast<std::size_t>(a) * k + slot]) continue;
        for (int axis = 0; axis < 3; ++axis)
          plan.coords.emplace_back(a, 3 * slot + axis);
      }
  }
  return plan;
}

ModelProvider plan_provider(const CodingState& st, const GroupPlan& plan) {
  const int gi = static_cast<int>(plan.group);
  return [&st, &plan, gi](std::size_t i) {
    const auto [anchor, dim] = plan.coords[i];
    const GroupGaussians& gg = st.gaussians[static_cast<std::size_t>(anchor)];
    return discretize_bin_model(gg.mu[gi](dim), gg.sigma[gi](dim), plan.q);
  };
}

double plan_estimate_bits(const CodingState& st, const GroupPlan& plan,
                          std::span<const long long> symbols) {
  const int gi = static_cast<int>(plan.group);
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto [anchor, dim] = plan.coords[i];
    const GroupGaussians& gg = st.gaussians[static_cast<std::size_t>(anchor)];
    bits += bits_from_probability(
        coeff_probability(symbols[i], gg.mu[gi](dim), gg.sigma[gi](dim), plan.q));
  }
  return bits;
}

SectionId group_section_id(Group g) {
  switch (g) {
    case Group::kFeature: return SectionId::kFeature;
    case Group::kScaling: return SectionId::kScaling;
    default: return SectionId::kOffsets;
  }
}

struct AttributeSection {
  std::uint64_t symbol_count = 0;
  std::uint64_t table_hash = 0;
  double estimate_bits = 0.0;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> build_attribute_section(const AttributeSection& s) {
  ByteWriter w;
  w.u64(s.symbol_count);
  w.u64(s.table_hash);
  w.f64(s.estimate_bits);
  w.u64(s.payload.size());
  w.bytes({s.payload.data(), s.payload.size()});
  return w.take();
}

AttributeSection parse_attribute_section(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  AttributeSection s;
  s.symbol_count = r.u64();
  s.table_hash = r.u64();
  s.estimate_bits = r.f64();
  const std::uint64_t payload_size = r.u64();
  if (payload_size != r.remaining())
    throw CorruptionError("attribute section payload size mismatch");
  const auto span = r.bytes(payload_size);
  s.payload.assign(span.begin(), span.end());
  return s;
}

double group_value(const AnchorCloud& cloud, Group g, Eigen::Index anchor, int dim) {
  switch (g) {
    case Group::kFeature: return cloud.features(anchor, dim);
    case Group::kScaling: return cloud.scalings(anchor, dim);
    default: return cloud.offsets(anchor, dim);
  }
}

}  // namespace

CompressedScene compress_scene(const AnchorCloud& cloud, const TrainedState& state,
                               int threads, CodecStats* stats) {
  validate_cloud(cloud);
  if (!state.trained) throw ValidationError("compress_scene requires a trained state");
  validate_state(state, cloud.anchor_count(), cloud.offsets_per_anchor);
  const QuantConfig quant = normalized_quant(state.quant);
  quant.validate();

  const PruneResult prune = apply_masks(cloud, state.masks);
  const QuantizedPositions qp = quantize_positions(prune.cloud.positions);

  CompressedScene scene;
  scene.header.anchor_count = static_cast<std::uint64_t>(prune.cloud.anchor_count());
  scene.header.offsets_per_anchor = static_cast<std::uint32_t>(cloud.offsets_per_anchor);
  scene.header.knn_k = static_cast<std::uint32_t>(state.knn_k);
  scene.header.resolution = static_cast<std::uint32_t>(state.grid.resolution);
  scene.header.channels = static_cast<std::uint32_t>(state.grid.channels);
  scene.header.quant_steps = {static_cast<float>(quant.feature),
                              static_cast<float>(quant.scaling),
                              static_cast<float>(quant.offsets)};

  scene.sections.push_back({SectionId::kPositions, build_positions_section(qp)});
  scene.sections.push_back(
      {SectionId::kPlanes,
       build_planes_section(encode_planes(state.grid, state.ae), state.ae)});
  scene.sections.push_back({SectionId::kModel, build_model_section(state.model)});

  std::vector<std::uint8_t> anchor_keep(static_cast<std::size_t>(cloud.anchor_count()), 0);
  for (Eigen::Index idx : prune.index_map) anchor_keep[static_cast<std::size_t>(idx)] = 1;
  scene.sections.push_back(
      {SectionId::kMasks,
       build_masks_section(static_cast<std::uint64_t>(cloud.anchor_count()), anchor_keep,
                           prune.slot_mask)});

  // The encoder codes against the decoder's view of the data: everything it
  // just serialized, parsed back and evaluated through the shared path.
  const CodingState st = reconstruct_coding_state(scene, threads);

  std::array<AttributeSection, 3> attr_sections;
  parallel_chunks(3, std::min(threads, 3), [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t gi = begin; gi < end; ++gi) {
      const Group g = kGroups[static_cast<std::size_t>(gi)];
      const GroupPlan plan = make_plan(st, g);
      std::vector<long long> symbols(plan.coords.size());
      for (std::size_t i = 0; i < plan.coords.size(); ++i) {
        const auto [anchor, dim] = plan.coords[i];
        symbols[i] = quantize_symbol(group_value(prune.cloud, g, anchor, dim), plan.q);
      }
      AttributeSection& out = attr_sections[static_cast<std::size_t>(gi)];
      out.symbol_count = symbols.size();
      out.estimate_bits = plan_estimate_bits(st, plan, symbols);
      out.payload = encode_symbols(symbols, plan_provider(st, plan), &out.table_hash);
    }
  });
  for (int gi = 0; gi < 3; ++gi)
    scene.sections.push_back({group_section_id(kGroups[static_cast<std::size_t>(gi)]),
                              build_attribute_section(attr_sections[gi])});

  if (stats != nullptr) *stats = collect_stats(scene);
  return scene;
}

DecodedScene decompress_scene(const CompressedScene& scene, int threads) {
  const CodingState st = reconstruct_coding_state(scene, threads);
  const Eigen::Index n = st.positions.rows();
  const int k = st.offsets_per_anchor;

  DecodedScene out;
  out.survivor_map = st.survivor_map;
  out.cloud.offsets_per_anchor = k;
  out.cloud.positions = st.positions;
  out.cloud.features.setZero(n, kFeatureDim);
  out.cloud.scalings.setZero(n, 3);
  out.cloud.offsets.setZero(n, 3 * k);

  parallel_chunks(3, std::min(threads, 3), [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t gi = begin; gi < end; ++gi) {
      const Group g = kGroups[static_cast<std::size_t>(gi)];
      const Section& section = scene.require(group_section_id(g));
      const AttributeSection attr =
          parse_attribute_section({section.bytes.data(), section.bytes.size()});
      const GroupPlan plan = make_plan(st, g);
      if (attr.symbol_count != plan.coords.size())
        throw CorruptionError("attribute section symbol count mismatch");
      std::uint64_t hash = 0;
      const std::vector<long long> symbols =
          decode_symbols({attr.payload.data(), attr.payload.size()},
                         plan_provider(st, plan), attr.symbol_count, &hash);
      if (hash != attr.table_hash)
        throw CorruptionError("probability table hash mismatch between encoder and decoder");
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        const auto [anchor, dim] = plan.coords[i];
        const double value = dequantize_symbol(symbols[i], plan.q);
        if (g == Group::kFeature)
          out.cloud.features(anchor, dim) = value;
        else if (g == Group::kScaling)
          out.cloud.scalings(anchor, dim) = value;
        else
          out.cloud.offsets(anchor, dim) = value;
      }
    }
  });

  out.stats = collect_stats(scene);
  return out;
}

CodecStats collect_stats(const CompressedScene& scene) {
  CodecStats stats;
  stats.anchor_count = scene.header.anchor_count;
  for (const Section& s : scene.sections) {
    SectionStats ss;
    ss.name = section_name(s.id);
    ss.bytes = s.bytes.size();
    if (s.id == SectionId::kFeature || s.id == SectionId::kScaling ||
        s.id == SectionId::kOffsets) {
      const AttributeSection attr = parse_attribute_section({s.bytes.data(), s.bytes.size()});
      ss.symbols = attr.symbol_count;
      ss.estimate_bits = attr.estimate_bits;
      stats.attribute_estimate_bits += attr.estimate_bits;
      stats.attribute_payload_bytes += attr.payload.size();
    }
    stats.sections.push_back(std::move(ss));
  }
  stats.total_bytes = scene.serialized_size();
  if (stats.anchor_count > 0)
    stats.bits_per_anchor = 8.0 * static_cast<double>(stats.total_bytes) /
                            static_cast<double>(stats.anchor_count);
  return stats;
}

}  // namespace tpc
