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

#include "tpc/image_io.hpp"

#include <zlib.h>

#include <cstdlib>
#include <cstring>

#include "tpc/errors.hpp"
#include "tpc/serialize.hpp"

namespace tpc {

namespace {

const std::uint8_t kPngSignature[8] = {0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A};

std::vector<std::uint8_t> zlib_inflate(std::span<const std::uint8_t> in,
                                       std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit(&zs) != Z_OK) throw IoError("zlib init failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.avail_out != 0)
    throw FormatError("PNG: compressed image data is corrupt or truncated");
  return out;
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

Image load_png(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 8;
  auto read_u32 = [&](std::size_t at) -> std::uint32_t {
    return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
           (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
  };

  std::uint32_t width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  std::vector<std::uint8_t> idat;
  bool saw_ihdr = false, saw_iend = false;

  while (pos + 8 <= bytes.size() && !saw_iend) {
    const std::uint32_t length = read_u32(pos);
    if (pos + 12 + length > bytes.size()) throw FormatError("PNG: truncated chunk");
    const char type[5] = {static_cast<char>(bytes[pos + 4]), static_cast<char>(bytes[pos + 5]),
                          static_cast<char>(bytes[pos + 6]), static_cast<char>(bytes[pos + 7]),
                          0};
    const std::size_t data = pos + 8;
    if (std::strcmp(type, "IHDR") == 0) {
      if (length != 13) throw FormatError("PNG: bad IHDR");
      width = read_u32(data);
      height = read_u32(data + 4);
      bit_depth = bytes[data + 8];
      color_type = bytes[data + 9];
      if (bytes[data + 10] != 0 || bytes[data + 11] != 0)
        throw FormatError("PNG: unsupported compression/filter method");
      if (bytes[data + 12] != 0) throw FormatError("PNG: interlaced images not supported");
      saw_ihdr = true;
    } else if (std::strcmp(type, "PLTE") == 0 || color_type == 3) {
      throw FormatError("PNG: palette images not supported");
    } else if (std::strcmp(type, "IDAT") == 0) {
      idat.insert(idat.end(), bytes.begin() + static_cast<std::ptrdiff_t>(data),
                  bytes.begin() + static_cast<std::ptrdiff_t>(data + length));
    } else if (std::strcmp(type, "IEND") == 0) {
      saw_iend = true;
    }
    pos += 12 + length;
  }
  if (!saw_ihdr || width == 0 || height == 0) throw FormatError("PNG: missing IHDR");
  if (bit_depth != 8 && bit_depth != 16)
    throw FormatError("PNG: only 8-bit and 16-bit depths supported");

  int source_channels;
  switch (color_type) {
    case 0: source_channels = 1; break;
    case 2: source_channels = 3; break;
    case 4: source_channels = 2; break;
    case 6: source_channels = 4; break;
    default: throw FormatError("PNG: unsupported color type");
  }

  const int bytes_per_sample = bit_depth / 8;
  const std::size_t bpp = static_cast<std::size_t>(source_channels) * bytes_per_sample;
  const std::size_t stride = bpp * width;
  std::vector<std::uint8_t> raw = zlib_inflate({idat.data(), idat.size()},
                                               (stride + 1) * height);

  // Undo per-scanline filtering in place.
  std::vector<std::uint8_t> prior(stride, 0);
  std::vector<std::uint8_t> line(stride, 0);
  const bool has_alpha = color_type == 4 || color_type == 6;
  const int keep_channels = source_channels - (has_alpha ? 1 : 0);
  Image img(static_cast<std::size_t>(keep_channels));
  for (auto& ch : img) ch.resize(height, width);
  const double scale = bit_depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;

  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t* src = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
    const int filter = src[0];
    for (std::size_t x = 0; x < stride; ++x) {
      const int cur = src[1 + x];
      const int left = x >= bpp ? line[x - bpp] : 0;
      const int up = prior[x];
      const int ul = x >= bpp ? prior[x - bpp] : 0;
      int value;
      switch (filter) {
        case 0: value = cur; break;
        case 1: value = cur + left; break;
        case 2: value = cur + up; break;
        case 3: value = cur + (left + up) / 2; break;
        case 4: value = cur + paeth(left, up, ul); break;
        default: throw FormatError("PNG: unknown filter type");
      }
      line[x] = static_cast<std::uint8_t>(value & 0xFF);
    }
    for (std::uint32_t x = 0; x < width; ++x) {
      for (int c = 0; c < keep_channels; ++c) {
        const std::size_t at = (static_cast<std::size_t>(x) * source_channels + c) *
                               static_cast<std::size_t>(bytes_per_sample);
        std::uint32_t v = line[at];
        if (bit_depth == 16) v = (v << 8) | line[at + 1];  // network order
        img[static_cast<std::size_t>(c)](y, x) = static_cast<double>(v) * scale;
      }
    }
    std::swap(prior, line);
  }
  return img;
}

Image load_raw(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.expect_tag("TCGI")) throw FormatError("raw image: bad magic");
  const std::uint32_t width = r.u32();
  const std::uint32_t height = r.u32();
  const std::uint32_t channels = r.u32();
  if (width == 0 || height == 0 || channels == 0)
    throw FormatError("raw image: empty dimensions");
  Image img(channels);
  for (auto& ch : img) {
    ch.resize(height, width);
    for (std::uint32_t y = 0; y < height; ++y)
      for (std::uint32_t x = 0; x < width; ++x) ch(y, x) = r.f32();
  }
  if (!r.at_end()) throw FormatError("raw image: trailing bytes");
  return img;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0)
    return load_png({bytes.data(), bytes.size()});
  return load_raw({bytes.data(), bytes.size()});
}

void save_image_raw(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw ValidationError("cannot save an empty image");
  ByteWriter w;
  w.tag("TCGI");
  w.u32(static_cast<std::uint32_t>(img[0].cols()));
  w.u32(static_cast<std::uint32_t>(img[0].rows()));
  w.u32(static_cast<std::uint32_t>(img.size()));
  for (const auto& ch : img)
    for (Eigen::Index y = 0; y < ch.rows(); ++y)
      for (Eigen::Index x = 0; x < ch.cols(); ++x) w.f32(static_cast<float>(ch(y, x)));
  write_file_bytes(path, w.data());
}

Image crop_to_multiple(const Image& img, int multiple) {
  if (img.empty()) throw ValidationError("cannot crop an empty image");
  const Eigen::Index rows = img[0].rows() / multiple * multiple;
  const Eigen::Index cols = img[0].cols() / multiple * multiple;
  if (rows == 0 || cols == 0)
    throw ValidationError("image too small for the requested transform");
  Image out(img.size());
  for (std::size_t c = 0; c < img.size(); ++c) out[c] = img[c].topLeftCorner(rows, cols);
  return out;
}

}  // namespace tpc
