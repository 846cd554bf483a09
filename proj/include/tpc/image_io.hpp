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

#include <filesystem>

#include "tpc/wavelet.hpp"

namespace tpc {

// Loads an 8- or 16-bit PNG (gray, gray+alpha, RGB, RGBA; no palette, no
// interlacing) or a raw fp32 planar image ("TCGI", u32 width, u32 height,
// u32 channels, then channel planes row-major, little-endian). PNG samples
// are normalized to [0,1]; an alpha channel is dropped.
Image load_image(const std::filesystem::path& path);

// Raw fp32 planar writer, mostly for fixtures.
void save_image_raw(const Image& img, const std::filesystem::path& path);

// Crops to the largest top-left region whose sides are divisible by
// `multiple`; throws ValidationError when nothing remains.
Image crop_to_multiple(const Image& img, int multiple);

}  // namespace tpc
