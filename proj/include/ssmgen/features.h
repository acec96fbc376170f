// Copyright 2026 The ssmgen Authors. All Rights Reserved.
//
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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ssmgen/layers.h"
#include "ssmgen/tensor.h"

namespace ssmgen {

// S patch vectors of width d, row-major in patch order.
struct FeatureSequence {
  Tensor values;  // [S, d]

  std::size_t s() const { return values.dim(0); }
  std::size_t d() const { return values.dim(1); }
};

// Concatenates along S, e.g. the views of one study. Widths must agree.
FeatureSequence concat_features(const std::vector<FeatureSequence>& parts);

struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;  // row-major, height * width
};

// Binary (P5) or plain (P2) PGM, values scaled to [0, 1].
GrayImage read_pgm(const std::filesystem::path& path);

// Mean of every patch x patch cell, flattened row-major: [S, 1] with
// S = (h / patch) * (w / patch). Raises kGeometry unless patch divides both.
Tensor pool_patches(const GrayImage& image, std::size_t patch);

// Toy visual extractor: pooled cells projected to the model width.
FeatureSequence extract_features(const GrayImage& image, std::size_t patch, const Linear& proj);

// Feature file: "R2GF", u8 version = 1, u32 S, u32 d, then S*d little-endian
// float32 values, row-major.
inline constexpr std::uint8_t kFeatureFormatVersion = 1;

std::string encode_feature_file(const Tensor& values);
FeatureSequence decode_feature_file(std::string_view bytes);
void save_features(const std::filesystem::path& path, const FeatureSequence& features);
FeatureSequence load_features(const std::filesystem::path& path);

}  // namespace ssmgen
