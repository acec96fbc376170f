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

#include "ssmgen/features.h"

#include <cctype>
#include <limits>

#include "ssmgen/errors.h"
#include "ssmgen/file_util.h"
#include "ssmgen/ops.h"

namespace ssmgen {

namespace {
constexpr std::string_view kFeatureMagic = "R2GF";
// Refuse payloads above 4 GiB.
constexpr std::uint64_t kMaxFeatureBytes = std::uint64_t{1} << 32;
}  // namespace

FeatureSequence concat_features(const std::vector<FeatureSequence>& parts) {
  std::vector<Tensor> values;
  for (const auto& p : parts) values.push_back(p.values);
  return {concat_rows(values)};
}

GrayImage read_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> std::size_t {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      raise(ErrorCategory::kSchema, "malformed PGM header in " + path.string());
    }
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
      if (v > (std::size_t{1} << 24)) raise(ErrorCategory::kDimensionOverflow, "PGM field too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    raise(ErrorCategory::kBadMagic, path.string() + " is not a P2/P5 PGM image");
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  GrayImage img;
  img.width = read_int();
  img.height = read_int();
  const std::size_t maxval = read_int();
  if (maxval == 0 || maxval > 255) raise(ErrorCategory::kSchema, "unsupported PGM maxval");
  const std::size_t n = img.width * img.height;
  img.pixels.resize(n);
  if (binary) {
    ++pos;  // single whitespace after maxval
    if (bytes.size() < pos + n) raise(ErrorCategory::kTruncated, "PGM pixel data truncated");
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<unsigned char>(bytes[pos + i]) / static_cast<double>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<double>(read_int()) / static_cast<double>(maxval);
    }
  }
  return img;
}

Tensor pool_patches(const GrayImage& image, std::size_t patch) {
  if (patch == 0 || image.height == 0 || image.width == 0 || image.height % patch != 0 ||
      image.width % patch != 0) {
    raise(ErrorCategory::kGeometry, "image " + std::to_string(image.height) + "x" +
                                        std::to_string(image.width) +
                                        " is not divisible into patches of " +
                                        std::to_string(patch));
  }
  const std::size_t rows = image.height / patch, cols = image.width / patch;
  std::vector<double> pooled(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t y = 0; y < patch; ++y)
        for (std::size_t x = 0; x < patch; ++x)
          acc += image.pixels[(r * patch + y) * image.width + c * patch + x];
      pooled[r * cols + c] = acc / static_cast<double>(patch * patch);
    }
  return Tensor::from_data({rows * cols, 1}, std::move(pooled));
}

FeatureSequence extract_features(const GrayImage& image, std::size_t patch, const Linear& proj) {
  return {proj(pool_patches(image, patch))};
}

std::string encode_feature_file(const Tensor& values) {
  if (values.rank() != 2) {
    raise(ErrorCategory::kDimension, "features must be [S,d], got " + shape_string(values.shape()));
  }
  ByteWriter w;
  w.raw(kFeatureMagic);
  w.u8(kFeatureFormatVersion);
  w.u32(static_cast<std::uint32_t>(values.dim(0)));
  w.u32(static_cast<std::uint32_t>(values.dim(1)));
  for (double v : values.data()) w.f32(static_cast<float>(v));
  return w.bytes();
}

FeatureSequence decode_feature_file(std::string_view bytes) {
  if (bytes.size() < kFeatureMagic.size() || bytes.substr(0, 4) != kFeatureMagic) {
    raise(ErrorCategory::kBadMagic, "feature file does not start with R2GF");
  }
  ByteReader r(bytes.substr(4));
  const std::uint8_t version = r.u8();
  if (version != kFeatureFormatVersion) {
    raise(ErrorCategory::kVersionMismatch,
          "feature file version " + std::to_string(version) + " is not supported");
  }
  const std::uint64_t s = r.u32();
  const std::uint64_t d = r.u32();
  if (s == 0 || d == 0) raise(ErrorCategory::kSchema, "feature file has an empty dimension");
  // s, d < 2^32 so s * d * 4 < 2^66 may wrap: compare before multiplying.
  if (s > kMaxFeatureBytes / 4 / d) {
    raise(ErrorCategory::kDimensionOverflow, "feature file dimensions " + std::to_string(s) +
                                                 "x" + std::to_string(d) + " overflow");
  }
  const std::uint64_t payload = s * d * 4;
  if (r.remaining() < payload) {
    raise(ErrorCategory::kTruncated, "feature payload has " + std::to_string(r.remaining()) +
                                         " bytes, expected " + std::to_string(payload));
  }
  if (r.remaining() > payload) raise(ErrorCategory::kSchema, "trailing bytes after feature payload");
  std::vector<double> values(s * d);
  for (double& v : values) v = static_cast<double>(r.f32());
  return {Tensor::from_data({static_cast<std::size_t>(s), static_cast<std::size_t>(d)},
                            std::move(values))};
}

void save_features(const std::filesystem::path& path, const FeatureSequence& features) {
  atomic_write(path, encode_feature_file(features.values));
}

FeatureSequence load_features(const std::filesystem::path& path) {
  return decode_feature_file(read_file(path));
}

}  // namespace ssmgen
