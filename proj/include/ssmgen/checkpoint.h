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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ssmgen/layers.h"

namespace ssmgen {

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

// Binary layout, all integers little-endian:
//   "R2GC" | u8 version | u32 n + n bytes of key=value config text
//   | tensor table (parameters) | tensor table (optimizer state) | u64 rng
// A tensor table is u32 count, then per tensor: u32 name length, UTF-8
// name, u8 rank, rank x u32 dims, product(dims) x float32.
struct Checkpoint {
  std::string config_text;
  std::vector<StoredTensor> params;
  std::vector<StoredTensor> optimizer;
  std::uint64_t rng_state = 0;
};

inline constexpr std::uint8_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Checkpoint& ckpt);
// kBadMagic, kVersionMismatch, kTruncated or kSchema on malformed input.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::vector<StoredTensor> snapshot_parameters(const NamedParameters& params);

// Copies stored values into live parameters matched by position and name.
// Raises kShapeMismatch on any disagreement in count, name or shape.
void restore_parameters(const NamedParameters& params, const std::vector<StoredTensor>& stored);

}  // namespace ssmgen
