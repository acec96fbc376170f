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

#include "ssmgen/checkpoint.h"

#include "ssmgen/errors.h"
#include "ssmgen/file_util.h"

namespace ssmgen {

namespace {

constexpr std::string_view kCheckpointMagic = "R2GC";

void write_table(ByteWriter& w, const std::vector<StoredTensor>& table) {
  w.u32(static_cast<std::uint32_t>(table.size()));
  for (const StoredTensor& t : table) {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.raw(t.name);
    w.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t.values) w.f32(v);
  }
}

std::vector<StoredTensor> read_table(ByteReader& r) {
  const std::uint32_t count = r.u32();
  std::vector<StoredTensor> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = std::string(r.raw(r.u32()));
    const std::uint8_t rank = r.u8();
    std::uint64_t n = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      t.shape.push_back(r.u32());
      n *= t.shape.back();
      if (n > r.remaining()) {
        raise(ErrorCategory::kTruncated, "tensor '" + t.name + "' larger than remaining payload");
      }
    }
    if (n * 4 > r.remaining()) {
      raise(ErrorCategory::kTruncated, "tensor '" + t.name + "' payload truncated");
    }
    t.values.resize(n);
    for (float& v : t.values) v = r.f32();
    table.push_back(std::move(t));
  }
  return table;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u8(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.config_text.size()));
  w.raw(ckpt.config_text);
  write_table(w, ckpt.params);
  write_table(w, ckpt.optimizer);
  w.u64(ckpt.rng_state);
  return w.bytes();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kCheckpointMagic) {
    raise(ErrorCategory::kBadMagic, "checkpoint does not start with R2GC");
  }
  ByteReader r(bytes.substr(4));
  const std::uint8_t version = r.u8();
  if (version != kCheckpointVersion) {
    raise(ErrorCategory::kVersionMismatch, "checkpoint version " + std::to_string(version) +
                                               ", expected " + std::to_string(kCheckpointVersion));
  }
  Checkpoint ckpt;
  ckpt.config_text = std::string(r.raw(r.u32()));
  ckpt.params = read_table(r);
  ckpt.optimizer = read_table(r);
  ckpt.rng_state = r.u64();
  if (r.remaining() != 0) raise(ErrorCategory::kSchema, "trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  atomic_write(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

std::vector<StoredTensor> snapshot_parameters(const NamedParameters& params) {
  std::vector<StoredTensor> out;
  out.reserve(params.size());
  for (const auto& [name, t] : params) {
    StoredTensor s{name, t.shape(), {}};
    s.values.reserve(t.numel());
    for (double v : t.data()) s.values.push_back(static_cast<float>(v));
    out.push_back(std::move(s));
  }
  return out;
}

void restore_parameters(const NamedParameters& params, const std::vector<StoredTensor>& stored) {
  if (params.size() != stored.size()) {
    raise(ErrorCategory::kShapeMismatch, "checkpoint holds " + std::to_string(stored.size()) +
                                             " tensors, model has " +
                                             std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, t] = params[i];
    if (stored[i].name != name || stored[i].shape != t.shape()) {
      raise(ErrorCategory::kShapeMismatch,
            "checkpoint tensor '" + stored[i].name + "' " + shape_string(stored[i].shape) +
                " does not match model tensor '" + name + "' " + shape_string(t.shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].second;
    auto dst = t.mutable_data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<double>(stored[i].values[k]);
  }
}

}  // namespace ssmgen
