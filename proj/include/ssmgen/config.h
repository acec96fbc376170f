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
#include <map>
#include <string>
#include <string_view>

#include "ssmgen/decoder.h"
#include "ssmgen/ssm.h"

namespace ssmgen {

struct ModelConfig {
  // Width of the raw visual features before projection (1 for pooled images).
  std::size_t feature_dim = 2048;
  EncoderConfig encoder;
  DecoderConfig decoder;

  std::size_t d() const { return encoder.d; }
  void validate() const;
};

struct TrainConfig {
  double lr_visual = 5e-5;
  double lr_other = 1e-4;
  double decay = 0.8;  // multiplicative, per epoch
  std::size_t epochs = 50;
  std::size_t batch_size = 8;
  std::uint64_t seed = 42;

  void validate() const;
};

struct GenerationConfig {
  std::size_t beam_size = 3;
  double length_norm = 0.0;
};

struct DataConfig {
  std::size_t min_freq = 3;
  std::size_t image_patch = 16;
};

// Everything a run needs, persisted as flat key=value text:
//
//   # comment
//   d_model = 512
//
// Keys: d_model d_state d_conv expand encoder_layers decoder_layers heads
// d_ff dropout vocab_size max_len feature_dim lr_visual lr_other lr_decay
// epochs batch_size seed beam_size length_norm min_freq image_patch.
// Missing keys keep their defaults; unknown keys are a config error.
// max_len bounds a token sequence including BOS and EOS.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  GenerationConfig generation;
  DataConfig data;

  std::size_t max_len() const { return model.decoder.max_len; }

  std::string to_text() const;
  // Keys with the "state." prefix are skipped; they carry trainer state in
  // checkpoints.
  static RunConfig from_text(std::string_view text);
  // kConfigNotFound when the file is absent.
  static RunConfig load(const std::filesystem::path& path);
};

// Parses key=value lines into an ordered map. Raises kConfig on lines
// without '=' or duplicate keys.
std::map<std::string, std::string> parse_key_values(std::string_view text);

}  // namespace ssmgen
