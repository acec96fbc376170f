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
#include <span>
#include <vector>

#include "ssmgen/config.h"
#include "ssmgen/decoder.h"
#include "ssmgen/features.h"
#include "ssmgen/layers.h"
#include "ssmgen/ssm.h"
#include "ssmgen/token_ids.h"

namespace ssmgen {

// Vocabulary ids; canonical form is BOS ... EOS with no interior PAD.
using TokenSequence = std::vector<TokenId>;

bool is_canonical(std::span<const TokenId> tokens);

// Parameters whose name starts with this prefix form the visual-extractor
// learning-rate group.
inline constexpr std::string_view kVisualPrefix = "visual.";

// Feature projection -> selective-SSM encoder -> Transformer decoder.
class ReportModel {
 public:
  ReportModel() = default;
  static ReportModel create(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const Linear& visual_projection() const { return visual_proj_; }
  const MambaEncoder& encoder() const { return encoder_; }
  const Decoder& decoder() const { return decoder_; }

  // Raw features [S, feature_dim] -> decoder memory [S, d].
  Tensor memory(const Tensor& raw_features) const;

  // Teacher forcing: input tokens[0..T-2], logits [T-1, vocab] predicting
  // tokens[1..T-1].
  Tensor teacher_forced_logits(const Tensor& memory, std::span<const TokenId> tokens,
                               const ForwardContext& ctx) const;

  NamedParameters parameters() const;

 private:
  ModelConfig cfg_;
  Linear visual_proj_;
  MambaEncoder encoder_;
  Decoder decoder_;
};

// Sum of -log softmax(logits)[target] over non-PAD targets, plus the count.
struct NllSum {
  Tensor total;
  std::size_t tokens = 0;
};
NllSum nll_sum(const Tensor& logits, std::span<const TokenId> targets);

// Mean over non-PAD positions of -log softmax(logits)[target]. Raises a
// contract error when every position is PAD.
Tensor nll_loss(const Tensor& logits, std::span<const TokenId> targets);

}  // namespace ssmgen
