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

#include "ssmgen/model.h"

#include "ssmgen/errors.h"
#include "ssmgen/ops.h"

namespace ssmgen {

bool is_canonical(std::span<const TokenId> tokens) {
  if (tokens.size() < 2 || tokens.front() != kBosId || tokens.back() != kEosId) return false;
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
    if (tokens[i] == kPadId || tokens[i] == kBosId || tokens[i] == kEosId) return false;
  }
  return true;
}

ReportModel ReportModel::create(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ReportModel m;
  m.cfg_ = cfg;
  m.visual_proj_ = Linear::create(cfg.feature_dim, cfg.d(), true, rng);
  m.encoder_ = MambaEncoder::create(cfg.encoder, rng);
  m.decoder_ = Decoder::create(cfg.decoder, rng);
  return m;
}

Tensor ReportModel::memory(const Tensor& raw_features) const {
  if (raw_features.rank() != 2 || raw_features.dim(1) != cfg_.feature_dim) {
    raise(ErrorCategory::kDimension, "expected features [S," + std::to_string(cfg_.feature_dim) +
                                         "], got " + shape_string(raw_features.shape()));
  }
  return encoder_.encode(visual_proj_(raw_features));
}

Tensor ReportModel::teacher_forced_logits(const Tensor& memory, std::span<const TokenId> tokens,
                                          const ForwardContext& ctx) const {
  if (tokens.size() < 2) raise(ErrorCategory::kContract, "teacher forcing needs >= 2 tokens");
  return decoder_.logits(memory, tokens.first(tokens.size() - 1), ctx);
}

NamedParameters ReportModel::parameters() const {
  NamedParameters out;
  visual_proj_.collect("visual.proj", out);
  encoder_.collect("encoder", out);
  decoder_.collect("decoder", out);
  return out;
}

NllSum nll_sum(const Tensor& logits, std::span<const TokenId> targets) {
  std::vector<double> weights(targets.size());
  std::size_t kept = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    weights[t] = targets[t] == kPadId ? 0.0 : 1.0;
    kept += targets[t] != kPadId;
  }
  return {weighted_nll(logits, targets, weights), kept};
}

Tensor nll_loss(const Tensor& logits, std::span<const TokenId> targets) {
  NllSum s = nll_sum(logits, targets);
  if (s.tokens == 0) raise(ErrorCategory::kContract, "nll_loss: every target position is PAD");
  return scale(s.total, 1.0 / static_cast<double>(s.tokens));
}

}  // namespace ssmgen
