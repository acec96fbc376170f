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
#include <map>
#include <span>
#include <vector>

#include "ssmgen/decoder.h"
#include "ssmgen/model.h"

namespace ssmgen {

struct Hypothesis {
  TokenSequence tokens;  // starts with BOS
  double log_prob = 0.0;
  bool finished = false;  // last token is EOS
};

// Autoregressive next-token distribution. Entries of -inf are never
// expanded.
class StepModel {
 public:
  virtual ~StepModel() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual std::vector<double> next_log_probs(std::span<const TokenId> prefix) = 0;
};

struct BeamSearchOptions {
  std::size_t beam_size = 3;
  // Maximum number of tokens generated after BOS (EOS included).
  std::size_t max_len = 59;
  // Final ranking uses log_prob / length^length_norm, length = tokens after BOS.
  double length_norm = 0.0;
};

double normalized_score(const Hypothesis& h, double length_norm);

// Keeps the top beam_size expansions per step, ordered by log_prob and then
// lexicographically smallest tokens. Expansions ending in EOS retire to a
// pool; live hypotheses left at max_len join the pool unfinished. Returns the
// pool's best by normalized score, ties to the smallest token sequence.
Hypothesis beam_search(StepModel& model, const BeamSearchOptions& options);

// Argmax decoding; ties resolve to the smallest token id.
Hypothesis greedy_decode(StepModel& model, std::size_t max_len);

// Adapts a trained model plus one encoded memory to StepModel. PAD and BOS
// are never proposed. Decoder states are cached per prefix so each beam
// extension costs one incremental step.
class ModelStepper : public StepModel {
 public:
  ModelStepper(const ReportModel& model, Tensor memory);

  std::size_t vocab_size() const override;
  std::vector<double> next_log_probs(std::span<const TokenId> prefix) override;

 private:
  struct Entry {
    Decoder::State state;
    std::vector<double> log_probs;
  };
  const Entry& lookup(const TokenSequence& prefix);

  const ReportModel& model_;
  Tensor memory_;
  Decoder::State initial_;
  std::map<TokenSequence, Entry> cache_;
};

}  // namespace ssmgen
