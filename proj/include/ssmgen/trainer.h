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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssmgen/checkpoint.h"
#include "ssmgen/config.h"
#include "ssmgen/model.h"
#include "ssmgen/optimizer.h"
#include "ssmgen/rng.h"

namespace ssmgen {

struct LearningRates {
  double visual = 0.0;
  double other = 0.0;
};

LearningRates lr_at_epoch(const TrainConfig& cfg, std::size_t epoch);

struct TrainingSample {
  std::string id;
  Tensor features;        // raw [S, feature_dim]
  TokenSequence tokens;   // canonical BOS ... EOS
};

struct EpochLog {
  std::size_t epoch = 0;
  LearningRates lr;
  double train_loss = 0.0;  // token-weighted mean over the epoch
  std::optional<double> val_bleu4;
  bool improved = false;
};

// Ids other than the special tokens, as strings, for BLEU on id sequences.
std::vector<std::string> id_tokens(std::span<const TokenId> tokens);

class Trainer {
 public:
  Trainer(RunConfig cfg, ReportModel model);

  // Rebuilds model, optimizer, RNG and selection state from a checkpoint.
  static Trainer restore(const Checkpoint& ckpt);

  const RunConfig& config() const { return cfg_; }
  // Extends or shortens the schedule of a restored run.
  void set_epochs(std::size_t epochs) { cfg_.train.epochs = epochs; }
  const ReportModel& model() const { return model_; }
  std::size_t epoch() const { return epoch_; }
  const OptimState& optimizer() const { return optim_; }
  double best_bleu4() const { return best_bleu4_; }
  const std::optional<Checkpoint>& best() const { return best_; }

  // One Adam update on the mean token NLL of the batch. Returns that loss.
  double train_batch(std::span<const TrainingSample* const> batch);

  // Shuffles, trains every batch, then scores greedy BLEU-4 on val when it
  // is non-empty. Without val every epoch replaces the retained checkpoint.
  EpochLog run_epoch(std::span<const TrainingSample> train, std::span<const TrainingSample> val);

  // Runs epochs until config().train.epochs have completed.
  std::vector<EpochLog> train(std::span<const TrainingSample> train,
                              std::span<const TrainingSample> val,
                              const std::function<void(const EpochLog&)>& on_epoch = {});

  // Mean token NLL without dropout or parameter updates.
  double evaluate_loss(std::span<const TrainingSample> samples) const;
  double validation_bleu4(std::span<const TrainingSample> samples) const;
  TokenSequence greedy(const Tensor& features) const;

  Checkpoint checkpoint() const;

 private:
  RunConfig cfg_;
  ReportModel model_;
  OptimState optim_;
  Rng rng_;
  std::size_t epoch_ = 0;
  double best_bleu4_ = -1.0;
  std::optional<Checkpoint> best_;
};

// Trainer RNG stream, distinct from parameter initialization.
std::uint64_t trainer_seed(std::uint64_t seed);

}  // namespace ssmgen
