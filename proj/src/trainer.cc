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

#include "ssmgen/trainer.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ssmgen/beam_search.h"
#include "ssmgen/errors.h"
#include "ssmgen/metrics.h"
#include "ssmgen/ops.h"

namespace ssmgen {

namespace {

constexpr const char* kEpochKey = "state.epoch";
constexpr const char* kBestKey = "state.best_bleu4";

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

std::vector<double> group_rates(const NamedParameters& params, const LearningRates& lr) {
  std::vector<double> rates;
  rates.reserve(params.size());
  for (const auto& [name, _] : params) {
    rates.push_back(name.starts_with(kVisualPrefix) ? lr.visual : lr.other);
  }
  return rates;
}

StoredTensor stored_moment(const std::string& name, const Shape& shape,
                           const std::vector<double>& values) {
  StoredTensor t{name, shape, {}};
  t.values.reserve(values.size());
  for (double v : values) t.values.push_back(static_cast<float>(v));
  return t;
}

}  // namespace

LearningRates lr_at_epoch(const TrainConfig& cfg, std::size_t epoch) {
  const double f = std::pow(cfg.decay, static_cast<double>(epoch));
  return {cfg.lr_visual * f, cfg.lr_other * f};
}

std::vector<std::string> id_tokens(std::span<const TokenId> tokens) {
  std::vector<std::string> out;
  for (TokenId t : tokens) {
    if (t >= kNumSpecialTokens) out.push_back(std::to_string(t));
  }
  return out;
}

std::uint64_t trainer_seed(std::uint64_t seed) { return seed ^ 0x5DEECE66DULL; }

Trainer::Trainer(RunConfig cfg, ReportModel model)
    : cfg_(std::move(cfg)), model_(std::move(model)), rng_(trainer_seed(cfg_.train.seed)) {
  cfg_.train.validate();
}

double Trainer::train_batch(std::span<const TrainingSample* const> batch) {
  if (batch.empty()) raise(ErrorCategory::kContract, "train_batch: empty batch");
  NamedParameters params = model_.parameters();
  for (auto& [_, p] : params) p.zero_grad();

  std::size_t batch_tokens = 0;
  for (const TrainingSample* s : batch) {
    for (std::size_t i = 1; i < s->tokens.size(); ++i) batch_tokens += s->tokens[i] != kPadId;
  }
  if (batch_tokens == 0) raise(ErrorCategory::kContract, "train_batch: no target tokens");

  const ForwardContext ctx{true, &rng_};
  const double inv = 1.0 / static_cast<double>(batch_tokens);
  double loss = 0.0;
  for (const TrainingSample* s : batch) {
    const Tensor memory = model_.memory(s->features);
    const Tensor logits = model_.teacher_forced_logits(memory, s->tokens, ctx);
    const std::span<const TokenId> targets(s->tokens.data() + 1, s->tokens.size() - 1);
    const Tensor scaled = scale(nll_sum(logits, targets).total, inv);
    loss += scaled.item();
    scaled.backward();
  }
  if (!std::isfinite(loss)) raise(ErrorCategory::kNumeric, "non-finite loss");

  std::vector<Tensor> tensors;
  tensors.reserve(params.size());
  for (const auto& [_, p] : params) tensors.push_back(p);
  const std::vector<double> rates = group_rates(params, lr_at_epoch(cfg_.train, epoch_));
  AdamOptions options;
  options.float32_state = true;
  adam_step(tensors, optim_, rates, options);
  return loss;
}

EpochLog Trainer::run_epoch(std::span<const TrainingSample> train,
                            std::span<const TrainingSample> val) {
  if (train.empty()) raise(ErrorCategory::kContract, "training set is empty");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng_.below(i)]);

  EpochLog log;
  log.epoch = epoch_;
  log.lr = lr_at_epoch(cfg_.train, epoch_);
  const std::size_t bs = cfg_.train.batch_size;
  double weighted = 0.0;
  std::size_t tokens = 0;
  for (std::size_t start = 0, b = 0; start < order.size(); start += bs, ++b) {
    std::vector<const TrainingSample*> batch;
    std::size_t batch_tokens = 0;
    for (std::size_t k = start; k < std::min(order.size(), start + bs); ++k) {
      const TrainingSample& s = train[order[k]];
      batch.push_back(&s);
      for (std::size_t i = 1; i < s.tokens.size(); ++i) batch_tokens += s.tokens[i] != kPadId;
    }
    double loss = 0.0;
    try {
      loss = train_batch(batch);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::kNumeric) throw;
      std::string ids;
      for (const TrainingSample* s : batch) ids += (ids.empty() ? "" : ",") + s->id;
      raise(ErrorCategory::kNumeric, "epoch " + std::to_string(epoch_) + " batch " +
                                         std::to_string(b) + " [" + ids + "]: " + e.what());
    }
    weighted += loss * static_cast<double>(batch_tokens);
    tokens += batch_tokens;
  }
  log.train_loss = weighted / static_cast<double>(tokens);
  ++epoch_;

  if (val.empty()) {
    log.improved = true;
  } else {
    const double score = validation_bleu4(val);
    log.val_bleu4 = score;
    log.improved = score > best_bleu4_;
    if (log.improved) best_bleu4_ = score;
  }
  if (log.improved) best_ = checkpoint();
  return log;
}

std::vector<EpochLog> Trainer::train(std::span<const TrainingSample> train,
                                     std::span<const TrainingSample> val,
                                     const std::function<void(const EpochLog&)>& on_epoch) {
  std::vector<EpochLog> logs;
  while (epoch_ < cfg_.train.epochs) {
    logs.push_back(run_epoch(train, val));
    if (on_epoch) on_epoch(logs.back());
  }
  return logs;
}

double Trainer::evaluate_loss(std::span<const TrainingSample> samples) const {
  NoGradGuard no_grad;
  double total = 0.0;
  std::size_t tokens = 0;
  for (const TrainingSample& s : samples) {
    const Tensor logits = model_.teacher_forced_logits(model_.memory(s.features), s.tokens, {});
    const NllSum nll =
        nll_sum(logits, std::span<const TokenId>(s.tokens.data() + 1, s.tokens.size() - 1));
    total += nll.total.item();
    tokens += nll.tokens;
  }
  if (tokens == 0) raise(ErrorCategory::kContract, "evaluate_loss: no target tokens");
  return total / static_cast<double>(tokens);
}

TokenSequence Trainer::greedy(const Tensor& features) const {
  NoGradGuard no_grad;
  ModelStepper stepper(model_, model_.memory(features));
  return greedy_decode(stepper, cfg_.max_len() - 1).tokens;
}

double Trainer::validation_bleu4(std::span<const TrainingSample> samples) const {
  std::vector<TokenizedPair> corpus;
  for (const TrainingSample& s : samples) {
    corpus.push_back({id_tokens(greedy(s.features)), id_tokens(s.tokens)});
  }
  return bleu(corpus, 4).back();
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ckpt;
  ckpt.config_text = cfg_.to_text() + kEpochKey + std::string(" = ") + std::to_string(epoch_) +
                     "\n" + kBestKey + " = " + format_double(best_bleu4_) + "\n";
  const NamedParameters params = model_.parameters();
  ckpt.params = snapshot_parameters(params);
  if (!optim_.m.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      ckpt.optimizer.push_back(
          stored_moment("m." + params[i].first, params[i].second.shape(), optim_.m[i]));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      ckpt.optimizer.push_back(
          stored_moment("v." + params[i].first, params[i].second.shape(), optim_.v[i]));
    }
    // Split so each half is exact in float32.
    const std::uint64_t step = optim_.step;
    ckpt.optimizer.push_back(
        {"step", {2}, {static_cast<float>(step >> 16), static_cast<float>(step & 0xFFFF)}});
  }
  ckpt.rng_state = rng_.state();
  return ckpt;
}

Trainer Trainer::restore(const Checkpoint& ckpt) {
  const RunConfig cfg = RunConfig::from_text(ckpt.config_text);
  const auto kv = parse_key_values(ckpt.config_text);
  ReportModel model = ReportModel::create(cfg.model, cfg.train.seed);
  const NamedParameters params = model.parameters();
  restore_parameters(params, ckpt.params);

  Trainer trainer(cfg, std::move(model));
  trainer.rng_.set_state(ckpt.rng_state);
  try {
    if (auto it = kv.find(kEpochKey); it != kv.end()) trainer.epoch_ = std::stoull(it->second);
    if (auto it = kv.find(kBestKey); it != kv.end()) trainer.best_bleu4_ = std::stod(it->second);
  } catch (const std::exception&) {
    raise(ErrorCategory::kSchema, "checkpoint trainer state is malformed");
  }

  if (!ckpt.optimizer.empty()) {
    const std::size_t n = params.size();
    if (ckpt.optimizer.size() != 2 * n + 1) {
      raise(ErrorCategory::kShapeMismatch, "optimizer state has " +
                                               std::to_string(ckpt.optimizer.size()) +
                                               " tensors, expected " + std::to_string(2 * n + 1));
    }
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const StoredTensor& t = ckpt.optimizer[i];
      const auto& [name, p] = params[i % n];
      const std::string expected = (i < n ? "m." : "v.") + name;
      if (t.name != expected || t.shape != p.shape()) {
        raise(ErrorCategory::kShapeMismatch, "optimizer tensor '" + t.name + "' does not match '" +
                                                 expected + "'");
      }
      std::vector<double> values(t.values.begin(), t.values.end());
      (i < n ? trainer.optim_.m : trainer.optim_.v).push_back(std::move(values));
    }
    const StoredTensor& step = ckpt.optimizer.back();
    if (step.name != "step" || step.values.size() != 2) {
      raise(ErrorCategory::kShapeMismatch, "optimizer step entry is malformed");
    }
    trainer.optim_.step = (static_cast<std::uint64_t>(step.values[0]) << 16) |
                          static_cast<std::uint64_t>(step.values[1]);
  }
  return trainer;
}

}  // namespace ssmgen
