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

#include "ssmgen/beam_search.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssmgen/errors.h"

namespace ssmgen {

namespace {

bool ranks_before(const Hypothesis& a, double score_a, const Hypothesis& b, double score_b) {
  if (score_a != score_b) return score_a > score_b;
  return a.tokens < b.tokens;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  return out;
}

}  // namespace

double normalized_score(const Hypothesis& h, double length_norm) {
  if (length_norm == 0.0) return h.log_prob;
  const double len = static_cast<double>(h.tokens.size() - 1);
  return len > 0 ? h.log_prob / std::pow(len, length_norm) : h.log_prob;
}

Hypothesis beam_search(StepModel& model, const BeamSearchOptions& options) {
  if (options.beam_size < 1) raise(ErrorCategory::kContract, "beam_size must be >= 1");
  const std::size_t vocab = model.vocab_size();
  std::vector<Hypothesis> live{Hypothesis{{kBosId}, 0.0, false}};
  std::vector<Hypothesis> pool;

  for (std::size_t step = 0; step < options.max_len && !live.empty(); ++step) {
    std::vector<Hypothesis> candidates;
    for (const Hypothesis& h : live) {
      const std::vector<double> lp = model.next_log_probs(h.tokens);
      for (std::size_t v = 0; v < vocab; ++v) {
        if (!std::isfinite(lp[v])) continue;
        Hypothesis c{h.tokens, h.log_prob + lp[v], static_cast<TokenId>(v) == kEosId};
        c.tokens.push_back(static_cast<TokenId>(v));
        candidates.push_back(std::move(c));
      }
    }
    const std::size_t keep = std::min(options.beam_size, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                      [](const Hypothesis& a, const Hypothesis& b) {
                        return ranks_before(a, a.log_prob, b, b.log_prob);
                      });
    candidates.resize(keep);
    live.clear();
    for (Hypothesis& c : candidates) {
      (c.finished ? pool : live).push_back(std::move(c));
    }
  }
  for (Hypothesis& h : live) pool.push_back(std::move(h));
  if (pool.empty()) return Hypothesis{{kBosId}, 0.0, false};

  const Hypothesis* best = &pool.front();
  double best_score = normalized_score(*best, options.length_norm);
  for (const Hypothesis& h : pool) {
    const double s = normalized_score(h, options.length_norm);
    if (ranks_before(h, s, *best, best_score)) {
      best = &h;
      best_score = s;
    }
  }
  return *best;
}

Hypothesis greedy_decode(StepModel& model, std::size_t max_len) {
  Hypothesis h{{kBosId}, 0.0, false};
  for (std::size_t step = 0; step < max_len; ++step) {
    const std::vector<double> lp = model.next_log_probs(h.tokens);
    std::size_t best = lp.size();
    for (std::size_t v = 0; v < lp.size(); ++v) {
      if (!std::isfinite(lp[v])) continue;
      if (best == lp.size() || lp[v] > lp[best]) best = v;
    }
    if (best == lp.size()) break;
    h.tokens.push_back(static_cast<TokenId>(best));
    h.log_prob += lp[best];
    if (static_cast<TokenId>(best) == kEosId) {
      h.finished = true;
      break;
    }
  }
  return h;
}

ModelStepper::ModelStepper(const ReportModel& model, Tensor memory)
    : model_(model), memory_(std::move(memory)), initial_(model.decoder().start(memory_)) {}

std::size_t ModelStepper::vocab_size() const { return model_.decoder().config().vocab_size; }

const ModelStepper::Entry& ModelStepper::lookup(const TokenSequence& prefix) {
  if (auto it = cache_.find(prefix); it != cache_.end()) return it->second;
  Decoder::State state;
  if (prefix.size() == 1) {
    state = initial_;
  } else {
    state = lookup(TokenSequence(prefix.begin(), prefix.end() - 1)).state;
  }
  const Tensor logits = model_.decoder().step(state, prefix.back());
  std::vector<double> lp = log_softmax(logits.data());
  lp[kPadId] = -std::numeric_limits<double>::infinity();
  lp[kBosId] = -std::numeric_limits<double>::infinity();
  return cache_.emplace(prefix, Entry{std::move(state), std::move(lp)}).first->second;
}

std::vector<double> ModelStepper::next_log_probs(std::span<const TokenId> prefix) {
  if (prefix.empty() || prefix.front() != kBosId) {
    raise(ErrorCategory::kContract, "prefix must begin with BOS");
  }
  return lookup(TokenSequence(prefix.begin(), prefix.end())).log_probs;
}

}  // namespace ssmgen
