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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ssmgen {

using Tokens = std::vector<std::string>;

// One candidate against its single reference, both already tokenized.
struct TokenizedPair {
  Tokens candidate;
  Tokens reference;
};

struct NgramPrecision {
  std::uint64_t clipped = 0;
  std::uint64_t total = 0;
  double value() const { return total == 0 ? 0.0 : static_cast<double>(clipped) / total; }
};

// Clipped n-gram matches pooled over the corpus.
NgramPrecision modified_precision(const std::vector<TokenizedPair>& corpus, std::size_t n);

// Corpus BLEU-1..max_n: geometric mean of pooled clipped precisions with
// uniform weights, times the brevity penalty exp(1 - r/c) when c < r. Any
// zero precision makes that BLEU-n zero.
std::vector<double> bleu(const std::vector<TokenizedPair>& corpus, std::size_t max_n = 4);

struct LcsScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

inline constexpr double kRougeBeta = 1.2;

std::size_t lcs_length(const Tokens& a, const Tokens& b);
LcsScore rouge_l_pair(const Tokens& candidate, const Tokens& reference, double beta = kRougeBeta);
// Mean of the per-pair F scores.
double rouge_l(const std::vector<TokenizedPair>& corpus, double beta = kRougeBeta);

// Exact-match METEOR ("meteor-exact"): no stemming or synonyms.
struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference);
double meteor_pair(const Tokens& candidate, const Tokens& reference, const MeteorParams& p = {});
double meteor(const std::vector<TokenizedPair>& corpus, const MeteorParams& p = {});

inline constexpr std::size_t kNumCeCategories = 14;
using LabelVector = std::array<bool, kNumCeCategories>;

struct CeScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged over every (report, category) cell; zero denominators give 0.
CeScores ce_metrics(const std::vector<LabelVector>& pred, const std::vector<LabelVector>& truth);
// Per-category scores averaged over the 14 categories.
CeScores ce_metrics_macro(const std::vector<LabelVector>& pred,
                          const std::vector<LabelVector>& truth);

struct MetricReport {
  std::vector<double> bleu;  // BLEU-1..4
  double meteor = 0.0;
  double rouge_l = 0.0;
  std::optional<CeScores> ce_micro;
  std::optional<CeScores> ce_macro;
};

MetricReport evaluate_corpus(const std::vector<TokenizedPair>& corpus,
                             const std::vector<LabelVector>* pred_labels = nullptr,
                             const std::vector<LabelVector>* truth_labels = nullptr);

}  // namespace ssmgen
