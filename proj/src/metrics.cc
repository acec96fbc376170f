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

#include "ssmgen/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "ssmgen/errors.h"

namespace ssmgen {

namespace {

void require_nonempty(const std::vector<TokenizedPair>& corpus, const char* what) {
  if (corpus.empty()) raise(ErrorCategory::kContract, std::string(what) + ": empty corpus");
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

CeScores scores_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  CeScores s;
  s.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
  s.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0
                                       : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

void require_same_length(const std::vector<LabelVector>& pred,
                         const std::vector<LabelVector>& truth) {
  if (pred.size() != truth.size()) {
    raise(ErrorCategory::kContract, "label lists differ in length: " +
                                        std::to_string(pred.size()) + " vs " +
                                        std::to_string(truth.size()));
  }
}

}  // namespace

NgramPrecision modified_precision(const std::vector<TokenizedPair>& corpus, std::size_t n) {
  NgramPrecision p;
  for (const TokenizedPair& pair : corpus) {
    const auto cand = ngram_counts(pair.candidate, n);
    const auto ref = ngram_counts(pair.reference, n);
    for (const auto& [gram, c] : cand) {
      auto it = ref.find(gram);
      p.clipped += it == ref.end() ? 0 : std::min(c, it->second);
      p.total += c;
    }
  }
  return p;
}

std::vector<double> bleu(const std::vector<TokenizedPair>& corpus, std::size_t max_n) {
  require_nonempty(corpus, "bleu");
  std::size_t c = 0, r = 0;
  for (const TokenizedPair& pair : corpus) {
    c += pair.candidate.size();
    r += pair.reference.size();
  }
  const double bp = c == 0 ? 0.0 : (c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c));

  std::vector<double> scores;
  double log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const NgramPrecision p = modified_precision(corpus, n);
    if (p.clipped == 0) {
      any_zero = true;
    } else {
      log_sum += std::log(p.value());
    }
    scores.push_back(any_zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(n)));
  }
  return scores;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

LcsScore rouge_l_pair(const Tokens& candidate, const Tokens& reference, double beta) {
  if (candidate.empty() || reference.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return {};
  LcsScore s;
  s.precision = lcs / static_cast<double>(candidate.size());
  s.recall = lcs / static_cast<double>(reference.size());
  const double b2 = beta * beta;
  s.f = (1.0 + b2) * s.precision * s.recall / (s.recall + b2 * s.precision);
  return s;
}

double rouge_l(const std::vector<TokenizedPair>& corpus, double beta) {
  require_nonempty(corpus, "rouge_l");
  double total = 0.0;
  for (const TokenizedPair& p : corpus) total += rouge_l_pair(p.candidate, p.reference, beta).f;
  return total / static_cast<double>(corpus.size());
}

// Left-to-right exact matching. Each candidate token takes, in order of
// preference: the reference slot right after the previous match (extends a
// chunk), a slot whose successor also matches the next candidate token, or
// the earliest free slot. The match count equals the sum over words of
// min(count in candidate, count in reference).
MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference) {
  std::vector<bool> used(reference.size(), false);
  std::vector<std::ptrdiff_t> align(candidate.size(), -1);
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    std::ptrdiff_t chosen = -1;
    if (i > 0 && align[i - 1] >= 0) {
      const std::size_t next = static_cast<std::size_t>(align[i - 1]) + 1;
      if (next < reference.size() && !used[next] && reference[next] == candidate[i]) {
        chosen = static_cast<std::ptrdiff_t>(next);
      }
    }
    if (chosen < 0 && i + 1 < candidate.size()) {
      for (std::size_t j = 0; j + 1 < reference.size(); ++j) {
        if (!used[j] && reference[j] == candidate[i] && !used[j + 1] &&
            reference[j + 1] == candidate[i + 1]) {
          chosen = static_cast<std::ptrdiff_t>(j);
          break;
        }
      }
    }
    if (chosen < 0) {
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (!used[j] && reference[j] == candidate[i]) {
          chosen = static_cast<std::ptrdiff_t>(j);
          break;
        }
      }
    }
    if (chosen >= 0) {
      used[static_cast<std::size_t>(chosen)] = true;
      align[i] = chosen;
    }
  }
  MeteorAlignment a;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (align[i] < 0) continue;
    ++a.matches;
    const bool continues = i > 0 && align[i - 1] >= 0 && align[i] == align[i - 1] + 1;
    if (!continues) ++a.chunks;
  }
  return a;
}

double meteor_pair(const Tokens& candidate, const Tokens& reference, const MeteorParams& p) {
  const MeteorAlignment a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double precision = m / static_cast<double>(candidate.size());
  const double recall = m / static_cast<double>(reference.size());
  const double f_mean = precision * recall / (p.alpha * precision + (1.0 - p.alpha) * recall);
  const double penalty = p.gamma * std::pow(static_cast<double>(a.chunks) / m, p.beta);
  return f_mean * (1.0 - penalty);
}

double meteor(const std::vector<TokenizedPair>& corpus, const MeteorParams& p) {
  require_nonempty(corpus, "meteor");
  double total = 0.0;
  for (const TokenizedPair& pair : corpus) total += meteor_pair(pair.candidate, pair.reference, p);
  return total / static_cast<double>(corpus.size());
}

CeScores ce_metrics(const std::vector<LabelVector>& pred, const std::vector<LabelVector>& truth) {
  require_same_length(pred, truth);
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t c = 0; c < kNumCeCategories; ++c) {
      tp += pred[i][c] && truth[i][c];
      fp += pred[i][c] && !truth[i][c];
      fn += !pred[i][c] && truth[i][c];
    }
  }
  return scores_from_counts(tp, fp, fn);
}

CeScores ce_metrics_macro(const std::vector<LabelVector>& pred,
                          const std::vector<LabelVector>& truth) {
  require_same_length(pred, truth);
  CeScores avg;
  for (std::size_t c = 0; c < kNumCeCategories; ++c) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      tp += pred[i][c] && truth[i][c];
      fp += pred[i][c] && !truth[i][c];
      fn += !pred[i][c] && truth[i][c];
    }
    const CeScores s = scores_from_counts(tp, fp, fn);
    avg.precision += s.precision;
    avg.recall += s.recall;
    avg.f1 += s.f1;
  }
  const double k = static_cast<double>(kNumCeCategories);
  avg.precision /= k;
  avg.recall /= k;
  avg.f1 /= k;
  return avg;
}

MetricReport evaluate_corpus(const std::vector<TokenizedPair>& corpus,
                             const std::vector<LabelVector>* pred_labels,
                             const std::vector<LabelVector>* truth_labels) {
  MetricReport report;
  report.bleu = bleu(corpus, 4);
  report.meteor = meteor(corpus);
  report.rouge_l = rouge_l(corpus);
  if (pred_labels && truth_labels) {
    report.ce_micro = ce_metrics(*pred_labels, *truth_labels);
    report.ce_macro = ce_metrics_macro(*pred_labels, *truth_labels);
  }
  return report;
}

}  // namespace ssmgen
