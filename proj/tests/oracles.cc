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

#include "oracles.h"

#include <cmath>

#include "ssmgen/ops.h"
#include "ssmgen/rng.h"

namespace ssmgen::testing {

std::vector<double> unrolled_scan(const Tensor& a_bar, const Tensor& b_bar, const Tensor& c,
                                  const Tensor& u, const Tensor& d_skip) {
  const std::size_t s = u.dim(0), ch = u.dim(1), n = c.dim(1);
  std::vector<double> h(ch * n, 0.0), y(s * ch, 0.0);
  for (std::size_t t = 0; t < s; ++t) {
    for (std::size_t i = 0; i < ch; ++i) {
      double out = d_skip.at(i) * u.at(t, i);
      for (std::size_t j = 0; j < n; ++j) {
        double& hij = h[i * n + j];
        hij = a_bar.at(t, i, j) * hij + b_bar.at(t, i, j) * u.at(t, i);
        out += c.at(t, j) * hij;
      }
      y[t * ch + i] = out;
    }
  }
  return y;
}

std::vector<double> HashedModel::next_log_probs(std::span<const TokenId> prefix) {
  std::uint64_t h = seed_;
  for (TokenId t : prefix) h = h * 1000003u + static_cast<std::uint64_t>(t) + 1;
  Rng rng(h);
  std::vector<double> logits(vocab_);
  double z = 0;
  for (double& l : logits) {
    l = rng.uniform(-3, 3);
    z += std::exp(l);
  }
  for (double& l : logits) l -= std::log(z);
  return logits;
}

namespace {

void enumerate(StepModel& m, TokenSequence prefix, double lp, std::size_t max_len,
               std::vector<Hypothesis>& out) {
  const std::vector<double> next = m.next_log_probs(prefix);
  for (std::size_t v = 0; v < m.vocab_size(); ++v) {
    TokenSequence seq = prefix;
    seq.push_back(static_cast<TokenId>(v));
    const double score = lp + next[v];
    if (static_cast<TokenId>(v) == kEosId || seq.size() - 1 == max_len) {
      out.push_back({seq, score, static_cast<TokenId>(v) == kEosId});
    } else {
      enumerate(m, seq, score, max_len, out);
    }
  }
}

}  // namespace

Hypothesis exhaustive_best(StepModel& m, std::size_t max_len, double length_norm) {
  std::vector<Hypothesis> all;
  enumerate(m, {kBosId}, 0.0, max_len, all);
  const Hypothesis* best = &all.front();
  for (const Hypothesis& h : all) {
    const double a = normalized_score(h, length_norm), b = normalized_score(*best, length_norm);
    if (a > b || (a == b && h.tokens < best->tokens)) best = &h;
  }
  return *best;
}

namespace {

Tensor nll_case(const std::vector<Tensor>& in) {
  static const std::vector<int> targets{2, 0, 4};
  static const std::vector<double> weights{1.0, 0.0, 0.5};
  return weighted_nll(in[0], targets, weights);
}

Tensor dropout_case(const std::vector<Tensor>& in) {
  Rng rng(1234);  // same mask on every evaluation
  return dropout(in[0], 0.3, true, rng);
}

const OpCase kOpCases[] = {
    {"matmul", {{3, 4}, {4, 2}}, [](auto& in) { return matmul(in[0], in[1]); }},
    {"transpose", {{3, 4}}, [](auto& in) { return transpose(in[0]); }},
    {"add", {{2, 3}, {2, 3}}, [](auto& in) { return add(in[0], in[1]); }},
    {"sub", {{2, 3}, {2, 3}}, [](auto& in) { return sub(in[0], in[1]); }},
    {"mul", {{2, 3}, {2, 3}}, [](auto& in) { return mul(in[0], in[1]); }},
    {"add_row", {{3, 4}, {4}}, [](auto& in) { return add_row(in[0], in[1]); }},
    {"scale", {{5}}, [](auto& in) { return scale(in[0], -1.7); }},
    {"neg", {{5}}, [](auto& in) { return neg(in[0]); }},
    {"exp", {{2, 3}}, [](auto& in) { return exp(in[0]); }},
    {"relu", {{2, 3}}, [](auto& in) { return relu(in[0]); }, 0.1, 1.0},
    {"relu_negative", {{2, 3}}, [](auto& in) { return relu(in[0]); }, -1.0, -0.1},
    {"sigmoid", {{2, 3}}, [](auto& in) { return sigmoid(in[0]); }, -4, 4},
    {"silu", {{2, 3}}, [](auto& in) { return silu(in[0]); }, -4, 4},
    {"softplus", {{2, 3}}, [](auto& in) { return softplus(in[0]); }, -4, 4},
    {"softmax_rows", {{3, 4}}, [](auto& in) { return softmax(in[0], 1); }, -2, 2},
    {"softmax_cols", {{3, 4}}, [](auto& in) { return softmax(in[0], 0); }, -2, 2},
    {"causal_softmax", {{4, 4}}, [](auto& in) { return causal_softmax(in[0]); }, -2, 2},
    {"causal_softmax_rect", {{2, 5}}, [](auto& in) { return causal_softmax(in[0]); }, -2, 2},
    {"layer_norm", {{3, 5}, {5}, {5}},
     [](auto& in) { return layer_norm(in[0], in[1], in[2], 1e-5); }, -2, 2},
    {"sum", {{2, 3}}, [](auto& in) { return sum(in[0]); }},
    {"mean", {{2, 3}}, [](auto& in) { return mean(in[0]); }},
    {"reshape", {{2, 6}}, [](auto& in) { return reshape(in[0], {3, 4}); }},
    {"slice_rows", {{4, 3}}, [](auto& in) { return slice_rows(in[0], 1, 3); }},
    {"slice_cols", {{3, 5}}, [](auto& in) { return slice_cols(in[0], 2, 5); }},
    {"concat_rows", {{2, 3}, {1, 3}}, [](auto& in) { return concat_rows({in[0], in[1]}); }},
    {"concat_cols", {{2, 3}, {2, 2}}, [](auto& in) { return concat_cols({in[0], in[1]}); }},
    {"embedding", {{5, 3}},
     [](auto& in) {
       static const std::vector<int> ids{4, 1, 4, 0};
       return embedding(in[0], ids);
     }},
    {"dropout", {{4, 4}}, dropout_case},
    {"weighted_nll", {{3, 5}}, nll_case, -2, 2},
};

}  // namespace

std::span<const OpCase> op_cases() { return kOpCases; }

}  // namespace ssmgen::testing
