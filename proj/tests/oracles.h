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
#include <functional>
#include <span>
#include <vector>

#include "ssmgen/beam_search.h"
#include "ssmgen/tensor.h"

namespace ssmgen::testing {

// h_t = abar_t h_{t-1} + bbar_t u_t, y_t = C_t . h_t + D u_t, written out
// directly over plain arrays.
std::vector<double> unrolled_scan(const Tensor& a_bar, const Tensor& b_bar, const Tensor& c,
                                  const Tensor& u, const Tensor& d_skip);

// Log-probabilities drawn from a hash of the prefix; every token is allowed.
class HashedModel : public StepModel {
 public:
  HashedModel(std::size_t vocab, std::uint64_t seed) : vocab_(vocab), seed_(seed) {}
  std::size_t vocab_size() const override { return vocab_; }
  std::vector<double> next_log_probs(std::span<const TokenId> prefix) override;

 private:
  std::size_t vocab_;
  std::uint64_t seed_;
};

// Best of every sequence after BOS that ends in EOS or reaches max_len.
Hypothesis exhaustive_best(StepModel& m, std::size_t max_len, double length_norm);

// One differentiable op on random inputs of the given shapes.
struct OpCase {
  const char* name;
  std::vector<Shape> shapes;
  std::function<Tensor(const std::vector<Tensor>&)> op;
  double lo = -1.0, hi = 1.0;
};

std::span<const OpCase> op_cases();

}  // namespace ssmgen::testing
