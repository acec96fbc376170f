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

#include <gtest/gtest.h>

#include <cmath>

#include "ssmgen/errors.h"
#include "ssmgen/ops.h"
#include "ssmgen/optimizer.h"

namespace ssmgen {
namespace {

void set_grad(Tensor& p, double g) {
  p.zero_grad();
  scale(sum(p), g).backward();
}

TEST(AdamTest, ZeroGradientLeavesParametersAndCountsStep) {
  std::vector<Tensor> p{Tensor::from_data({2}, {0.5, -0.25}, true)};
  set_grad(p[0], 0.0);
  OptimState state;
  const std::vector<double> lr{0.1};
  adam_step(p, state, lr);
  EXPECT_EQ(p[0].to_vector(), (std::vector<double>{0.5, -0.25}));
  EXPECT_EQ(state.step, 1u);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  std::vector<Tensor> p{Tensor::from_data({1}, {1.0}, true)};
  set_grad(p[0], 3.0);
  OptimState state;
  const std::vector<double> lr{0.01};
  adam_step(p, state, lr);
  EXPECT_NEAR(p[0].item(), 1.0 - 0.01, 1e-10);
}

TEST(AdamTest, MatchesScalarReference) {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.05, g = 0.3;
  double x = 2.0, m = 0.0, v = 0.0;
  std::vector<Tensor> p{Tensor::from_data({1}, {2.0}, true)};
  OptimState state;
  const std::vector<double> lrs{lr};
  for (int t = 1; t <= 3; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    x -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    set_grad(p[0], g);
    adam_step(p, state, lrs);
  }
  EXPECT_NEAR(p[0].item(), x, 1e-12);
}

TEST(AdamTest, PerParameterRates) {
  std::vector<Tensor> p{Tensor::from_data({1}, {0.0}, true), Tensor::from_data({1}, {0.0}, true)};
  set_grad(p[0], 1.0);
  set_grad(p[1], 1.0);
  OptimState state;
  const std::vector<double> lrs{5e-5, 1e-4};
  adam_step(p, state, lrs);
  EXPECT_NEAR(p[0].item(), -5e-5, 1e-12);
  EXPECT_NEAR(p[1].item(), -1e-4, 1e-12);
}

TEST(AdamTest, MissingGradientIsContractError) {
  std::vector<Tensor> p{Tensor::from_data({1}, {0.0}, true)};
  OptimState state;
  const std::vector<double> lrs{0.1};
  try {
    adam_step(p, state, lrs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kContract);
  }
}

TEST(AdamTest, Float32StateIsRepresentable) {
  std::vector<Tensor> p{Tensor::from_data({3}, {0.1, 0.2, 0.3}, true)};
  OptimState state;
  const std::vector<double> lrs{1e-3};
  AdamOptions opts;
  opts.float32_state = true;
  for (int i = 0; i < 3; ++i) {
    set_grad(p[0], 0.37 + i);
    adam_step(p, state, lrs, opts);
  }
  for (double x : p[0].data()) EXPECT_EQ(x, static_cast<double>(static_cast<float>(x)));
  for (double x : state.m[0]) EXPECT_EQ(x, static_cast<double>(static_cast<float>(x)));
  for (double x : state.v[0]) EXPECT_EQ(x, static_cast<double>(static_cast<float>(x)));
}

}  // namespace
}  // namespace ssmgen
