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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ssmgen/config.h"
#include "ssmgen/rng.h"
#include "ssmgen/tensor.h"
#include "ssmgen/tokenizer.h"
#include "ssmgen/trainer.h"

namespace ssmgen::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from_data(std::move(shape), std::move(v), requires_grad);
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
// entries whose true gradient is ~0 from amplifying finite-difference noise.
inline double relative_error(double analytic, double numeric, double floor) {
  return std::fabs(analytic - numeric) /
         std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

// Central differences of scalar f() against backward() for every entry of
// each input, or for the (input, index) picks when given.
inline GradCheck check_gradients(const std::function<Tensor()>& f, std::vector<Tensor> inputs,
                                 double h = 1e-6, double floor = 1e-3,
                                 std::vector<std::pair<std::size_t, std::size_t>> picks = {}) {
  for (Tensor& t : inputs) t.zero_grad();
  f().backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : inputs) {
    analytic.emplace_back(t.grad().begin(), t.grad().end());
  }
  if (picks.empty()) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      for (std::size_t k = 0; k < inputs[i].numel(); ++k) picks.emplace_back(i, k);
    }
  }
  GradCheck out;
  for (const auto& [i, k] : picks) {
    double& x = inputs[i].mutable_data()[k];
    const double orig = x;
    x = orig + h;
    const double up = f().item();
    x = orig - h;
    const double down = f().item();
    x = orig;
    const double numeric = (up - down) / (2 * h);
    const double err = relative_error(analytic[i][k], numeric, floor);
    ++out.checked;
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst = "input " + std::to_string(i) + "[" + std::to_string(k) +
                  "] analytic=" + std::to_string(analytic[i][k]) +
                  " numeric=" + std::to_string(numeric);
    }
  }
  return out;
}

// Scalar probe: sum of the output weighted by fixed random coefficients, so
// every output entry contributes a distinct gradient.
Tensor weighted_probe(const Tensor& y, std::uint64_t seed = 99);

// Random features paired with short reports over a small word list, plus a
// down-scaled configuration that can memorize them.
struct SyntheticTask {
  RunConfig config;
  Vocabulary vocab;
  std::vector<std::string> reports;
  std::vector<TrainingSample> samples;
};

SyntheticTask make_synthetic_task(std::size_t pairs, std::uint64_t seed);

}  // namespace ssmgen::testing
