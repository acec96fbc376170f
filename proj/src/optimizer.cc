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

#include "ssmgen/optimizer.h"

#include <cmath>

#include "ssmgen/errors.h"

namespace ssmgen {

void adam_step(std::span<Tensor> params, OptimState& state, std::span<const double> lrs,
               const AdamOptions& options) {
  if (lrs.size() != params.size()) {
    raise(ErrorCategory::kContract, "adam_step: one learning rate per parameter required");
  }
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.numel(), 0.0);
      state.v.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    raise(ErrorCategory::kContract, "adam_step: optimizer state does not match parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) {
      raise(ErrorCategory::kContract,
            "adam_step: parameter " + std::to_string(i) + " has no gradient");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(options.beta1, t);
  const double bias2 = 1.0 - std::pow(options.beta2, t);
  auto round = [&](double x) {
    return options.float32_state ? static_cast<double>(static_cast<float>(x)) : x;
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].mutable_data();
    auto g = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = round(options.beta1 * m[k] + (1.0 - options.beta1) * g[k]);
      v[k] = round(options.beta2 * v[k] + (1.0 - options.beta2) * g[k] * g[k]);
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      p[k] = round(p[k] - lrs[i] * m_hat / (std::sqrt(v_hat) + options.eps));
    }
  }
}

}  // namespace ssmgen
