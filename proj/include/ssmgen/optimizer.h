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
#include <span>
#include <vector>

#include "ssmgen/tensor.h"

namespace ssmgen {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Round parameters and moments to float32 after every update so that the
  // whole optimizer state is exactly representable in a 32-bit checkpoint.
  bool float32_state = false;
};

struct OptimState {
  std::vector<std::vector<double>> m;  // first moments, shaped like params
  std::vector<std::vector<double>> v;  // second moments
  std::uint64_t step = 0;
};

// One bias-corrected Adam update. lrs holds one learning rate per parameter.
// Moments are allocated on first use. A parameter without a gradient raises
// a contract error.
void adam_step(std::span<Tensor> params, OptimState& state, std::span<const double> lrs,
               const AdamOptions& options = {});

}  // namespace ssmgen
