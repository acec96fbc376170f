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

#include <string>
#include <utility>
#include <vector>

#include "ssmgen/rng.h"
#include "ssmgen/tensor.h"

namespace ssmgen {

// Ordered (name, parameter) list. Order is the registration order and is the
// order used by checkpoints and optimizer state.
using NamedParameters = std::vector<std::pair<std::string, Tensor>>;

std::size_t count_parameters(const NamedParameters& params);

// Uniform(-bound, bound) leaf with requires_grad set. Values are rounded to
// the nearest float so parameters survive 32-bit checkpoints exactly.
Tensor uniform_parameter(Shape shape, double bound, Rng& rng);
Tensor constant_parameter(Shape shape, double value);
Tensor parameter_from(Shape shape, std::vector<double> values);

// Rounds every value to the nearest representable 32-bit float.
void round_to_float(std::span<double> values);

// Mutable per-forward state: training flag and the dropout generator.
struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;
};

// y = x W + b with W stored [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;  // undefined when the layer has no bias

  static Linear create(std::size_t in, std::size_t out, bool with_bias, Rng& rng);

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParameters& out) const;
};

struct LayerNorm {
  Tensor gain;
  Tensor bias;
  double eps = 1e-5;

  static LayerNorm create(std::size_t d);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParameters& out) const;
};

}  // namespace ssmgen
