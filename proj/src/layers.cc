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

#include "ssmgen/layers.h"

#include <cmath>

#include "ssmgen/errors.h"
#include "ssmgen/ops.h"

namespace ssmgen {

std::size_t count_parameters(const NamedParameters& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

void round_to_float(std::span<double> values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

Tensor parameter_from(Shape shape, std::vector<double> values) {
  round_to_float(values);
  return Tensor::from_data(std::move(shape), std::move(values), true);
}

Tensor uniform_parameter(Shape shape, double bound, Rng& rng) {
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = rng.uniform(-bound, bound);
  return parameter_from(std::move(shape), std::move(values));
}

Tensor constant_parameter(Shape shape, double value) {
  std::vector<double> values(shape_numel(shape), value);
  return parameter_from(std::move(shape), std::move(values));
}

Linear Linear::create(std::size_t in, std::size_t out, bool with_bias, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear layer;
  layer.weight = uniform_parameter({in, out}, bound, rng);
  if (with_bias) layer.bias = uniform_parameter({out}, bound, rng);
  return layer;
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  return bias.defined() ? add_row(y, bias) : y;
}

void Linear::collect(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".weight", weight);
  if (bias.defined()) out.emplace_back(prefix + ".bias", bias);
}

LayerNorm LayerNorm::create(std::size_t d) {
  return LayerNorm{constant_parameter({d}, 1.0), constant_parameter({d}, 0.0)};
}

Tensor LayerNorm::operator()(const Tensor& x) const { return layer_norm(x, gain, bias, eps); }

void LayerNorm::collect(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".gain", gain);
  out.emplace_back(prefix + ".bias", bias);
}

}  // namespace ssmgen
