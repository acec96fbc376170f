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

#include <cstddef>
#include <span>
#include <vector>

#include "ssmgen/tensor.h"

namespace ssmgen {

class Rng;

// Differentiable tensor ops. Shapes are checked eagerly; a mismatch raises a
// dimension error naming both shapes. Every op reports its FLOPs to the
// global OpCounter (see op_counter.h for the conventions).

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k] x [k,n]
Tensor transpose(const Tensor& a);                // [m,n] -> [n,m]

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// x[..., n] + bias[n], broadcast over leading dims.
Tensor add_row(const Tensor& x, const Tensor& bias);
Tensor scale(const Tensor& x, double factor);
Tensor neg(const Tensor& x);

Tensor exp(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor silu(const Tensor& x);
Tensor softplus(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);
// Row-wise softmax of a [rows, cols] score matrix where row i may only see
// columns j <= i + (cols - rows). Hidden columns get exactly zero weight.
Tensor causal_softmax(const Tensor& scores);

// Normalizes over the last dimension, then applies gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);

// Gathers rows of weight[vocab, d] for ids; out-of-range ids raise a
// vocabulary error.
Tensor embedding(const Tensor& weight, std::span<const int> ids);

// Inverted dropout. Identity (same handle) when !training or p == 0.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

// Sum over positions of -weight[t] * log softmax(logits[t])[target[t]].
Tensor weighted_nll(const Tensor& logits, std::span<const int> targets,
                    std::span<const double> weights);

}  // namespace ssmgen
