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

#include <functional>
#include <initializer_list>
#include <memory>
#include <vector>

#include "ssmgen/op_counter.h"
#include "ssmgen/tensor.h"

namespace ssmgen::detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads self.grad, accumulates into parents' grads.
  std::function<void(Node& self)> backward_fn;

  std::vector<double>& grad_buffer() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    return grad;
  }
  bool is_leaf() const { return !backward_fn; }
};

struct TensorAccess {
  static const std::shared_ptr<Node>& node(const Tensor& t) { return t.node_; }
  static Tensor wrap(std::shared_ptr<Node> node) { return Tensor(std::move(node)); }
};

inline Node& node_of(const Tensor& t) { return *TensorAccess::node(t); }

// Grad buffer of the i-th input, or nullptr when it does not need one.
inline std::vector<double>* parent_grad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

// Builds an op result. Inputs are recorded only when grad mode is on and one
// of them requires a gradient. Non-finite output from finite inputs raises a
// numeric error.
Tensor make_result(Shape shape, std::vector<double> data,
                   std::initializer_list<Tensor> inputs,
                   std::function<void(Node&)> backward_fn);
Tensor make_result(Shape shape, std::vector<double> data,
                   const std::vector<Tensor>& inputs,
                   std::function<void(Node&)> backward_fn);

inline void count(FlopClass c, std::uint64_t n) { OpCounter::global().record(c, n); }

}  // namespace ssmgen::detail
