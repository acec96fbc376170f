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
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ssmgen {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct Node;
struct TensorAccess;
}  // namespace detail

// Dense row-major tensor of doubles with an optional gradient slot.
//
// A Tensor is a cheap handle onto an immutable node of the computation graph.
// Ops record their inputs while grad mode is on and at least one input
// requires a gradient; backward() walks the recorded graph in reverse
// topological order. Only leaves (tensors created directly, not by an op)
// expose mutable data, which is how optimizers update parameters.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  double item() const;
  double at(std::size_t i) const { return data()[i]; }
  double at(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j, std::size_t k) const;

  // Leaf-only. Throws a contract error for op results.
  std::span<double> mutable_data();
  bool is_leaf() const;

  bool requires_grad() const;
  void set_requires_grad(bool requires_grad);
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  // Seeds d(this)/d(this) = 1 and accumulates into every requires_grad leaf
  // reachable from this scalar. Repeated calls accumulate.
  void backward() const;

  // Same values, fresh leaf, no history.
  Tensor detach() const;
  std::vector<double> to_vector() const;

 private:
  friend struct detail::TensorAccess;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

bool grad_mode_enabled();

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace ssmgen
