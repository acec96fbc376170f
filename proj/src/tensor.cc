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

#include "ssmgen/tensor.h"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "autograd.h"
#include "ssmgen/errors.h"

namespace ssmgen {

namespace {
thread_local bool g_grad_enabled = true;

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}
}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool grad_mode_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(shape_numel(shape), value);
  return from_data(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    raise(ErrorCategory::kDimension, "shape " + shape_string(shape) + " holds " +
                                         std::to_string(shape_numel(shape)) +
                                         " values, got " + std::to_string(data.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  if (!node_) raise(ErrorCategory::kContract, "use of undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    raise(ErrorCategory::kDimension,
          "axis " + std::to_string(axis) + " out of range for " + shape_string(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::span<const double> Tensor::data() const {
  shape();
  return node_->data;
}

double Tensor::item() const {
  if (numel() != 1) {
    raise(ErrorCategory::kContract, "item() on tensor of shape " + shape_string(shape()));
  }
  return node_->data[0];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  return node_->data[i * node_->shape.at(1) + j];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  const Shape& s = node_->shape;
  return node_->data[(i * s.at(1) + j) * s.at(2) + k];
}

bool Tensor::is_leaf() const {
  shape();
  return node_->is_leaf();
}

std::span<double> Tensor::mutable_data() {
  if (!is_leaf()) raise(ErrorCategory::kContract, "mutable_data() on a recorded op result");
  return node_->data;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool requires_grad) {
  if (!is_leaf()) raise(ErrorCategory::kContract, "set_requires_grad() on a non-leaf");
  node_->requires_grad = requires_grad;
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->data.size(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) raise(ErrorCategory::kContract, "tensor has no gradient");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

void Tensor::backward() const {
  if (numel() != 1) {
    raise(ErrorCategory::kContract,
          "backward() needs a scalar output, got " + shape_string(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (detail::Node* n : order) {
    if (!n->is_leaf()) n->grad.assign(n->data.size(), 0.0);
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->is_leaf()) n->backward_fn(*n);
  }
}

Tensor Tensor::detach() const { return from_data(shape(), node_->data, false); }

std::vector<double> Tensor::to_vector() const {
  auto d = data();
  return {d.begin(), d.end()};
}

namespace detail {

namespace {
Tensor make_result_impl(Shape shape, std::vector<double> data, const Tensor* begin,
                        const Tensor* end, std::function<void(Node&)> backward_fn) {
  if (!all_finite(data)) {
    bool inputs_finite = true;
    for (const Tensor* t = begin; t != end; ++t) {
      if (t->defined() && !all_finite(t->data())) inputs_finite = false;
    }
    if (inputs_finite) {
      raise(ErrorCategory::kNumeric,
            "non-finite value produced from finite inputs, result shape " + shape_string(shape));
    }
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  bool needs_grad = false;
  if (g_grad_enabled) {
    for (const Tensor* t = begin; t != end; ++t) {
      if (t->requires_grad()) needs_grad = true;
    }
  }
  if (needs_grad) {
    node->requires_grad = true;
    for (const Tensor* t = begin; t != end; ++t) node->parents.push_back(TensorAccess::node(*t));
    node->backward_fn = std::move(backward_fn);
  }
  return TensorAccess::wrap(std::move(node));
}
}  // namespace

Tensor make_result(Shape shape, std::vector<double> data, std::initializer_list<Tensor> inputs,
                   std::function<void(Node&)> backward_fn) {
  return make_result_impl(std::move(shape), std::move(data), inputs.begin(), inputs.end(),
                          std::move(backward_fn));
}

Tensor make_result(Shape shape, std::vector<double> data, const std::vector<Tensor>& inputs,
                   std::function<void(Node&)> backward_fn) {
  return make_result_impl(std::move(shape), std::move(data), inputs.data(),
                          inputs.data() + inputs.size(), std::move(backward_fn));
}

}  // namespace detail
}  // namespace ssmgen
