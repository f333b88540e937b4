// Copyright 2026 The stclr Authors
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
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stclr/error.hpp"
#include "stclr/nn/tensor.hpp"

namespace stclr::nn {

namespace detail {
inline thread_local bool checked_mode = false;
inline thread_local bool grad_disabled = false;
}  // namespace detail

// While alive, every op output and every propagated gradient is checked for
// NaN/Inf and a NumericError is raised on the first non-finite value.
class CheckedMode {
 public:
  CheckedMode() : previous_(detail::checked_mode) { detail::checked_mode = true; }
  ~CheckedMode() { detail::checked_mode = previous_; }
  CheckedMode(const CheckedMode&) = delete;
  CheckedMode& operator=(const CheckedMode&) = delete;

 private:
  bool previous_;
};

// Disables graph recording (inference).
class NoGrad {
 public:
  NoGrad() : previous_(detail::grad_disabled) { detail::grad_disabled = true; }
  ~NoGrad() { detail::grad_disabled = previous_; }
  NoGrad(const NoGrad&) = delete;
  NoGrad& operator=(const NoGrad&) = delete;

 private:
  bool previous_;
};

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::string op;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and accumulates into inputs that require grad.
  std::function<void(Node&)> backward;

  Tensor<T>& grad_buffer() {
    if (grad.numel() != value.numel() || grad.shape() != value.shape())
      grad = Tensor<T>(value.shape());
    return grad;
  }
  bool input_needs_grad(std::size_t i) const { return inputs[i] && inputs[i]->requires_grad; }
};

// Handle to a value in the computation graph.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var constant(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->op = "constant";
    return Var(std::move(n));
  }
  static Var leaf(Tensor<T> value, bool requires_grad = true) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    n->op = "leaf";
    return Var(std::move(n));
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  Node<T>& node() const { return *node_; }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

inline bool checked_mode_enabled() { return detail::checked_mode; }

template <typename T>
void check_finite(const Tensor<T>& t, const std::string& what) {
  if (detail::checked_mode && !t.all_finite())
    throw NumericError("non-finite value in " + what);
}

// Creates an op output. The backward closure and the input references are
// kept only if some input requires grad and recording is enabled.
template <typename T>
Var<T> make_result(std::string op, Tensor<T> value, std::vector<Var<T>> inputs,
                   std::function<void(Node<T>&)> backward) {
  check_finite(value, op + " output");
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = std::move(op);
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (needs && !detail::grad_disabled) {
    n->requires_grad = true;
    n->inputs.reserve(inputs.size());
    for (const auto& in : inputs) n->inputs.push_back(in.node_ptr());
    n->backward = std::move(backward);
  }
  return Var<T>(std::move(n));
}

// Adds `delta` into the gradient of input i of `self` when that input
// requires grad.
template <typename T>
void accumulate(Node<T>& self, std::size_t i, const Tensor<T>& delta) {
  if (!self.input_needs_grad(i)) return;
  auto& g = self.inputs[i]->grad_buffer();
  if (g.numel() != delta.numel()) throw ShapeError("gradient shape mismatch in " + self.op);
  T* dst = g.data();
  const T* src = delta.data();
  for (std::size_t k = 0; k < g.numel(); ++k) dst[k] += src[k];
}

// Reverse-mode accumulation from a scalar root. Gradients accumulate into
// leaves; intermediate gradients are released as the sweep passes them.
template <typename T>
void backward(const Var<T>& root) {
  if (!root.defined() || root.value().numel() != 1)
    throw ArgumentError("backward: root must be a scalar, got " +
                        (root.defined() ? shape_str(root.shape()) : std::string("undefined")));
  if (!root.requires_grad()) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{&root.node(), 0}};
  visited.insert(&root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child && child->requires_grad && !visited.count(child)) {
        visited.insert(child);
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node().grad_buffer().fill(T(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (!node->backward) continue;
    if (node->grad.numel() == 0) continue;
    check_finite(node->grad, node->op + " gradient");
    node->backward(*node);
    node->grad = Tensor<T>();
  }
}

}  // namespace stclr::nn
