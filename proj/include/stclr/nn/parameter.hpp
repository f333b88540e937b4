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

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stclr/nn/autograd.hpp"

namespace stclr::nn {

// Trainable tensor with its gradient and optimizer slots. Copies are handles
// to the same underlying state.
template <typename T>
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor<T> init)
      : state_(std::make_shared<State>(State{std::move(name), Var<T>::leaf(std::move(init), true), {}, {}, {}})) {}

  const std::string& name() const { return state_->name; }
  const Var<T>& var() const { return state_->var; }
  Tensor<T>& value() { return state_->var.mutable_value(); }
  const Tensor<T>& value() const { return state_->var.value(); }
  const Shape& shape() const { return state_->var.shape(); }

  Tensor<T>& grad() { return state_->var.node().grad_buffer(); }
  void zero_grad() { grad().fill(T(0)); }

  bool trainable() const { return state_->var.requires_grad(); }
  void set_trainable(bool on) { state_->var.node().requires_grad = on; }

  // Optimizer state; sized lazily by the optimizer that uses it.
  Tensor<T>& momentum() { return state_->momentum; }
  Tensor<T>& first_moment() { return state_->first_moment; }
  Tensor<T>& second_moment() { return state_->second_moment; }
  void reset_optimizer_state() {
    state_->momentum = {};
    state_->first_moment = {};
    state_->second_moment = {};
  }

  bool same_as(const Parameter& other) const { return state_ == other.state_; }

 private:
  struct State {
    std::string name;
    Var<T> var;
    Tensor<T> momentum;
    Tensor<T> first_moment;
    Tensor<T> second_moment;
  };
  std::shared_ptr<State> state_;
};

// Non-trainable named tensor carried in checkpoints (batch-norm running stats).
template <typename T>
struct Buffer {
  std::string name;
  Tensor<T>* tensor = nullptr;
};

template <typename T>
void zero_grads(std::vector<Parameter<T>>& params) {
  for (auto& p : params) p.zero_grad();
}

}  // namespace stclr::nn
