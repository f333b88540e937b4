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

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "stclr/nn/batchnorm.hpp"
#include "stclr/nn/conv3d.hpp"
#include "stclr/nn/ops.hpp"
#include "stclr/nn/parameter.hpp"
#include "stclr/rng.hpp"

namespace stclr::nn {

template <typename T>
Tensor<T> he_normal(const Shape& shape, std::size_t fan_in, Rng& rng) {
  Tensor<T> t(shape);
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& v : t.values()) v = static_cast<T>(rng.normal(0.0, stddev));
  return t;
}

template <typename T>
Tensor<T> uniform_fan_in(const Shape& shape, std::size_t fan_in, Rng& rng) {
  Tensor<T> t(shape);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

struct Conv3dOptions {
  std::size_t in_channels = 1, out_channels = 1;
  Triple kernel{1, 1, 1}, stride{1, 1, 1}, padding{0, 0, 0};
  bool bias = false;
};

template <typename T>
class Conv3d {
 public:
  Conv3d(std::string name, const Conv3dOptions& options, Rng& rng) : options_(options) {
    const std::size_t fan_in =
        options.in_channels * options.kernel.t * options.kernel.h * options.kernel.w;
    weight_ = Parameter<T>(name + ".weight",
                           he_normal<T>(Shape{options.out_channels, options.in_channels,
                                              options.kernel.t, options.kernel.h, options.kernel.w},
                                        fan_in, rng));
    if (options.bias) bias_ = Parameter<T>(name + ".bias", Tensor<T>(Shape{options.out_channels}));
  }

  Var<T> operator()(const Var<T>& x) const {
    return conv3d(x, weight_.var(), options_.bias ? bias_.var() : Var<T>{}, options_.stride,
                  options_.padding);
  }

  void collect(std::vector<Parameter<T>>& out) const {
    out.push_back(weight_);
    if (options_.bias) out.push_back(bias_);
  }

  const Conv3dOptions& options() const { return options_; }
  Parameter<T>& weight() { return weight_; }

 private:
  Conv3dOptions options_;
  Parameter<T> weight_;
  Parameter<T> bias_;
};

template <typename T>
class BatchNorm3d {
 public:
  BatchNorm3d(std::string name, std::size_t channels, T momentum = T(0.1), T eps = T(1e-5))
      : name_(std::move(name)),
        gamma_(name_ + ".gamma", Tensor<T>(Shape{channels}, T(1))),
        beta_(name_ + ".beta", Tensor<T>(Shape{channels}, T(0))),
        running_mean_(Shape{channels}, T(0)),
        running_var_(Shape{channels}, T(1)),
        momentum_(momentum),
        eps_(eps) {}

  Var<T> operator()(const Var<T>& x, NormMode mode) {
    return batch_norm(x, gamma_.var(), beta_.var(), mode, running_mean_, running_var_, momentum_,
                      eps_);
  }

  void collect(std::vector<Parameter<T>>& out) const {
    out.push_back(gamma_);
    out.push_back(beta_);
  }
  void collect_buffers(std::vector<Buffer<T>>& out) {
    out.push_back({name_ + ".running_mean", &running_mean_});
    out.push_back({name_ + ".running_var", &running_var_});
  }

  Tensor<T>& running_mean() { return running_mean_; }
  Tensor<T>& running_var() { return running_var_; }

 private:
  std::string name_;
  Parameter<T> gamma_, beta_;
  Tensor<T> running_mean_, running_var_;
  T momentum_, eps_;
};

template <typename T>
class Dense {
 public:
  Dense(std::string name, std::size_t in, std::size_t out, Rng& rng)
      : weight_(name + ".weight", uniform_fan_in<T>(Shape{out, in}, in, rng)),
        bias_(name + ".bias", uniform_fan_in<T>(Shape{out}, in, rng)) {}

  Var<T> operator()(const Var<T>& x) const { return dense(x, weight_.var(), bias_.var()); }

  void collect(std::vector<Parameter<T>>& out) const {
    out.push_back(weight_);
    out.push_back(bias_);
  }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }
  std::size_t in_features() const { return weight_.shape()[1]; }
  std::size_t out_features() const { return weight_.shape()[0]; }

 private:
  Parameter<T> weight_, bias_;
};

}  // namespace stclr::nn
