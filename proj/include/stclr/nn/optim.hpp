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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "stclr/nn/parameter.hpp"

namespace stclr::nn {

struct SgdOptions {
  double lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

// g' = g + wd * p;  v <- momentum * v + g';  p <- p - lr * v
template <typename T>
class SgdMomentum {
 public:
  SgdMomentum(std::vector<Parameter<T>> params, SgdOptions options)
      : params_(std::move(params)), options_(options) {}

  void step() {
    const T lr = static_cast<T>(options_.lr), mu = static_cast<T>(options_.momentum),
            wd = static_cast<T>(options_.weight_decay);
    for (auto& p : params_) {
      if (!p.trainable()) continue;
      Tensor<T>& v = p.momentum();
      if (v.shape() != p.shape()) v = Tensor<T>(p.shape());
      Tensor<T>& w = p.value();
      const Tensor<T>& g = p.grad();
      for (std::size_t i = 0; i < w.numel(); ++i) {
        const T gd = g[i] + wd * w[i];
        v[i] = mu * v[i] + gd;
        w[i] -= lr * v[i];
      }
    }
  }

  void zero_grad() { zero_grads(params_); }
  double lr() const { return options_.lr; }
  void set_lr(double lr) { options_.lr = lr; }
  const std::vector<Parameter<T>>& params() const { return params_; }

 private:
  std::vector<Parameter<T>> params_;
  SgdOptions options_;
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>> params, AdamOptions options)
      : params_(std::move(params)), options_(options) {}

  void step() {
    ++steps_;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
    const T b1 = static_cast<T>(options_.beta1), b2 = static_cast<T>(options_.beta2);
    const T lr = static_cast<T>(options_.lr), eps = static_cast<T>(options_.eps);
    const T inv_c1 = static_cast<T>(1.0 / c1), inv_c2 = static_cast<T>(1.0 / c2);
    for (auto& p : params_) {
      if (!p.trainable()) continue;
      Tensor<T>& m = p.first_moment();
      Tensor<T>& v = p.second_moment();
      if (m.shape() != p.shape()) m = Tensor<T>(p.shape());
      if (v.shape() != p.shape()) v = Tensor<T>(p.shape());
      Tensor<T>& w = p.value();
      const Tensor<T>& g = p.grad();
      for (std::size_t i = 0; i < w.numel(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        const T mhat = m[i] * inv_c1, vhat = v[i] * inv_c2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  void zero_grad() { zero_grads(params_); }
  double lr() const { return options_.lr; }
  void set_lr(double lr) { options_.lr = lr; }
  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t n) { steps_ = n; }

 private:
  std::vector<Parameter<T>> params_;
  AdamOptions options_;
  std::uint64_t steps_ = 0;
};

// Multiplies the learning rate by `factor` once the monitored metric (lower is
// better) has failed to improve on its best value by more than `threshold`
// for `patience` consecutive epochs.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(double lr, int patience = 3, double factor = 0.1,
                            double threshold = 1e-4, double min_lr = 1e-7)
      : lr_(lr), patience_(patience), factor_(factor), threshold_(threshold), min_lr_(min_lr) {}

  // Feeds one epoch's metric; returns the learning rate for the next epoch.
  double step(double metric) {
    if (metric < best_ - threshold_) {
      best_ = metric;
      bad_epochs_ = 0;
    } else if (++bad_epochs_ >= patience_) {
      lr_ = std::max(lr_ * factor_, min_lr_);
      bad_epochs_ = 0;
    }
    return lr_;
  }

  double lr() const { return lr_; }
  int bad_epochs() const { return bad_epochs_; }
  double best() const { return best_; }

 private:
  double lr_;
  int patience_;
  double factor_;
  double threshold_;
  double min_lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
};

}  // namespace stclr::nn
