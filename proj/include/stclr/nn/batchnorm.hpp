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
#include <cstddef>
#include <vector>

#include "stclr/nn/autograd.hpp"

namespace stclr::nn {

enum class NormMode { train, eval };

// Per-channel normalization of x: [B, C, ...] over every axis except 1.
// Train mode uses batch statistics (biased variance) and folds them into the
// running estimates with `momentum` (unbiased variance); eval mode uses the
// running estimates.
template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, NormMode mode,
                  Tensor<T>& running_mean, Tensor<T>& running_var, T momentum = T(0.1),
                  T eps = T(1e-5)) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("batch_norm: input must be [B, C, ...]");
  const std::size_t B = s[0], C = s[1];
  const std::size_t inner = x.value().numel() / (B * C);
  const std::size_t count = B * inner;
  if (gamma.shape() != Shape{C} || beta.shape() != Shape{C})
    throw ShapeError("batch_norm: gamma/beta must have length " + std::to_string(C));
  if (running_mean.shape() != Shape{C} || running_var.shape() != Shape{C})
    throw ShapeError("batch_norm: running stats must have length " + std::to_string(C));
  if (mode == NormMode::train && count < 2)
    throw ArgumentError("batch_norm: train mode needs more than one value per channel");

  const T* in = x.value().data();
  std::vector<T> mu(C), inv_std(C);
  if (mode == NormMode::train) {
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0;
      for (std::size_t b = 0; b < B; ++b) {
        const T* p = in + (b * C + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) acc += p[i];
      }
      const double m = acc / static_cast<double>(count);
      double sq = 0;
      for (std::size_t b = 0; b < B; ++b) {
        const T* p = in + (b * C + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) sq += (p[i] - m) * (p[i] - m);
      }
      const double var = sq / static_cast<double>(count);
      mu[c] = static_cast<T>(m);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
      const double unbiased = sq / static_cast<double>(count - 1);
      running_mean[c] = static_cast<T>((1 - momentum) * running_mean[c] + momentum * m);
      running_var[c] = static_cast<T>((1 - momentum) * running_var[c] + momentum * unbiased);
    }
  } else {
    for (std::size_t c = 0; c < C; ++c) {
      mu[c] = running_mean[c];
      inv_std[c] = T(1) / std::sqrt(running_var[c] + eps);
    }
  }

  Tensor<T> xhat(s), out(s);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t base = (b * C + c) * inner;
      const T gm = gamma.value()[c], bt = beta.value()[c];
      for (std::size_t i = 0; i < inner; ++i) {
        const T h = (in[base + i] - mu[c]) * inv_std[c];
        xhat[base + i] = h;
        out[base + i] = h * gm + bt;
      }
    }

  const bool training = mode == NormMode::train;
  return make_result<T>(
      "batch_norm", std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), B, C, inner, count,
       training](Node<T>& self) {
        const T* gy = self.grad.data();
        std::vector<T> sum_gy(C, T(0)), sum_gy_xhat(C, T(0));
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t c = 0; c < C; ++c) {
            const std::size_t base = (b * C + c) * inner;
            T s1 = 0, s2 = 0;
            for (std::size_t i = 0; i < inner; ++i) {
              s1 += gy[base + i];
              s2 += gy[base + i] * xhat[base + i];
            }
            sum_gy[c] += s1;
            sum_gy_xhat[c] += s2;
          }
        if (self.input_needs_grad(0)) {
          const Tensor<T>& gamma_v = self.inputs[1]->value;
          Tensor<T> gx(self.value.shape());
          const T n = static_cast<T>(count);
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < C; ++c) {
              const std::size_t base = (b * C + c) * inner;
              const T k = gamma_v[c] * inv_std[c];
              if (training) {
                const T m1 = sum_gy[c] / n, m2 = sum_gy_xhat[c] / n;
                for (std::size_t i = 0; i < inner; ++i)
                  gx[base + i] = k * (gy[base + i] - m1 - xhat[base + i] * m2);
              } else {
                for (std::size_t i = 0; i < inner; ++i) gx[base + i] = k * gy[base + i];
              }
            }
          accumulate(self, 0, gx);
        }
        if (self.input_needs_grad(1)) accumulate(self, 1, Tensor<T>(Shape{C}, sum_gy_xhat));
        if (self.input_needs_grad(2)) accumulate(self, 2, Tensor<T>(Shape{C}, sum_gy));
      });
}

}  // namespace stclr::nn
