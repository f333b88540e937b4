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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "stclr/nn/autograd.hpp"

// Elementwise and reduction primitives: relu, add, reshape, sum/mean,
// weighted_sum, dense, adaptive_avg_pool3d, softmax_cross_entropy.

namespace stclr::nn {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out(x.shape());
  const T* in = x.value().data();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
  return make_result<T>("relu", std::move(out), {x}, [](Node<T>& self) {
    const Tensor<T>& input = self.inputs[0]->value;
    Tensor<T> g(input.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] = input[i] > T(0) ? self.grad[i] : T(0);
    accumulate(self, 0, g);
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape())
    throw ShapeError("add: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] + b.value()[i];
  return make_result<T>("add", std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(self, 0, self.grad);
    accumulate(self, 1, self.grad);
  });
}

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  Tensor<T> out = x.value().reshaped(std::move(shape));
  return make_result<T>("reshape", std::move(out), {x}, [](Node<T>& self) {
    accumulate(self, 0, self.grad.reshaped(self.inputs[0]->value.shape()));
  });
}

// [B, ...] -> [B, prod(...)]
template <typename T>
Var<T> flatten(const Var<T>& x) {
  if (x.shape().empty()) throw ShapeError("flatten: scalar input");
  const std::size_t b = x.shape()[0];
  return reshape(x, Shape{b, b ? x.value().numel() / b : 0});
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T total = 0;
  for (T v : x.value().values()) total += v;
  return make_result<T>("sum", Tensor<T>(Shape{1}, total), {x}, [](Node<T>& self) {
    accumulate(self, 0, Tensor<T>(self.inputs[0]->value.shape(), self.grad[0]));
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  const auto n = static_cast<T>(x.value().numel());
  T total = 0;
  for (T v : x.value().values()) total += v;
  return make_result<T>("mean", Tensor<T>(Shape{1}, total / n), {x}, [n](Node<T>& self) {
    accumulate(self, 0, Tensor<T>(self.inputs[0]->value.shape(), self.grad[0] / n));
  });
}

// sum(x * weights) with constant weights; turns any output into a scalar for
// gradient checks.
template <typename T>
Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& weights) {
  if (weights.shape() != x.shape()) throw ShapeError("weighted_sum: shape mismatch");
  T total = 0;
  for (std::size_t i = 0; i < weights.numel(); ++i) total += x.value()[i] * weights[i];
  return make_result<T>("weighted_sum", Tensor<T>(Shape{1}, total), {x},
                        [weights](Node<T>& self) {
                          Tensor<T> g(weights.shape());
                          for (std::size_t i = 0; i < g.numel(); ++i) g[i] = weights[i] * self.grad[0];
                          accumulate(self, 0, g);
                        });
}

// y = x W^T + b, x: [B, in], W: [out, in], b: [out] (optional).
template <typename T>
Var<T> dense(const Var<T>& x, const Var<T>& weight, const Var<T>& bias = {}) {
  if (x.shape().size() != 2 || weight.shape().size() != 2 || x.shape()[1] != weight.shape()[1])
    throw ShapeError("dense: input " + shape_str(x.shape()) + " vs weight " +
                     shape_str(weight.shape()));
  const std::size_t batch = x.shape()[0], in = x.shape()[1], out = weight.shape()[0];
  if (bias.defined() && bias.shape() != Shape{out})
    throw ShapeError("dense: bias shape " + shape_str(bias.shape()));
  using Map = Eigen::Map<RowMatrix<T>>;
  using CMap = Eigen::Map<const RowMatrix<T>>;
  Tensor<T> y(Shape{batch, out});
  Map ym(y.data(), batch, out);
  ym.noalias() = CMap(x.value().data(), batch, in) * CMap(weight.value().data(), out, in).transpose();
  std::vector<Var<T>> inputs{x, weight};
  if (bias.defined()) {
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t c = 0; c < out; ++c) y[r * out + c] += bias.value()[c];
    inputs.push_back(bias);
  }
  return make_result<T>("dense", std::move(y), std::move(inputs),
                        [batch, in, out](Node<T>& self) {
                          CMap gy(self.grad.data(), batch, out);
                          if (self.input_needs_grad(0)) {
                            Tensor<T> gx(Shape{batch, in});
                            Map(gx.data(), batch, in).noalias() =
                                gy * CMap(self.inputs[1]->value.data(), out, in);
                            accumulate(self, 0, gx);
                          }
                          if (self.input_needs_grad(1)) {
                            Tensor<T> gw(Shape{out, in});
                            Map(gw.data(), out, in).noalias() =
                                gy.transpose() * CMap(self.inputs[0]->value.data(), batch, in);
                            accumulate(self, 1, gw);
                          }
                          if (self.inputs.size() > 2 && self.input_needs_grad(2)) {
                            Tensor<T> gb(Shape{out});
                            for (std::size_t r = 0; r < batch; ++r)
                              for (std::size_t c = 0; c < out; ++c) gb[c] += self.grad[r * out + c];
                            accumulate(self, 2, gb);
                          }
                        });
}

namespace detail {
inline std::size_t bin_start(std::size_t i, std::size_t in, std::size_t out) { return i * in / out; }
inline std::size_t bin_end(std::size_t i, std::size_t in, std::size_t out) {
  return ((i + 1) * in + out - 1) / out;
}
}  // namespace detail

// x: [B, C, T, H, W] -> [B, C, ot, oh, ow], mean over adaptive bins.
template <typename T>
Var<T> adaptive_avg_pool3d(const Var<T>& x, std::size_t ot = 1, std::size_t oh = 1,
                           std::size_t ow = 1) {
  const Shape& s = x.shape();
  if (s.size() != 5) throw ShapeError("adaptive_avg_pool3d: expected rank 5, got " + shape_str(s));
  if (ot == 0 || oh == 0 || ow == 0) throw ShapeError("adaptive_avg_pool3d: empty output size");
  const std::size_t planes = s[0] * s[1], T_ = s[2], H = s[3], W = s[4];
  Tensor<T> out(Shape{s[0], s[1], ot, oh, ow});
  auto for_each_bin = [=](auto&& visit) {
    for (std::size_t p = 0; p < planes; ++p)
      for (std::size_t a = 0; a < ot; ++a)
        for (std::size_t b = 0; b < oh; ++b)
          for (std::size_t c = 0; c < ow; ++c) {
            const std::size_t t0 = detail::bin_start(a, T_, ot), t1 = detail::bin_end(a, T_, ot);
            const std::size_t h0 = detail::bin_start(b, H, oh), h1 = detail::bin_end(b, H, oh);
            const std::size_t w0 = detail::bin_start(c, W, ow), w1 = detail::bin_end(c, W, ow);
            const std::size_t o = ((p * ot + a) * oh + b) * ow + c;
            visit(p, o, t0, t1, h0, h1, w0, w1);
          }
  };
  const T* in = x.value().data();
  for_each_bin([&](std::size_t p, std::size_t o, std::size_t t0, std::size_t t1, std::size_t h0,
                   std::size_t h1, std::size_t w0, std::size_t w1) {
    T acc = 0;
    for (std::size_t t = t0; t < t1; ++t)
      for (std::size_t h = h0; h < h1; ++h)
        for (std::size_t w = w0; w < w1; ++w) acc += in[((p * T_ + t) * H + h) * W + w];
    out[o] = acc / static_cast<T>((t1 - t0) * (h1 - h0) * (w1 - w0));
  });
  return make_result<T>("adaptive_avg_pool3d", std::move(out), {x},
                        [for_each_bin, T_, H, W](Node<T>& self) {
                          Tensor<T> g(self.inputs[0]->value.shape());
                          for_each_bin([&](std::size_t p, std::size_t o, std::size_t t0,
                                           std::size_t t1, std::size_t h0, std::size_t h1,
                                           std::size_t w0, std::size_t w1) {
                            const T share =
                                self.grad[o] / static_cast<T>((t1 - t0) * (h1 - h0) * (w1 - w0));
                            for (std::size_t t = t0; t < t1; ++t)
                              for (std::size_t h = h0; h < h1; ++h)
                                for (std::size_t w = w0; w < w1; ++w)
                                  g[((p * T_ + t) * H + h) * W + w] += share;
                          });
                          accumulate(self, 0, g);
                        });
}

// Mean over the batch of -log softmax(logits)[label], max-subtracted.
template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, const std::vector<std::size_t>& labels) {
  const Shape& s = logits.shape();
  if (s.size() != 2) throw ShapeError("softmax_cross_entropy: logits must be [B, C]");
  const std::size_t batch = s[0], classes = s[1];
  if (labels.size() != batch) throw ArgumentError("softmax_cross_entropy: label count mismatch");
  if (batch == 0) throw ArgumentError("softmax_cross_entropy: empty batch");
  for (std::size_t l : labels)
    if (l >= classes)
      throw ArgumentError("softmax_cross_entropy: label " + std::to_string(l) + " >= class count " +
                          std::to_string(classes));
  Tensor<T> probs(s);
  T total = 0;
  const T* z = logits.value().data();
  for (std::size_t r = 0; r < batch; ++r) {
    const T* row = z + r * classes;
    const T mx = *std::max_element(row, row + classes);
    T denom = 0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - mx);
    for (std::size_t c = 0; c < classes; ++c) probs[r * classes + c] = std::exp(row[c] - mx) / denom;
    total += -(row[labels[r]] - mx - std::log(denom));
  }
  return make_result<T>(
      "softmax_cross_entropy", Tensor<T>(Shape{1}, total / static_cast<T>(batch)), {logits},
      [probs = std::move(probs), labels, batch, classes](Node<T>& self) {
        Tensor<T> g = probs;
        const T scale = self.grad[0] / static_cast<T>(batch);
        for (std::size_t r = 0; r < batch; ++r) {
          g[r * classes + labels[r]] -= T(1);
          for (std::size_t c = 0; c < classes; ++c) g[r * classes + c] *= scale;
        }
        accumulate(self, 0, g);
      });
}

}  // namespace stclr::nn
