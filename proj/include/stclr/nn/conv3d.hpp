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

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "stclr/nn/autograd.hpp"

namespace stclr::nn {

// (t, h, w) triple used for kernel sizes, strides and paddings.
struct Triple {
  std::size_t t = 1, h = 1, w = 1;
  friend bool operator==(const Triple&, const Triple&) = default;
};

inline std::string triple_str(const Triple& v) {
  return "[" + std::to_string(v.t) + ", " + std::to_string(v.h) + ", " + std::to_string(v.w) + "]";
}

// floor((in + 2p - k) / s) + 1; throws when the padded input is smaller than
// the kernel.
inline std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                                      std::size_t pad) {
  if (kernel == 0 || stride == 0) throw ShapeError("conv3d: kernel and stride must be positive");
  if (in + 2 * pad < kernel) throw ShapeError("conv3d: empty output extent");
  return (in + 2 * pad - kernel) / stride + 1;
}

struct Conv3dGeometry {
  std::size_t batch, in_channels, T, H, W;
  std::size_t out_channels;
  Triple kernel, stride, padding;
  std::size_t To, Ho, Wo;

  std::size_t patch() const { return in_channels * kernel.t * kernel.h * kernel.w; }
  std::size_t positions() const { return To * Ho * Wo; }
  std::size_t in_volume() const { return in_channels * T * H * W; }
  bool pointwise() const {
    return kernel == Triple{1, 1, 1} && stride == Triple{1, 1, 1} && padding == Triple{0, 0, 0};
  }
};

inline Conv3dGeometry conv3d_geometry(const Shape& input, const Shape& weight, Triple stride,
                                      Triple padding) {
  if (input.size() != 5) throw ShapeError("conv3d: input must be [B,C,T,H,W], got " + shape_str(input));
  if (weight.size() != 5)
    throw ShapeError("conv3d: weight must be [Cout,Cin,t,h,w], got " + shape_str(weight));
  if (input[1] != weight[1])
    throw ShapeError("conv3d: input channels " + std::to_string(input[1]) + " vs weight " +
                     shape_str(weight));
  Conv3dGeometry g{input[0], input[1], input[2], input[3], input[4], weight[0],
                   Triple{weight[2], weight[3], weight[4]}, stride, padding, 0, 0, 0};
  g.To = conv_output_extent(g.T, g.kernel.t, stride.t, padding.t);
  g.Ho = conv_output_extent(g.H, g.kernel.h, stride.h, padding.h);
  g.Wo = conv_output_extent(g.W, g.kernel.w, stride.w, padding.w);
  return g;
}

namespace detail {

// Unfolds one sample into a [patch x positions] row-major matrix.
template <typename T>
void vol2col(const T* in, const Conv3dGeometry& g, T* col) {
  const std::size_t P = g.positions();
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.in_channels; ++c)
    for (std::size_t a = 0; a < g.kernel.t; ++a)
      for (std::size_t b = 0; b < g.kernel.h; ++b)
        for (std::size_t d = 0; d < g.kernel.w; ++d, ++row) {
          T* dst = col + row * P;
          for (std::size_t to = 0; to < g.To; ++to) {
            const auto ti = static_cast<std::ptrdiff_t>(to * g.stride.t + a) -
                            static_cast<std::ptrdiff_t>(g.padding.t);
            for (std::size_t ho = 0; ho < g.Ho; ++ho) {
              const auto hi = static_cast<std::ptrdiff_t>(ho * g.stride.h + b) -
                              static_cast<std::ptrdiff_t>(g.padding.h);
              T* out = dst + (to * g.Ho + ho) * g.Wo;
              if (ti < 0 || ti >= static_cast<std::ptrdiff_t>(g.T) || hi < 0 ||
                  hi >= static_cast<std::ptrdiff_t>(g.H)) {
                std::fill(out, out + g.Wo, T(0));
                continue;
              }
              const T* src = in + ((c * g.T + ti) * g.H + hi) * g.W;
              for (std::size_t wo = 0; wo < g.Wo; ++wo) {
                const auto wi = static_cast<std::ptrdiff_t>(wo * g.stride.w + d) -
                                static_cast<std::ptrdiff_t>(g.padding.w);
                out[wo] = (wi < 0 || wi >= static_cast<std::ptrdiff_t>(g.W)) ? T(0) : src[wi];
              }
            }
          }
        }
}

// Adjoint of vol2col: accumulates a column matrix back into a sample.
template <typename T>
void col2vol(const T* col, const Conv3dGeometry& g, T* in) {
  const std::size_t P = g.positions();
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.in_channels; ++c)
    for (std::size_t a = 0; a < g.kernel.t; ++a)
      for (std::size_t b = 0; b < g.kernel.h; ++b)
        for (std::size_t d = 0; d < g.kernel.w; ++d, ++row) {
          const T* src = col + row * P;
          for (std::size_t to = 0; to < g.To; ++to) {
            const auto ti = static_cast<std::ptrdiff_t>(to * g.stride.t + a) -
                            static_cast<std::ptrdiff_t>(g.padding.t);
            if (ti < 0 || ti >= static_cast<std::ptrdiff_t>(g.T)) continue;
            for (std::size_t ho = 0; ho < g.Ho; ++ho) {
              const auto hi = static_cast<std::ptrdiff_t>(ho * g.stride.h + b) -
                              static_cast<std::ptrdiff_t>(g.padding.h);
              if (hi < 0 || hi >= static_cast<std::ptrdiff_t>(g.H)) continue;
              const T* row_src = src + (to * g.Ho + ho) * g.Wo;
              T* dst = in + ((c * g.T + ti) * g.H + hi) * g.W;
              for (std::size_t wo = 0; wo < g.Wo; ++wo) {
                const auto wi = static_cast<std::ptrdiff_t>(wo * g.stride.w + d) -
                                static_cast<std::ptrdiff_t>(g.padding.w);
                if (wi >= 0 && wi < static_cast<std::ptrdiff_t>(g.W)) dst[wi] += row_src[wo];
              }
            }
          }
        }
}

}  // namespace detail

// Cross-correlation over a zero-padded input.
// input [B,Cin,T,H,W], weight [Cout,Cin,kt,kh,kw], bias [Cout] (optional).
template <typename T>
Var<T> conv3d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias, Triple stride,
              Triple padding) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<Mat>;
  using CMap = Eigen::Map<const Mat>;

  const Conv3dGeometry g = conv3d_geometry(input.shape(), weight.shape(), stride, padding);
  if (bias.defined() && bias.shape() != Shape{g.out_channels})
    throw ShapeError("conv3d: bias shape " + shape_str(bias.shape()));
  const std::size_t K = g.patch(), P = g.positions();

  Tensor<T> out(Shape{g.batch, g.out_channels, g.To, g.Ho, g.Wo});
  std::vector<T> col(g.pointwise() ? 0 : K * P);
  CMap w(weight.value().data(), g.out_channels, K);
  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* x = input.value().data() + b * g.in_volume();
    const T* c = x;
    if (!g.pointwise()) {
      detail::vol2col(x, g, col.data());
      c = col.data();
    }
    Map o(out.data() + b * g.out_channels * P, g.out_channels, P);
    o.noalias() = w * CMap(c, K, P);
    if (bias.defined())
      for (std::size_t oc = 0; oc < g.out_channels; ++oc) o.row(oc).array() += bias.value()[oc];
  }

  std::vector<Var<T>> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result<T>("conv3d", std::move(out), std::move(inputs), [g](Node<T>& self) {
    const std::size_t K = g.patch(), P = g.positions();
    const bool want_x = self.input_needs_grad(0);
    const bool want_w = self.input_needs_grad(1);
    const bool want_b = self.inputs.size() > 2 && self.input_needs_grad(2);
    const Tensor<T>& x = self.inputs[0]->value;
    CMap w(self.inputs[1]->value.data(), g.out_channels, K);

    Tensor<T> gx, gw, gb;
    if (want_x) gx = Tensor<T>(x.shape());
    if (want_w) gw = Tensor<T>(self.inputs[1]->value.shape());
    if (want_b) gb = Tensor<T>(Shape{g.out_channels});
    std::vector<T> col(g.pointwise() ? 0 : K * P);
    std::vector<T> gcol(g.pointwise() ? 0 : K * P);

    for (std::size_t b = 0; b < g.batch; ++b) {
      CMap go(self.grad.data() + b * g.out_channels * P, g.out_channels, P);
      if (want_w) {
        const T* c = x.data() + b * g.in_volume();
        if (!g.pointwise()) {
          detail::vol2col(c, g, col.data());
          c = col.data();
        }
        Map(gw.data(), g.out_channels, K).noalias() += go * CMap(c, K, P).transpose();
      }
      if (want_x) {
        T* dst = gx.data() + b * g.in_volume();
        if (g.pointwise()) {
          Map(dst, K, P).noalias() += w.transpose() * go;
        } else {
          Map(gcol.data(), K, P).noalias() = w.transpose() * go;
          detail::col2vol(gcol.data(), g, dst);
        }
      }
      if (want_b)
        for (std::size_t oc = 0; oc < g.out_channels; ++oc) gb[oc] += go.row(oc).sum();
    }
    if (want_x) accumulate(self, 0, gx);
    if (want_w) accumulate(self, 1, gw);
    if (want_b) accumulate(self, 2, gb);
  });
}

template <typename T>
Var<T> conv3d(const Var<T>& input, const Var<T>& weight, Triple stride = {1, 1, 1},
              Triple padding = {0, 0, 0}) {
  return conv3d(input, weight, Var<T>{}, stride, padding);
}

}  // namespace stclr::nn
