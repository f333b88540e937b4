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

// Independent reference implementations used as test oracles. None of these
// share code paths with the library implementations they check.

#include <cmath>
#include <cstddef>
#include <vector>

#include "stclr/nn/conv3d.hpp"
#include "stclr/nn/tensor.hpp"
#include "stclr/rng.hpp"

namespace stclr::testing {

using nn::Shape;
using nn::Tensor;
using nn::Triple;

template <typename T>
Tensor<T> random_tensor(const Shape& shape, Rng& rng, double lo = -1, double hi = 1) {
  Tensor<T> t(shape);
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

// Direct nested-loop cross-correlation, independent of the im2col path.
template <typename T>
Tensor<T> reference_conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias,
                           Triple s, Triple p) {
  const std::size_t B = x.dim(0), Ci = x.dim(1), Ti = x.dim(2), Hi = x.dim(3), Wi = x.dim(4);
  const std::size_t Co = w.dim(0), kt = w.dim(2), kh = w.dim(3), kw = w.dim(4);
  const std::size_t To = (Ti + 2 * p.t - kt) / s.t + 1, Ho = (Hi + 2 * p.h - kh) / s.h + 1,
                    Wo = (Wi + 2 * p.w - kw) / s.w + 1;
  Tensor<T> y(Shape{B, Co, To, Ho, Wo});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < Co; ++o)
      for (std::size_t t = 0; t < To; ++t)
        for (std::size_t h = 0; h < Ho; ++h)
          for (std::size_t ww = 0; ww < Wo; ++ww) {
            long double acc = bias ? (*bias)[o] : 0;
            for (std::size_t c = 0; c < Ci; ++c)
              for (std::size_t a = 0; a < kt; ++a)
                for (std::size_t i = 0; i < kh; ++i)
                  for (std::size_t j = 0; j < kw; ++j) {
                    const long ti = long(t * s.t + a) - long(p.t);
                    const long hi = long(h * s.h + i) - long(p.h);
                    const long wi = long(ww * s.w + j) - long(p.w);
                    if (ti < 0 || hi < 0 || wi < 0 || ti >= long(Ti) || hi >= long(Hi) ||
                        wi >= long(Wi))
                      continue;
                    acc += static_cast<long double>(x.at({b, c, std::size_t(ti), std::size_t(hi),
                                                          std::size_t(wi)})) *
                           w.at({o, c, a, i, j});
                  }
            y.at({b, o, t, h, ww}) = static_cast<T>(acc);
          }
  return y;
}


// Literal double loop over anchors i and denominators k != i.
inline double nt_xent_reference(const std::vector<std::vector<double>>& z,
                                const std::vector<std::size_t>& pair_of, double tau) {
  auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t d = 0; d < a.size(); ++d) {
      dot += a[d] * b[d];
      na += a[d] * a[d];
      nb += b[d] * b[d];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };
  double total = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double denom = 0;
    for (std::size_t k = 0; k < z.size(); ++k)
      if (k != i) denom += std::exp(cos(z[i], z[k]) / tau);
    total += -std::log(std::exp(cos(z[i], z[pair_of[i]]) / tau) / denom);
  }
  return total / static_cast<double>(z.size());
}

}  // namespace stclr::testing
