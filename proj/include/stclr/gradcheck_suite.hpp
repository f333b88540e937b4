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

// Finite-difference sweep over every differentiable op plus the tiny
// encoder -> projection -> NT-Xent stack, all in double.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "stclr/contrastive/nt_xent.hpp"
#include "stclr/encoder/network.hpp"
#include "stclr/nn/gradcheck.hpp"
#include "stclr/nn/ops.hpp"

namespace stclr {

struct GradCheckSuiteOptions {
  std::uint64_t seed = 0;
  // Random shape draws per primitive.
  std::size_t shape_draws = 5;
  // Entries sampled per leaf of the encoder composite.
  std::size_t composite_entries = 3;
};

namespace detail {

inline nn::Tensor<double> gc_random(const nn::Shape& shape, Rng& rng, double lo = -1, double hi = 1) {
  nn::Tensor<double> t(shape);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline void keep_worst(std::vector<nn::GradCheckResult>& out, nn::GradCheckResult r) {
  for (auto& o : out) {
    if (o.name != r.name) continue;
    o.max_relative_error = std::max(o.max_relative_error, r.max_relative_error);
    o.entries_checked += r.entries_checked;
    return;
  }
  out.push_back(std::move(r));
}

}  // namespace detail

// One result per op name; max error over all draws.
inline std::vector<nn::GradCheckResult> run_gradcheck_suite(const GradCheckSuiteOptions& o = {}) {
  using nn::Var;
  using detail::gc_random;
  std::vector<nn::GradCheckResult> out;

  for (std::size_t draw = 0; draw < o.shape_draws; ++draw) {
    Rng rng(derive_seed(o.seed, {1, draw}));
    const std::size_t B = rng.uniform_int(2, 3), C = rng.uniform_int(1, 3), T = rng.uniform_int(1, 4),
                      H = rng.uniform_int(2, 5), W = rng.uniform_int(2, 5);
    const nn::Shape s{B, C, T, H, W};
    auto x = Var<double>::leaf(gc_random(s, rng));
    auto wts = gc_random(s, rng);

    {
      const std::size_t Co = rng.uniform_int(1, 3);
      const nn::Triple k{std::size_t(rng.uniform_int(1, std::min<std::size_t>(T, 3))),
                         std::size_t(rng.uniform_int(1, std::min<std::size_t>(H, 3))),
                         std::size_t(rng.uniform_int(1, std::min<std::size_t>(W, 3)))};
      const nn::Triple st{std::size_t(rng.uniform_int(1, 2)), std::size_t(rng.uniform_int(1, 2)),
                          std::size_t(rng.uniform_int(1, 2))};
      const nn::Triple pd{std::size_t(rng.uniform_int(0, 1)), std::size_t(rng.uniform_int(0, 1)),
                          std::size_t(rng.uniform_int(0, 1))};
      auto w = Var<double>::leaf(gc_random({Co, C, k.t, k.h, k.w}, rng));
      auto b = Var<double>::leaf(gc_random({Co}, rng));
      auto pw = gc_random(nn::conv3d(x, w, b, st, pd).shape(), rng);
      detail::keep_worst(out, nn::check_gradients("conv3d", {x, w, b}, [&] {
                           return nn::weighted_sum(nn::conv3d(x, w, b, st, pd), pw);
                         }));
    }
    {
      auto g = Var<double>::leaf(gc_random({C}, rng, 0.5, 1.5));
      auto bt = Var<double>::leaf(gc_random({C}, rng));
      nn::Tensor<double> rm({C}), rv({C}, 1.0);
      detail::keep_worst(out, nn::check_gradients("batch_norm(train)", {x, g, bt}, [&] {
                           return nn::weighted_sum(nn::batch_norm(x, g, bt, nn::NormMode::train, rm, rv), wts);
                         }));
      detail::keep_worst(out, nn::check_gradients("batch_norm(eval)", {x, g, bt}, [&] {
                           return nn::weighted_sum(nn::batch_norm(x, g, bt, nn::NormMode::eval, rm, rv), wts);
                         }));
    }
    detail::keep_worst(out, nn::check_gradients("relu", {x}, [&] { return nn::weighted_sum(nn::relu(x), wts); }));
    {
      auto y = Var<double>::leaf(gc_random(s, rng));
      detail::keep_worst(out, nn::check_gradients("add", {x, y},
                                                  [&] { return nn::weighted_sum(nn::add(x, y), wts); }));
    }
    {
      const std::size_t ot = rng.uniform_int(1, T), oh = rng.uniform_int(1, H), ow = rng.uniform_int(1, W);
      auto pw = gc_random({B, C, ot, oh, ow}, rng);
      detail::keep_worst(out, nn::check_gradients("adaptive_avg_pool3d", {x}, [&] {
                           return nn::weighted_sum(nn::adaptive_avg_pool3d(x, ot, oh, ow), pw);
                         }));
    }
    {
      const std::size_t in = rng.uniform_int(1, 6), classes = rng.uniform_int(2, 5);
      auto xi = Var<double>::leaf(gc_random({B, in}, rng));
      auto w = Var<double>::leaf(gc_random({classes, in}, rng));
      auto b = Var<double>::leaf(gc_random({classes}, rng));
      std::vector<std::size_t> labels(B);
      for (auto& l : labels) l = rng.uniform_index(classes);
      detail::keep_worst(out, nn::check_gradients("dense+cross_entropy", {xi, w, b}, [&] {
                           return nn::softmax_cross_entropy(nn::dense(xi, w, b), labels);
                         }));
    }
    {
      const std::size_t pairs = rng.uniform_int(1, 4), d = rng.uniform_int(2, 8);
      auto z = Var<double>::leaf(gc_random({2 * pairs, d}, rng));
      const double tau = rng.uniform(0.1, 1.0);
      const auto pair_of = contrastive::interleaved_pairs(2 * pairs);
      detail::keep_worst(out, nn::check_gradients("nt_xent", {z},
                                                  [&] { return contrastive::nt_xent(z, pair_of, tau); }));
    }
  }

  // Whole stack: tiny encoder (train-mode BN) -> projection -> NT-Xent.
  {
    Rng init(derive_seed(o.seed, {2}));
    encoder::Encoder<double> net(encoder::make_encoder_spec(encoder::Preset::tiny), init);
    encoder::ProjectionHead<double> head(encoder::projection_for(net.spec()), init);
    Rng data(derive_seed(o.seed, {3}));
    auto x = Var<double>::leaf(gc_random({4, 3, 4, 16, 16}, data));
    const auto pair_of = contrastive::interleaved_pairs(4);
    std::vector<Var<double>> leaves{x};
    for (const auto& p : net.parameters()) leaves.push_back(p.var());
    for (const auto& p : head.parameters()) leaves.push_back(p.var());
    nn::GradCheckOptions gopt;
    gopt.max_entries_per_leaf = o.composite_entries;
    // Thousands of ReLU kinks sit within 1e-4 of any weight perturbation here,
    // so the primitives' step leaves ~1e-2 error; 1e-7 keeps roundoff small.
    gopt.step = 1e-7;
    gopt.seed = derive_seed(o.seed, {4});
    auto r = nn::check_gradients("encoder+projection+nt_xent", leaves, [&] {
      return contrastive::nt_xent(head.forward(net.forward_any(x, nn::NormMode::train)), pair_of, 0.5);
    }, gopt);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace stclr
