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
#include <functional>
#include <string>
#include <vector>

#include "stclr/nn/autograd.hpp"
#include "stclr/rng.hpp"

namespace stclr::nn {

struct GradCheckResult {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
};

// |g_a - g_n| / max(|g_a|, |g_n|, 1e-8)
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

struct GradCheckOptions {
  double step = 1e-4;
  // Entries sampled per leaf; 0 checks every entry.
  std::size_t max_entries_per_leaf = 0;
  std::uint64_t seed = 0;
};

// Compares reverse-mode gradients of loss() w.r.t. each leaf against central
// differences. loss() must rebuild the graph from the leaves on every call.
inline GradCheckResult check_gradients(std::string name, std::vector<Var<double>> leaves,
                                       const std::function<Var<double>()>& loss,
                                       const GradCheckOptions& options = {}) {
  for (auto& leaf : leaves) leaf.node().grad = Tensor<double>();
  backward(loss());
  std::vector<Tensor<double>> analytic;
  for (auto& leaf : leaves)
    analytic.push_back(leaf.grad().numel() ? leaf.grad() : Tensor<double>(leaf.shape()));

  GradCheckResult result{std::move(name), 0.0, 0};
  Rng rng(options.seed);
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    Tensor<double>& value = leaves[l].mutable_value();
    std::vector<std::size_t> entries(value.numel());
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i] = i;
    if (options.max_entries_per_leaf && entries.size() > options.max_entries_per_leaf) {
      rng.shuffle(entries.begin(), entries.end());
      entries.resize(options.max_entries_per_leaf);
    }
    for (std::size_t idx : entries) {
      const double saved = value[idx];
      value[idx] = saved + options.step;
      const double up = loss().value().item();
      value[idx] = saved - options.step;
      const double down = loss().value().item();
      value[idx] = saved;
      const double numeric = (up - down) / (2 * options.step);
      result.max_relative_error =
          std::max(result.max_relative_error, relative_error(analytic[l][idx], numeric));
      ++result.entries_checked;
    }
  }
  return result;
}

}  // namespace stclr::nn
