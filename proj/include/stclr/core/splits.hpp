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
#include <map>
#include <string>
#include <vector>

#include "stclr/core/dataset.hpp"
#include "stclr/rng.hpp"

namespace stclr {

// Subject-grouped folds.
struct FoldPlan {
  std::size_t k = 0;
  std::map<std::string, std::size_t> assignments;

  std::size_t fold_of(const std::string& subject) const {
    auto it = assignments.find(subject);
    if (it == assignments.end()) throw ArgumentError("subject '" + subject + "' is not in the fold plan");
    return it->second;
  }

  std::vector<std::size_t> test_positions(const DatasetIndex& index, std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < index.size(); ++i)
      if (fold_of(index.clips[i].subject_id) == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> train_positions(const DatasetIndex& index, std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < index.size(); ++i)
      if (fold_of(index.clips[i].subject_id) != fold) out.push_back(i);
    return out;
  }
};

inline FoldPlan split_folds(const DatasetIndex& index, std::size_t k, std::uint64_t seed) {
  require(k >= 2, "split_folds: k must be at least 2");
  auto subjects = index.subjects();
  if (subjects.size() < k)
    throw ArgumentError("split_folds: " + std::to_string(subjects.size()) + " subjects cannot fill " +
                        std::to_string(k) + " folds");
  Rng rng(seed);
  rng.shuffle(subjects.begin(), subjects.end());
  FoldPlan plan{k, {}};
  for (std::size_t i = 0; i < subjects.size(); ++i) plan.assignments[subjects[i]] = i % k;
  return plan;
}

// Per-class stratified subsample: round(n_c * fraction) clips per class,
// rounding half up, at least one per non-empty class. Original order is kept.
inline DatasetIndex label_subset(const DatasetIndex& index, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ArgumentError("label_subset: fraction must lie in (0, 1]");
  std::vector<std::vector<std::size_t>> by_class(index.taxonomy.count());
  for (std::size_t i = 0; i < index.size(); ++i) by_class.at(index.clips[i].label).push_back(i);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    const auto n = static_cast<double>(members.size());
    const std::size_t want =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(n * fraction + 0.5)), 1, members.size());
    Rng rng(derive_seed(seed, {c}));
    rng.shuffle(members.begin(), members.end());
    keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(keep.begin(), keep.end());
  return index.subset(keep);
}

}  // namespace stclr
