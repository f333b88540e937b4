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
#include <cstdint>
#include <string>
#include <vector>

#include "stclr/core/video.hpp"
#include "stclr/error.hpp"
#include "stclr/rng.hpp"

namespace stclr::augment {

enum class Strategy { pure_random, uniform, sequential, random_choice };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::pure_random: return "pure_random";
    case Strategy::uniform: return "uniform";
    case Strategy::sequential: return "sequential";
    case Strategy::random_choice: return "random_choice";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  for (auto v : {Strategy::pure_random, Strategy::uniform, Strategy::sequential, Strategy::random_choice})
    if (to_string(v) == s) return v;
  throw ArgumentError("unknown sampling strategy '" + s + "'");
}

struct SamplerSpec {
  std::size_t n = 16;
  Strategy strategy = Strategy::random_choice;
};

using Indices = std::vector<std::size_t>;

inline void check_counts(std::size_t frame_count, std::size_t n) {
  require(n >= 1, "sampler: n must be at least 1");
  require(frame_count >= 1, "sampler: clip has no frames");
}

// n distinct frames in original order when L >= n; with replacement otherwise.
inline Indices sample_pure_random(std::size_t frame_count, std::size_t n, Rng& rng) {
  check_counts(frame_count, n);
  Indices out;
  out.reserve(n);
  if (frame_count >= n) {
    // Floyd's algorithm for a uniform n-subset.
    std::vector<bool> taken(frame_count, false);
    for (std::size_t j = frame_count - n; j < frame_count; ++j) {
      const std::size_t t = rng.uniform_index(j + 1);
      const std::size_t pick = taken[t] ? j : t;
      taken[pick] = true;
    }
    for (std::size_t i = 0; i < frame_count; ++i)
      if (taken[i]) out.push_back(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) out.push_back(rng.uniform_index(frame_count));
    std::sort(out.begin(), out.end());
  }
  return out;
}

// index_i = round_half_up(i (L-1) / (n-1)), in exact integer arithmetic.
inline Indices sample_uniform(std::size_t frame_count, std::size_t n) {
  check_counts(frame_count, n);
  if (n == 1) return {0};
  Indices out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (2 * i * (frame_count - 1) + (n - 1)) / (2 * (n - 1));
  return out;
}

// Contiguous run from a random start; short clips wrap around and are sorted.
inline Indices sample_sequential(std::size_t frame_count, std::size_t n, Rng& rng) {
  check_counts(frame_count, n);
  Indices out(n);
  if (frame_count >= n) {
    const std::size_t start = rng.uniform_index(frame_count - n + 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = start + i;
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = i % frame_count;
    std::sort(out.begin(), out.end());
  }
  return out;
}

// Applies spec.strategy; random_choice picks one of the other three uniformly
// per call. The strategy actually used is written to *used when given.
inline Indices sample_temporal(std::size_t frame_count, const SamplerSpec& spec, Rng& rng,
                               Strategy* used = nullptr) {
  Strategy s = spec.strategy;
  if (s == Strategy::random_choice) {
    static constexpr Strategy choices[] = {Strategy::pure_random, Strategy::uniform, Strategy::sequential};
    s = choices[rng.uniform_index(3)];
  }
  if (used) *used = s;
  switch (s) {
    case Strategy::pure_random: return sample_pure_random(frame_count, spec.n, rng);
    case Strategy::uniform: return sample_uniform(frame_count, spec.n);
    case Strategy::sequential: return sample_sequential(frame_count, spec.n, rng);
    case Strategy::random_choice: break;
  }
  throw ArgumentError("sample_temporal: bad strategy");
}

inline Indices sample_temporal(const VideoClip& clip, const SamplerSpec& spec, Rng& rng,
                               Strategy* used = nullptr) {
  return sample_temporal(clip.frame_count(), spec, rng, used);
}

}  // namespace stclr::augment
