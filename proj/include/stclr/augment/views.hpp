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

#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stclr/augment/spatial.hpp"
#include "stclr/augment/temporal.hpp"
#include "stclr/core/video.hpp"
#include "stclr/nn/tensor.hpp"

namespace stclr::augment {

struct SubVideo {
  std::vector<Image> frames;
  Indices source_indices;
  Strategy strategy = Strategy::uniform;
  AppliedParams params;
};

inline nlohmann::json to_json(const SubVideo& v) {
  auto j = to_json(v.params);
  j["strategy"] = to_string(v.strategy);
  j["source_indices"] = v.source_indices;
  return j;
}

inline std::vector<Image> gather_frames(const VideoClip& clip, const Indices& indices) {
  std::vector<Image> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(clip.frames.at(i));
  return out;
}

inline SubVideo make_view(const VideoClip& clip, const SamplerSpec& sampler, const SpatialAugSpec& spatial,
                          Rng& rng) {
  SubVideo view;
  Rng temporal_rng(rng.next_u64());
  Rng spatial_rng(rng.next_u64());
  view.source_indices = sample_temporal(clip, sampler, temporal_rng, &view.strategy);
  auto result = spatial_augment(gather_frames(clip, view.source_indices), spatial, spatial_rng);
  view.frames = std::move(result.frames);
  view.params = result.params;
  return view;
}

// Two independently augmented sub-videos of one clip (a positive pair).
inline std::pair<SubVideo, SubVideo> make_views(const VideoClip& clip, const SamplerSpec& sampler,
                                                const SpatialAugSpec& spatial, Rng& rng) {
  Rng first(rng.next_u64());
  Rng second(rng.next_u64());
  SubVideo a = make_view(clip, sampler, spatial, first);
  SubVideo b = make_view(clip, sampler, spatial, second);
  return {std::move(a), std::move(b)};
}

// Deterministic view: uniform sampling and a centred crop, no color or flip.
inline SubVideo evaluation_view(const VideoClip& clip, std::size_t n, std::size_t out_h, std::size_t out_w) {
  SubVideo view;
  view.source_indices = sample_uniform(clip.frame_count(), n);
  view.strategy = Strategy::uniform;
  view.params.crop = center_crop(clip.height(), clip.width(), out_h, out_w);
  view.frames = apply_spatial(gather_frames(clip, view.source_indices), view.params, out_h, out_w);
  return view;
}

// Stacks sub-videos into an encoder batch [B, 3, T, H, W].
template <typename T>
nn::Tensor<T> to_batch(const std::vector<const SubVideo*>& views) {
  require(!views.empty(), "to_batch: no views");
  const std::size_t frames = views[0]->frames.size();
  require<ShapeError>(frames > 0, "to_batch: empty sub-video");
  const std::size_t h = views[0]->frames[0].height, w = views[0]->frames[0].width;
  nn::Tensor<T> out({views.size(), 3, frames, h, w});
  const std::size_t plane = h * w;
  for (std::size_t b = 0; b < views.size(); ++b) {
    require<ShapeError>(views[b]->frames.size() == frames, "to_batch: views differ in length");
    for (std::size_t t = 0; t < frames; ++t) {
      const Image& img = views[b]->frames[t];
      require<ShapeError>(img.height == h && img.width == w, "to_batch: views differ in size");
      for (std::size_t c = 0; c < 3; ++c) {
        T* dst = out.data() + ((b * 3 + c) * frames + t) * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] = static_cast<T>(img.data[i * 3 + c]);
      }
    }
  }
  return out;
}

}  // namespace stclr::augment
