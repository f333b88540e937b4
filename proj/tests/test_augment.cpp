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

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>

#include "stclr/augment/views.hpp"

using namespace stclr;
using namespace stclr::augment;

namespace {

Image random_image(std::size_t h, std::size_t w, Rng& rng) {
  Image img(h, w);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform());
  return img;
}

VideoClip random_clip(std::size_t frames, std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  VideoClip clip;
  clip.subject_id = "s";
  for (std::size_t i = 0; i < frames; ++i) clip.frames.push_back(random_image(h, w, rng));
  return clip;
}

SpatialAugSpec spec_for(std::size_t h, std::size_t w) {
  SpatialAugSpec s;
  s.output_height = h;
  s.output_width = w;
  return s;
}

void expect_sorted_in_range(const Indices& idx, std::size_t L, bool strict) {
  for (auto i : idx) EXPECT_LT(i, L);
  for (std::size_t k = 1; k < idx.size(); ++k) {
    if (strict)
      EXPECT_LT(idx[k - 1], idx[k]);
    else
      EXPECT_LE(idx[k - 1], idx[k]);
  }
}

Indices iota(std::size_t n) {
  Indices v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST(PureRandom, ExhaustsRangeWhenLEqualsN) {
  Rng rng(1);
  EXPECT_EQ(sample_pure_random(16, 16, rng), iota(16));
}

TEST(PureRandom, StrictlyIncreasingWithinBounds) {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    auto idx = sample_pure_random(64, 16, rng);
    ASSERT_EQ(idx.size(), 16u);
    expect_sorted_in_range(idx, 64, true);
  }
}

TEST(PureRandom, ShortClipsSampleWithReplacement) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    auto idx = sample_pure_random(5, 16, rng);
    ASSERT_EQ(idx.size(), 16u);
    expect_sorted_in_range(idx, 5, false);
  }
  EXPECT_THROW(sample_pure_random(5, 0, rng), ArgumentError);
  EXPECT_THROW(sample_pure_random(0, 4, rng), ArgumentError);
}

TEST(PureRandom, MonteCarloInclusionFrequency) {
  Rng rng(4);
  std::array<std::size_t, 20> hits{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    for (auto k : sample_pure_random(20, 16, rng)) ++hits[k];
  for (std::size_t k = 0; k < 20; ++k) {
    const double freq = static_cast<double>(hits[k]) / draws;
    EXPECT_GT(hits[k], 0u);
    EXPECT_NEAR(freq, 16.0 / 20.0, 0.05 * 16.0 / 20.0) << "index " << k;
  }
}

TEST(Uniform, ExactSpacingAndIdentity) {
  Indices even;
  for (std::size_t i = 0; i <= 30; i += 2) even.push_back(i);
  EXPECT_EQ(sample_uniform(31, 16), even);
  EXPECT_EQ(sample_uniform(16, 16), iota(16));
}

TEST(Uniform, TwentyFramesMatchesRoundingFormula) {
  const Indices expected{0, 1, 3, 4, 5, 6, 8, 9, 10, 11, 13, 14, 15, 16, 18, 19};
  EXPECT_EQ(sample_uniform(20, 16), expected);
  // independent evaluation of round-half-up(i (L-1)/(n-1))
  for (std::size_t L = 2; L < 80; ++L)
    for (std::size_t n = 2; n < 40; ++n) {
      auto idx = sample_uniform(L, n);
      for (std::size_t i = 0; i < n; ++i) {
        const long double exact = static_cast<long double>(i) * (L - 1) / (n - 1);
        EXPECT_EQ(idx[i], static_cast<std::size_t>(std::floor(exact + 0.5L))) << L << " " << n << " " << i;
      }
      EXPECT_EQ(idx.front(), 0u);
      EXPECT_EQ(idx.back(), L - 1);
      expect_sorted_in_range(idx, L, L >= n);
    }
}

TEST(Uniform, DegenerateLengths) {
  EXPECT_EQ(sample_uniform(1, 4), (Indices{0, 0, 0, 0}));
  EXPECT_EQ(sample_uniform(9, 1), (Indices{0}));
}

TEST(Sequential, ContiguousRunWithValidStart) {
  Rng rng(5);
  std::map<std::size_t, int> starts;
  for (int i = 0; i < 1000; ++i) {
    auto idx = sample_sequential(20, 16, rng);
    ASSERT_EQ(idx.size(), 16u);
    ++starts[idx[0]];
    for (std::size_t k = 1; k < idx.size(); ++k) EXPECT_EQ(idx[k] - idx[k - 1], 1u);
    EXPECT_LE(idx.back(), 19u);
  }
  EXPECT_EQ(starts.size(), 5u);
  EXPECT_EQ(starts.begin()->first, 0u);
  EXPECT_EQ(starts.rbegin()->first, 4u);
  EXPECT_EQ(sample_sequential(16, 16, rng), iota(16));
}

TEST(Sequential, ShortClipsWrapAndSort) {
  Rng rng(6);
  EXPECT_EQ(sample_sequential(3, 7, rng), (Indices{0, 0, 0, 1, 1, 2, 2}));
}

TEST(TemporalChoice, StrategyFrequenciesAreUniform) {
  Rng rng(7);
  std::map<Strategy, int> counts;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) {
    Strategy used;
    sample_temporal(40, SamplerSpec{16, Strategy::random_choice}, rng, &used);
    ++counts[used];
  }
  ASSERT_EQ(counts.size(), 3u);
  for (auto [s, c] : counts) EXPECT_NEAR(static_cast<double>(c) / draws, 1.0 / 3.0, 0.02) << to_string(s);
}

TEST(TemporalChoice, NamedStrategyDelegates) {
  Rng rng(8);
  Indices even;
  for (std::size_t i = 0; i <= 30; i += 2) even.push_back(i);
  Strategy used;
  EXPECT_EQ(sample_temporal(31, SamplerSpec{16, Strategy::uniform}, rng, &used), even);
  EXPECT_EQ(used, Strategy::uniform);
}

TEST(TemporalChoice, IndependentStreamsGiveDifferentSubVideos) {
  auto clip = random_clip(64, 2, 2, 9);
  int different = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng a(derive_seed(t, {0})), b(derive_seed(t, {1}));
    different += sample_temporal(clip, SamplerSpec{}, a) != sample_temporal(clip, SamplerSpec{}, b);
  }
  EXPECT_GE(different, 80);
}

TEST(Spatial, IdentityParametersReproduceInput) {
  auto clip = random_clip(4, 12, 18, 10);
  SpatialAugSpec s = spec_for(12, 18);
  s.area_min = s.area_max = 1.0;
  s.aspect_min = s.aspect_max = 18.0 / 12.0;
  s.flip_probability = 0;
  s.brightness = s.contrast = s.saturation = s.hue = 0;
  Rng rng(11);
  auto out = spatial_augment(clip.frames, s, rng);
  EXPECT_EQ(out.frames, clip.frames);
  EXPECT_EQ(out.params.crop, (CropBox{0, 0, 18, 12}));
}

TEST(Spatial, IdenticalFramesStayIdentical) {
  Rng data(12);
  const Image frame = random_image(20, 20, data);
  std::vector<Image> frames(6, frame);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto out = spatial_augment(frames, spec_for(16, 16), rng);
    for (const auto& f : out.frames) EXPECT_EQ(f, out.frames[0]);
  }
}

TEST(Spatial, CommutesWithFramePermutation) {
  auto clip = random_clip(5, 20, 24, 13);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng pick(seed + 100);
    const std::size_t p = pick.uniform_index(5), q = pick.uniform_index(5);
    auto swapped = clip.frames;
    std::swap(swapped[p], swapped[q]);
    Rng r1(seed), r2(seed);
    auto a = spatial_augment(clip.frames, spec_for(16, 16), r1);
    auto b = spatial_augment(swapped, spec_for(16, 16), r2);
    std::swap(a.frames[p], a.frames[q]);
    EXPECT_EQ(a.frames, b.frames);
  }
}

TEST(Spatial, OutputsStayInUnitRange) {
  auto clip = random_clip(3, 20, 20, 14);
  SpatialAugSpec s = spec_for(10, 14);
  s.brightness = s.contrast = s.saturation = 0.95;
  s.hue = 0.5;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto out = spatial_augment(clip.frames, s, rng);
    for (const auto& f : out.frames) {
      EXPECT_EQ(f.height, 10u);
      EXPECT_EQ(f.width, 14u);
      for (float v : f.data) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
      }
    }
  }
}

TEST(Spatial, FlipIsAnInvolution) {
  auto clip = random_clip(3, 16, 16, 15);
  AppliedParams p;
  p.crop = CropBox{2, 3, 10, 10};
  p.brightness = 1.2;
  p.hue = 0.1;
  auto plain = apply_spatial(clip.frames, p, 10, 10);
  p.flipped = true;
  auto flipped = apply_spatial(clip.frames, p, 10, 10);
  EXPECT_NE(flipped, plain);
  for (std::size_t t = 0; t < flipped.size(); ++t) {
    flip_horizontal(flipped[t]);
    for (std::size_t i = 0; i < plain[t].data.size(); ++i) EXPECT_NEAR(flipped[t].data[i], plain[t].data[i], 1e-6);
  }
}

TEST(Spatial, CropDrawsRespectRanges) {
  SpatialAugSpec s = spec_for(8, 8);
  Rng rng(16);
  int fallbacks = 0;
  for (int i = 0; i < 2000; ++i) {
    bool fallback = true;
    auto box = draw_crop(90, 120, s, rng, &fallback);
    if (fallback) {
      ++fallbacks;
      continue;
    }
    EXPECT_LE(box.x + box.width, 120u);
    EXPECT_LE(box.y + box.height, 90u);
    const double area = static_cast<double>(box.width * box.height) / (90.0 * 120.0);
    EXPECT_GE(area, 0.6 * 0.95);
    EXPECT_LE(area, 1.0);
    const double aspect = static_cast<double>(box.width) / box.height;
    EXPECT_GE(aspect, 0.75 * 0.95);
    EXPECT_LE(aspect, 4.0 / 3.0 * 1.05);
  }
  EXPECT_LT(fallbacks, 40);
}

TEST(Spatial, InfeasibleAspectFallsBackToCentreCrop) {
  SpatialAugSpec s = spec_for(8, 8);
  s.area_min = 0.9;
  s.aspect_min = s.aspect_max = 10.0;
  Rng rng(17);
  bool fallback = false;
  auto box = draw_crop(32, 32, s, rng, &fallback);
  EXPECT_TRUE(fallback);
  EXPECT_EQ(box.width, 32u);
  EXPECT_EQ(box.x, 0u);
  EXPECT_EQ(box.y, (32 - box.height) / 2);
}

TEST(Spatial, HalfPixelDownscaleAveragesNeighbours) {
  Image img(4, 4);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(y * 4 + x) / 16.0f;
  auto out = crop_resize(img, CropBox{0, 0, 4, 4}, 2, 2);
  EXPECT_NEAR(out.at(0, 0, 0), (0 + 1 + 4 + 5) / 64.0, 1e-7);
  EXPECT_NEAR(out.at(1, 1, 2), (10 + 11 + 14 + 15) / 64.0, 1e-7);
}

TEST(Spatial, ColorOpsMatchDefinitions) {
  Image img(1, 2);
  img.data = {0.2f, 0.4f, 0.6f, 0.8f, 0.1f, 0.3f};
  AppliedParams p;
  p.crop = CropBox{0, 0, 2, 1};
  p.brightness = 1.5;
  auto b = apply_spatial(img, p, 1, 2);
  EXPECT_NEAR(b.data[0], 0.3, 1e-6);
  EXPECT_NEAR(b.data[2], 0.9, 1e-6);
  EXPECT_NEAR(b.data[3], 1.0, 1e-6);
  p.brightness = 1.0;
  p.saturation = 0.0;
  auto g = apply_spatial(img, p, 1, 2);
  const double gray0 = 0.299 * 0.2 + 0.587 * 0.4 + 0.114 * 0.6;
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(g.data[c], gray0, 1e-6);
  p.saturation = 1.0;
  p.hue = 1.0 / 3.0;  // red -> green
  Image red(1, 1);
  red.data = {0.9f, 0.1f, 0.1f};
  auto h = apply_spatial(red, AppliedParams{CropBox{0, 0, 1, 1}, false, false, 1, 1, 1, 1.0 / 3.0, p.order}, 1, 1);
  EXPECT_NEAR(h.data[0], 0.1, 1e-6);
  EXPECT_NEAR(h.data[1], 0.9, 1e-6);
  EXPECT_NEAR(h.data[2], 0.1, 1e-6);
}

TEST(Spatial, ColorOrderIsRandomizedAndRecorded) {
  std::map<std::array<ColorOp, 4>, int> orders;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    ++orders[draw_spatial(16, 16, spec_for(8, 8), rng).order];
  }
  EXPECT_EQ(orders.size(), 24u);
  Rng rng(1);
  auto j = to_json(draw_spatial(16, 16, spec_for(8, 8), rng));
  for (const char* key : {"crop", "crop_fallback", "flip", "brightness", "contrast", "saturation", "hue", "color_order"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["color_order"].size(), 4u);
}

TEST(Spatial, FlipFrequencyFollowsProbability) {
  int flips = 0;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    Rng rng(seed);
    flips += draw_spatial(8, 8, spec_for(8, 8), rng).flipped;
  }
  EXPECT_NEAR(flips / 4000.0, 0.5, 0.03);
}

TEST(Spatial, DisablingAnOpOnlyChangesItsOwnColumn) {
  SpatialAugSpec on = spec_for(8, 8);
  SpatialAugSpec no_flip = on;
  no_flip.flip = false;
  SpatialAugSpec no_color = on;
  no_color.color = false;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng a(seed), b(seed), c(seed);
    auto pa = draw_spatial(20, 20, on, a);
    auto pb = draw_spatial(20, 20, no_flip, b);
    auto pc = draw_spatial(20, 20, no_color, c);
    EXPECT_FALSE(pb.flipped);
    pb.flipped = pa.flipped;
    EXPECT_EQ(pa, pb);
    EXPECT_EQ(pc.crop, pa.crop);
    EXPECT_EQ(pc.flipped, pa.flipped);
    EXPECT_EQ(pc.brightness, 1.0);
    EXPECT_EQ(pc.hue, 0.0);
  }
}

TEST(Spatial, RejectsInvalidSpecs) {
  Rng rng(0);
  auto s = spec_for(8, 8);
  s.area_min = 0;
  EXPECT_THROW(draw_spatial(8, 8, s, rng), ArgumentError);
  s = spec_for(8, 8);
  s.hue = 0.6;
  EXPECT_THROW(draw_spatial(8, 8, s, rng), ArgumentError);
  s = spec_for(8, 8);
  s.flip_probability = 1.5;
  EXPECT_THROW(draw_spatial(8, 8, s, rng), ArgumentError);
  std::vector<Image> mixed{Image(4, 4), Image(4, 5)};
  EXPECT_THROW(spatial_augment(mixed, spec_for(4, 4), rng), ShapeError);
}

TEST(Views, ShapeContract) {
  auto clip = random_clip(24, 32, 32, 18);
  Rng rng(19);
  auto [a, b] = make_views(clip, SamplerSpec{8, Strategy::random_choice}, spec_for(16, 16), rng);
  for (const auto* v : {&a, &b}) {
    ASSERT_EQ(v->frames.size(), 8u);
    ASSERT_EQ(v->source_indices.size(), 8u);
    for (const auto& f : v->frames) {
      EXPECT_EQ(f.height, 16u);
      EXPECT_EQ(f.width, 16u);
    }
  }
}

TEST(Views, IndependentDrawsDiffer) {
  auto clip = random_clip(24, 16, 16, 20);
  int differ = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto [a, b] = make_views(clip, SamplerSpec{8, Strategy::random_choice}, spec_for(8, 8), rng);
    differ += !(a.params == b.params);
  }
  EXPECT_GE(differ, 99);
}

TEST(Views, DeterministicUnderSeed) {
  auto clip = random_clip(24, 16, 16, 21);
  Rng r1(5), r2(5);
  auto [a1, b1] = make_views(clip, SamplerSpec{8, Strategy::random_choice}, spec_for(8, 8), r1);
  auto [a2, b2] = make_views(clip, SamplerSpec{8, Strategy::random_choice}, spec_for(8, 8), r2);
  EXPECT_EQ(a1.frames, a2.frames);
  EXPECT_EQ(b1.frames, b2.frames);
  EXPECT_EQ(a1.source_indices, a2.source_indices);
  EXPECT_EQ(to_json(b1), to_json(b2));
}

TEST(Views, EvaluationViewIsDeterministicCentreCrop) {
  auto clip = random_clip(24, 32, 32, 22);
  auto v = evaluation_view(clip, 8, 32, 32);
  EXPECT_EQ(v.source_indices, sample_uniform(24, 8));
  for (std::size_t t = 0; t < 8; ++t) EXPECT_EQ(v.frames[t], clip.frames[v.source_indices[t]]);
  auto wide = random_clip(4, 10, 20, 23);
  auto w = evaluation_view(wide, 2, 5, 5);
  EXPECT_EQ(w.params.crop, (CropBox{5, 0, 10, 10}));
}

TEST(Views, BatchLayoutIsChannelsThenTime) {
  auto clip = random_clip(4, 3, 5, 24);
  auto v = evaluation_view(clip, 4, 3, 5);
  auto t = to_batch<float>({&v, &v});
  EXPECT_EQ(t.shape(), (nn::Shape{2, 3, 4, 3, 5}));
  EXPECT_EQ(t.at({1, 2, 3, 1, 4}), clip.frames[3].at(1, 4, 2));
  EXPECT_EQ(t.at({0, 0, 1, 2, 0}), clip.frames[1].at(2, 0, 0));
}
