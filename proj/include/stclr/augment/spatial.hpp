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
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stclr/core/video.hpp"
#include "stclr/error.hpp"
#include "stclr/rng.hpp"

namespace stclr::augment {

struct SpatialAugSpec {
  double area_min = 0.6;
  double area_max = 1.0;
  double aspect_min = 3.0 / 4.0;
  double aspect_max = 4.0 / 3.0;
  double flip_probability = 0.5;
  double brightness = 0.8;
  double contrast = 0.8;
  double saturation = 0.8;
  double hue = 0.2;
  std::size_t output_height = 112;
  std::size_t output_width = 112;
  // Ablation switches; a disabled op is the identity.
  bool random_crop = true;
  bool color = true;
  bool flip = true;
};

inline void validate(const SpatialAugSpec& s) {
  require(s.area_min > 0 && s.area_min <= s.area_max && s.area_max <= 1, "crop area range must satisfy 0 < min <= max <= 1");
  require(s.aspect_min > 0 && s.aspect_min <= s.aspect_max, "crop aspect range must satisfy 0 < min <= max");
  require(s.flip_probability >= 0 && s.flip_probability <= 1, "flip probability must lie in [0, 1]");
  require(s.brightness >= 0 && s.contrast >= 0 && s.saturation >= 0 && s.hue >= 0,
          "color strengths must be non-negative");
  require(s.hue <= 0.5, "hue strength must not exceed 0.5");
  require(s.output_height >= 1 && s.output_width >= 1, "output size must be non-zero");
}

enum class ColorOp { brightness, contrast, saturation, hue };

inline std::string to_string(ColorOp op) {
  switch (op) {
    case ColorOp::brightness: return "brightness";
    case ColorOp::contrast: return "contrast";
    case ColorOp::saturation: return "saturation";
    case ColorOp::hue: return "hue";
  }
  return "?";
}

struct CropBox {
  std::size_t x = 0, y = 0, width = 0, height = 0;
  friend bool operator==(const CropBox&, const CropBox&) = default;
};

// Everything drawn for one view; replaying it through apply_spatial gives the
// same frames.
struct AppliedParams {
  CropBox crop;
  bool crop_fallback = false;
  bool flipped = false;
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  double hue = 0.0;
  std::array<ColorOp, 4> order{ColorOp::brightness, ColorOp::contrast, ColorOp::saturation, ColorOp::hue};

  friend bool operator==(const AppliedParams&, const AppliedParams&) = default;
};

inline nlohmann::json to_json(const AppliedParams& p) {
  nlohmann::json order = nlohmann::json::array();
  for (auto op : p.order) order.push_back(to_string(op));
  return {{"crop", {{"x", p.crop.x}, {"y", p.crop.y}, {"width", p.crop.width}, {"height", p.crop.height}}},
          {"crop_fallback", p.crop_fallback},
          {"flip", p.flipped},
          {"brightness", p.brightness},
          {"contrast", p.contrast},
          {"saturation", p.saturation},
          {"hue", p.hue},
          {"color_order", order}};
}

// Area fraction ~ U(a_min, a_max), log-uniform aspect, uniform placement;
// after 10 infeasible draws, a centred crop of a_max area.
inline CropBox draw_crop(std::size_t height, std::size_t width, const SpatialAugSpec& s, Rng& rng,
                         bool* fallback = nullptr) {
  const double area = static_cast<double>(height) * static_cast<double>(width);
  const double log_lo = std::log(s.aspect_min), log_hi = std::log(s.aspect_max);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * rng.uniform(s.area_min, s.area_max);
    const double aspect = std::exp(rng.uniform(log_lo, log_hi));
    const auto w = static_cast<std::int64_t>(std::lround(std::sqrt(target * aspect)));
    const auto h = static_cast<std::int64_t>(std::lround(std::sqrt(target / aspect)));
    if (w >= 1 && h >= 1 && w <= static_cast<std::int64_t>(width) && h <= static_cast<std::int64_t>(height)) {
      CropBox box;
      box.width = static_cast<std::size_t>(w);
      box.height = static_cast<std::size_t>(h);
      box.y = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(height - box.height)));
      box.x = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(width - box.width)));
      if (fallback) *fallback = false;
      return box;
    }
  }
  const double aspect = std::clamp(static_cast<double>(width) / static_cast<double>(height), s.aspect_min, s.aspect_max);
  const double target = area * s.area_max;
  CropBox box;
  box.width = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::sqrt(target * aspect))), 1, width);
  box.height = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::sqrt(target / aspect))), 1, height);
  box.x = (width - box.width) / 2;
  box.y = (height - box.height) / 2;
  if (fallback) *fallback = true;
  return box;
}

// Largest centred crop with the output aspect ratio.
inline CropBox center_crop(std::size_t height, std::size_t width, std::size_t out_h, std::size_t out_w) {
  CropBox box{0, 0, width, height};
  const double want = static_cast<double>(out_w) / static_cast<double>(out_h);
  if (static_cast<double>(width) / static_cast<double>(height) > want)
    box.width = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(height * want)), 1, width);
  else
    box.height = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(width / want)), 1, height);
  box.x = (width - box.width) / 2;
  box.y = (height - box.height) / 2;
  return box;
}

// Bilinear resize of a crop, sampling at half-pixel centres.
inline Image crop_resize(const Image& src, const CropBox& box, std::size_t out_h, std::size_t out_w) {
  require<ShapeError>(box.width >= 1 && box.height >= 1 && box.x + box.width <= src.width &&
                          box.y + box.height <= src.height,
                      "crop box outside the frame");
  Image out(out_h, out_w);
  const double sy = static_cast<double>(box.height) / static_cast<double>(out_h);
  const double sx = static_cast<double>(box.width) / static_cast<double>(out_w);
  std::vector<std::size_t> x0(out_w), x1(out_w);
  std::vector<double> fx(out_w);
  for (std::size_t x = 0; x < out_w; ++x) {
    const double p = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(box.width - 1));
    x0[x] = static_cast<std::size_t>(p);
    x1[x] = std::min(x0[x] + 1, box.width - 1);
    fx[x] = p - static_cast<double>(x0[x]);
  }
  for (std::size_t y = 0; y < out_h; ++y) {
    const double p = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(box.height - 1));
    const auto y0 = static_cast<std::size_t>(p);
    const std::size_t y1 = std::min(y0 + 1, box.height - 1);
    const double fy = p - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double a = src.at(box.y + y0, box.x + x0[x], c), b = src.at(box.y + y0, box.x + x1[x], c);
        const double d = src.at(box.y + y1, box.x + x0[x], c), e = src.at(box.y + y1, box.x + x1[x], c);
        double top = fx[x] == 0.0 ? a : a + (b - a) * fx[x];
        double bottom = fx[x] == 0.0 ? d : d + (e - d) * fx[x];
        out.at(y, x, c) = static_cast<float>(fy == 0.0 ? top : top + (bottom - top) * fy);
      }
  }
  return out;
}

inline void flip_horizontal(Image& img) {
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width / 2; ++x)
      for (std::size_t c = 0; c < 3; ++c) std::swap(img.at(y, x, c), img.at(y, img.width - 1 - x, c));
}

namespace detail {

inline float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

inline double gray(const Image& img, std::size_t i) {
  return 0.299 * img.data[i] + 0.587 * img.data[i + 1] + 0.114 * img.data[i + 2];
}

inline void adjust_brightness(Image& img, double f) {
  for (auto& v : img.data) v = clamp01(v * f);
}

inline void adjust_contrast(Image& img, double f) {
  double mean = 0;
  for (std::size_t i = 0; i < img.data.size(); i += 3) mean += gray(img, i);
  mean /= static_cast<double>(img.data.size() / 3);
  for (auto& v : img.data) v = clamp01(mean + (v - mean) * f);
}

inline void adjust_saturation(Image& img, double f) {
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    const double g = gray(img, i);
    for (std::size_t c = 0; c < 3; ++c) img.data[i + c] = clamp01(g + (img.data[i + c] - g) * f);
  }
}

inline void adjust_hue(Image& img, double shift) {
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    const double r = img.data[i], g = img.data[i + 1], b = img.data[i + 2];
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b}), delta = mx - mn;
    if (delta <= 0) continue;
    double h;
    if (mx == r)
      h = (g - b) / delta;
    else if (mx == g)
      h = 2.0 + (b - r) / delta;
    else
      h = 4.0 + (r - g) / delta;
    h = h / 6.0 + shift;
    h -= std::floor(h);
    const double s = delta / mx, v = mx;
    const double hh = h * 6.0;
    const int k = static_cast<int>(hh) % 6;
    const double f = hh - std::floor(hh);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    const double table[6][3] = {{v, t, p}, {q, v, p}, {p, v, t}, {p, q, v}, {t, p, v}, {v, p, q}};
    for (int c = 0; c < 3; ++c) img.data[i + static_cast<std::size_t>(c)] = clamp01(table[k][c]);
  }
}

}  // namespace detail

// Color ops whose parameter is the identity are skipped, so identity
// parameters reproduce the input exactly.
inline void apply_color(Image& img, const AppliedParams& p) {
  for (auto op : p.order) switch (op) {
      case ColorOp::brightness:
        if (p.brightness != 1.0) detail::adjust_brightness(img, p.brightness);
        break;
      case ColorOp::contrast:
        if (p.contrast != 1.0) detail::adjust_contrast(img, p.contrast);
        break;
      case ColorOp::saturation:
        if (p.saturation != 1.0) detail::adjust_saturation(img, p.saturation);
        break;
      case ColorOp::hue:
        if (p.hue != 0.0) detail::adjust_hue(img, p.hue);
        break;
    }
}

inline Image apply_spatial(const Image& frame, const AppliedParams& p, std::size_t out_h, std::size_t out_w) {
  Image out = crop_resize(frame, p.crop, out_h, out_w);
  if (p.flipped) flip_horizontal(out);
  apply_color(out, p);
  return out;
}

inline std::vector<Image> apply_spatial(const std::vector<Image>& frames, const AppliedParams& p,
                                        std::size_t out_h, std::size_t out_w) {
  std::vector<Image> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(apply_spatial(f, p, out_h, out_w));
  return out;
}

// Draws one parameter set for a whole sub-video. Crop, flip and color use
// separate sub-streams so switching one op off leaves the others' draws intact.
inline AppliedParams draw_spatial(std::size_t height, std::size_t width, const SpatialAugSpec& s, Rng& rng) {
  validate(s);
  const std::uint64_t base = rng.next_u64();
  AppliedParams p;
  if (s.random_crop) {
    Rng crop_rng(derive_seed(base, {0}));
    p.crop = draw_crop(height, width, s, crop_rng, &p.crop_fallback);
  } else {
    p.crop = CropBox{0, 0, width, height};
  }
  if (s.flip) {
    Rng flip_rng(derive_seed(base, {1}));
    p.flipped = flip_rng.bernoulli(s.flip_probability);
  }
  if (s.color) {
    Rng color_rng(derive_seed(base, {2}));
    p.brightness = color_rng.uniform(std::max(0.0, 1 - s.brightness), 1 + s.brightness);
    p.contrast = color_rng.uniform(std::max(0.0, 1 - s.contrast), 1 + s.contrast);
    p.saturation = color_rng.uniform(std::max(0.0, 1 - s.saturation), 1 + s.saturation);
    p.hue = color_rng.uniform(-s.hue, s.hue);
    color_rng.shuffle(p.order.begin(), p.order.end());
  }
  return p;
}

struct SpatialResult {
  std::vector<Image> frames;
  AppliedParams params;
};

inline SpatialResult spatial_augment(const std::vector<Image>& frames, const SpatialAugSpec& s, Rng& rng) {
  require<ShapeError>(!frames.empty(), "spatial_augment: no frames");
  for (const auto& f : frames)
    require<ShapeError>(f.height == frames[0].height && f.width == frames[0].width,
                        "spatial_augment: frames differ in size");
  auto params = draw_spatial(frames[0].height, frames[0].width, s, rng);
  return {apply_spatial(frames, params, s.output_height, s.output_width), params};
}

}  // namespace stclr::augment
