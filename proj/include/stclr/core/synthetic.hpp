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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "stclr/core/dataset.hpp"
#include "stclr/rng.hpp"

namespace stclr {

struct SyntheticSpec {
  std::size_t classes = 4;
  std::size_t subjects = 8;
  std::size_t videos_per_subject_per_class = 2;
  std::size_t frames = 24;
  std::size_t height = 32;
  std::size_t width = 32;
  std::uint64_t seed = 0;
};

// Everything needed to re-render one clip.
struct SyntheticClipParams {
  std::string clip_id;
  std::size_t label = 0;
  std::string subject_id;
  std::string video_id;
  // class motif
  double direction = 0;  // radians, 0 = rightwards, pi/2 = upwards
  double frequency = 0;  // oscillation cycles over the clip
  // subject nuisance
  double hue = 0;
  double sigma = 0;  // blob radius in pixels
  double background = 0;
  double offset_x = 0;
  double offset_y = 0;
  // per video
  double phase = 0;
  double noise = 0;
  std::uint64_t noise_seed = 0;
};

inline std::vector<std::string> synthetic_class_names(std::size_t classes) {
  auto defaults = LabelTaxonomy::default_names();
  if (classes <= defaults.size()) return {defaults.begin(), defaults.begin() + classes};
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "class_%02zu", c);
    names.push_back(buf);
  }
  return names;
}

// Directions cover the right half-plane only, from straight up to straight
// down, so a horizontal flip never turns one class's motion into another's.
inline double synthetic_direction(std::size_t label, std::size_t classes) {
  if (classes == 1) return 0.0;
  return std::numbers::pi / 2 - std::numbers::pi * static_cast<double>(label) / static_cast<double>(classes - 1);
}

inline double synthetic_frequency(std::size_t label) { return 1.0 + static_cast<double>(label); }

namespace detail {

inline void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  h = (h - std::floor(h)) * 6.0;
  const int i = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  const double table[6][3] = {{v, t, p}, {q, v, p}, {p, v, t}, {p, q, v}, {t, p, v}, {v, p, q}};
  for (int c = 0; c < 3; ++c) rgb[c] = table[i][c];
}

}  // namespace detail

inline VideoClip render_synthetic_clip(const SyntheticClipParams& p, const SyntheticSpec& spec) {
  Rng noise(p.noise_seed);
  const double m = static_cast<double>(std::min(spec.height, spec.width));
  const double drift = 0.35 * m, amplitude = 0.08 * m;
  const double dx = std::cos(p.direction), dy = -std::sin(p.direction);
  const double px = -dy, py = dx;
  double color[3];
  detail::hsv_to_rgb(p.hue, 0.75, 0.95, color);

  VideoClip clip;
  clip.subject_id = p.subject_id;
  clip.label = p.label;
  clip.source_path = "synthetic:" + p.clip_id;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double u = spec.frames > 1 ? static_cast<double>(t) / static_cast<double>(spec.frames - 1) : 0.0;
    const double wave = amplitude * std::sin(2 * std::numbers::pi * p.frequency * u + p.phase);
    const double cx = spec.width / 2.0 + p.offset_x + (u - 0.5) * drift * dx + wave * px;
    const double cy = spec.height / 2.0 + p.offset_y + (u - 0.5) * drift * dy + wave * py;
    Image img(spec.height, spec.width);
    for (std::size_t y = 0; y < spec.height; ++y)
      for (std::size_t x = 0; x < spec.width; ++x) {
        const double ex = x + 0.5 - cx, ey = y + 0.5 - cy;
        const double g = std::exp(-(ex * ex + ey * ey) / (2 * p.sigma * p.sigma));
        for (std::size_t c = 0; c < 3; ++c) {
          double v = p.background + (color[c] - p.background) * g + noise.normal(0, p.noise);
          v = std::clamp(v, 0.0, 1.0);
          img.at(y, x, c) = static_cast<float>(std::round(v * 255.0) / 255.0);
        }
      }
    clip.frames.push_back(std::move(img));
  }
  return clip;
}

// Each class moves a blob along its own direction with its own oscillation
// frequency; subjects differ in colour, size, background and start offset.
// Clips are quantized to 8 bits so they survive a PNG round trip unchanged.
inline DatasetIndex generate_synthetic(const SyntheticSpec& spec,
                                       std::vector<SyntheticClipParams>* log = nullptr) {
  require(spec.classes >= 1 && spec.subjects >= 1 && spec.videos_per_subject_per_class >= 1 &&
              spec.frames >= 1,
          "synthetic spec counts must be at least 1");
  require(spec.height >= 1 && spec.width >= 1, "synthetic frame size must be non-zero");
  DatasetIndex index{{}, LabelTaxonomy(synthetic_class_names(spec.classes))};
  const double m = static_cast<double>(std::min(spec.height, spec.width));
  if (log) log->clear();
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    Rng subject(derive_seed(spec.seed, {1, s}));
    char sid[32];
    std::snprintf(sid, sizeof sid, "s%03zu", s);
    const double hue = subject.uniform();
    const double sigma = subject.uniform(0.07, 0.11) * m;
    const double background = subject.uniform(0.05, 0.3);
    const double ox = subject.uniform(-0.08, 0.08) * m, oy = subject.uniform(-0.08, 0.08) * m;
    for (std::size_t c = 0; c < spec.classes; ++c)
      for (std::size_t v = 0; v < spec.videos_per_subject_per_class; ++v) {
        Rng video(derive_seed(spec.seed, {2, s, c, v}));
        char vid[32];
        std::snprintf(vid, sizeof vid, "c%zuv%02zu", c, v);
        SyntheticClipParams p;
        p.subject_id = sid;
        p.video_id = vid;
        p.label = c;
        p.clip_id = index.taxonomy.name(c) + "/" + p.subject_id + "_" + p.video_id;
        p.direction = synthetic_direction(c, spec.classes);
        p.frequency = synthetic_frequency(c);
        p.hue = hue;
        p.sigma = sigma;
        p.background = background;
        p.offset_x = ox;
        p.offset_y = oy;
        p.phase = video.uniform(0, 2 * std::numbers::pi);
        p.noise = 0.03;
        p.noise_seed = derive_seed(spec.seed, {3, s, c, v});

        auto clip = std::make_shared<const VideoClip>(render_synthetic_clip(p, spec));
        ClipDescriptor d;
        d.id = p.clip_id;
        d.path = *clip->source_path;
        d.subject_id = p.subject_id;
        d.video_id = p.video_id;
        d.label = c;
        d.frame_count = spec.frames;
        d.height = spec.height;
        d.width = spec.width;
        d.materialized = std::move(clip);
        index.clips.push_back(std::move(d));
        if (log) log->push_back(p);
      }
  }
  return index;
}

inline void write_gen_params(const std::filesystem::path& file, const std::vector<SyntheticClipParams>& log) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << "clip_id,label,subject_id,video_id,direction,frequency,hue,sigma,background,offset_x,offset_y,phase,noise,noise_seed\n";
  out.precision(17);
  for (const auto& p : log)
    out << p.clip_id << ',' << p.label << ',' << p.subject_id << ',' << p.video_id << ',' << p.direction << ','
        << p.frequency << ',' << p.hue << ',' << p.sigma << ',' << p.background << ',' << p.offset_x << ','
        << p.offset_y << ',' << p.phase << ',' << p.noise << ','
        << p.noise_seed << '\n';
}

}  // namespace stclr
