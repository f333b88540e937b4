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
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stclr/error.hpp"

namespace stclr {

// H x W x 3 image, row-major with interleaved channels, values in [0, 1].
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;

  Image() = default;
  Image(std::size_t h, std::size_t w, float fill = 0.0f) : height(h), width(w), data(h * w * 3, fill) {}

  float& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * 3 + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * 3 + c]; }

  friend bool operator==(const Image&, const Image&) = default;
};

struct VideoClip {
  std::vector<Image> frames;
  std::string subject_id;
  std::size_t label = 0;
  std::optional<std::string> source_path;

  std::size_t frame_count() const { return frames.size(); }
  std::size_t height() const { return frames.empty() ? 0 : frames.front().height; }
  std::size_t width() const { return frames.empty() ? 0 : frames.front().width; }
};

inline void validate(const VideoClip& clip) {
  require<ShapeError>(!clip.frames.empty(), "clip has no frames");
  const std::size_t h = clip.height(), w = clip.width();
  require<ShapeError>(h > 0 && w > 0, "clip frames have zero size");
  for (const auto& f : clip.frames) {
    require<ShapeError>(f.height == h && f.width == w && f.data.size() == h * w * 3,
                        "clip frames differ in size");
    for (float v : f.data)
      require(v >= 0.0f && v <= 1.0f, "pixel value outside [0, 1]");
  }
}

class LabelTaxonomy {
 public:
  LabelTaxonomy() : LabelTaxonomy(default_names()) {}
  explicit LabelTaxonomy(std::vector<std::string> names) : names_(std::move(names)) {
    require(!names_.empty(), "taxonomy needs at least one class");
    std::set<std::string> seen;
    for (const auto& n : names_) {
      require(!n.empty(), "taxonomy class names must be non-empty");
      require(seen.insert(n).second, "duplicate taxonomy class name: " + n);
    }
  }

  static std::vector<std::string> default_names() {
    return {"Happy", "Sad", "Surprised", "Angry", "Fear", "Disgust"};
  }

  std::size_t count() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t label) const {
    require(label < names_.size(), "label out of range");
    return names_[label];
  }
  std::optional<std::size_t> find(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }
  std::size_t index_of(const std::string& name) const {
    auto i = find(name);
    if (!i) throw TaxonomyError("unknown class '" + name + "'");
    return *i;
  }

  friend bool operator==(const LabelTaxonomy&, const LabelTaxonomy&) = default;

 private:
  std::vector<std::string> names_;
};

}  // namespace stclr
