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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "stclr/core/png_io.hpp"
#include "stclr/core/video.hpp"
#include "stclr/error.hpp"

namespace stclr {

namespace fs = std::filesystem;

struct ClipDescriptor {
  std::string id;  // "<class>/<subject>_<video>", unique within an index
  std::string path;
  std::string subject_id;
  std::string video_id;
  std::size_t label = 0;
  std::size_t frame_count = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  // Set for in-memory clips (synthetic data); otherwise frames are decoded on access.
  std::shared_ptr<const VideoClip> materialized;
};

struct DatasetIndex {
  std::vector<ClipDescriptor> clips;
  LabelTaxonomy taxonomy;

  std::size_t size() const { return clips.size(); }
  bool empty() const { return clips.empty(); }

  DatasetIndex subset(const std::vector<std::size_t>& positions) const {
    DatasetIndex out{{}, taxonomy};
    out.clips.reserve(positions.size());
    for (auto p : positions) out.clips.push_back(clips.at(p));
    return out;
  }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(taxonomy.count(), 0);
    for (const auto& c : clips) ++counts.at(c.label);
    return counts;
  }

  std::vector<std::string> subjects() const {
    std::vector<std::string> s;
    for (const auto& c : clips) s.push_back(c.subject_id);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }
};

inline std::string frame_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05zu.png", i);
  return buf;
}

inline VideoClip load_clip(const ClipDescriptor& d) {
  if (d.materialized) return *d.materialized;
  VideoClip clip;
  clip.subject_id = d.subject_id;
  clip.label = d.label;
  clip.source_path = d.path;
  clip.frames.reserve(d.frame_count);
  for (std::size_t i = 0; i < d.frame_count; ++i) {
    clip.frames.push_back(read_png(fs::path(d.path) / frame_file_name(i)));
    if (clip.frames.back().height != d.height || clip.frames.back().width != d.width)
      throw LoadError("frame size differs from the first frame: " +
                      (fs::path(d.path) / frame_file_name(i)).string());
  }
  return clip;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct LabelOverride {
  std::string subject_id;
  std::size_t label;
};

inline std::map<std::string, LabelOverride> read_labels_csv(const fs::path& file,
                                                            const LabelTaxonomy& taxonomy) {
  std::ifstream in(file);
  if (!in) throw LoadError("cannot read " + file.string());
  std::map<std::string, LabelOverride> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (line_no == 1 && !cells.empty() && cells[0] == "path") continue;
    if (cells.size() != 3)
      throw LoadError(file.string() + ":" + std::to_string(line_no) + ": expected path,subject_id,label");
    std::size_t label;
    if (auto named = taxonomy.find(cells[2])) {
      label = *named;
    } else {
      try {
        std::size_t used = 0;
        label = std::stoul(cells[2], &used);
        if (used != cells[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw TaxonomyError(file.string() + ":" + std::to_string(line_no) + ": unknown label '" +
                            cells[2] + "'");
      }
      if (label >= taxonomy.count())
        throw TaxonomyError(file.string() + ":" + std::to_string(line_no) + ": label out of range");
    }
    out[fs::path(cells[0]).lexically_normal().generic_string()] = {cells[1], label};
  }
  return out;
}

}  // namespace detail

// Scans <root>/<class>/<subject>_<video>/frame_NNNNN.png. Frames are decoded
// later by load_clip; only the first frame's header is read here.
inline DatasetIndex load_dataset(const fs::path& root, const LabelTaxonomy& taxonomy = {}) {
  if (!fs::is_directory(root)) throw LoadError("dataset root is not a directory: " + root.string());
  DatasetIndex index{{}, taxonomy};
  std::map<std::string, detail::LabelOverride> overrides;
  if (fs::exists(root / "labels.csv")) overrides = detail::read_labels_csv(root / "labels.csv", taxonomy);

  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) class_dirs.push_back(e.path());
  std::sort(class_dirs.begin(), class_dirs.end());

  static const std::regex frame_re(R"(frame_(\d{5})\.png)");
  for (const auto& class_dir : class_dirs) {
    const std::string class_name = class_dir.filename().string();
    const auto label = taxonomy.find(class_name);
    if (!label)
      throw TaxonomyError("directory " + class_dir.string() + " names a class outside the taxonomy");
    std::vector<fs::path> videos;
    for (const auto& e : fs::directory_iterator(class_dir))
      if (e.is_directory()) videos.push_back(e.path());
    std::sort(videos.begin(), videos.end());
    for (const auto& vdir : videos) {
      const std::string name = vdir.filename().string();
      const auto cut = name.rfind('_');
      if (cut == std::string::npos || cut == 0 || cut + 1 == name.size())
        throw LoadError("video directory is not <subject>_<video>: " + vdir.string());
      ClipDescriptor d;
      d.id = class_name + "/" + name;
      d.path = vdir.string();
      d.subject_id = name.substr(0, cut);
      d.video_id = name.substr(cut + 1);
      d.label = *label;

      std::vector<std::size_t> numbers;
      for (const auto& f : fs::directory_iterator(vdir)) {
        std::smatch m;
        const std::string fname = f.path().filename().string();
        if (std::regex_match(fname, m, frame_re)) numbers.push_back(std::stoul(m[1].str()));
      }
      if (numbers.empty()) throw LoadError("video directory has no frames: " + vdir.string());
      std::sort(numbers.begin(), numbers.end());
      for (std::size_t i = 0; i < numbers.size(); ++i)
        if (numbers[i] != i) throw LoadError("missing frame " + (vdir / frame_file_name(i)).string());
      d.frame_count = numbers.size();
      const auto header = read_png_header(vdir / frame_file_name(0));
      d.height = header.height;
      d.width = header.width;

      if (auto it = overrides.find(d.id); it != overrides.end()) {
        d.subject_id = it->second.subject_id;
        d.label = it->second.label;
      }
      index.clips.push_back(std::move(d));
    }
  }
  if (index.clips.empty()) throw EmptyDatasetError("no videos found under " + root.string());
  return index;
}

// Writes every clip of the index in the on-disk layout. Pixel values are
// quantized to 8 bits.
inline void write_dataset(const DatasetIndex& index, const fs::path& root) {
  fs::create_directories(root);
  for (const auto& d : index.clips) {
    const VideoClip clip = load_clip(d);
    const fs::path dir =
        root / index.taxonomy.name(d.label) / (d.subject_id + "_" + d.video_id);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < clip.frames.size(); ++i) write_png(dir / frame_file_name(i), clip.frames[i]);
  }
}

}  // namespace stclr
