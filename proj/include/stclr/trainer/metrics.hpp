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
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stclr/core/png_io.hpp"
#include "stclr/core/video.hpp"
#include "stclr/error.hpp"

namespace stclr::trainer {

struct Metrics {
  std::vector<double> epoch_losses;
  double accuracy = 0;
  double loss = 0;
  // confusion[truth][prediction]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<double> fold_accuracies;
  double wall_seconds = 0;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : confusion) n += std::accumulate(row.begin(), row.end(), std::size_t{0});
    return n;
  }
  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> out;
    for (const auto& row : confusion) out.push_back(std::accumulate(row.begin(), row.end(), std::size_t{0}));
    return out;
  }
};

inline Metrics score_predictions(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                                 std::size_t classes) {
  require<ShapeError>(truth.size() == predicted.size(), "score_predictions: length mismatch");
  require(!truth.empty(), "score_predictions: empty test split");
  Metrics m;
  m.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] < classes && predicted[i] < classes, "score_predictions: label out of range");
    ++m.confusion[truth[i]][predicted[i]];
    correct += truth[i] == predicted[i];
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  return m;
}

inline nlohmann::json to_json(const Metrics& m, const LabelTaxonomy& taxonomy) {
  return {{"accuracy", m.accuracy},
          {"loss", m.loss},
          {"classes", taxonomy.names()},
          {"confusion", m.confusion},
          {"class_counts", m.class_counts()},
          {"epoch_losses", m.epoch_losses},
          {"fold_accuracies", m.fold_accuracies},
          {"wall_seconds", m.wall_seconds}};
}

inline void write_confusion_csv(const Metrics& m, const LabelTaxonomy& taxonomy, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << "truth\\prediction";
  for (const auto& n : taxonomy.names()) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < m.confusion.size(); ++r) {
    out << taxonomy.name(r);
    for (auto v : m.confusion[r]) out << ',' << v;
    out << '\n';
  }
}

// Row-normalized confusion matrix as an image, one cell per `cell` pixels,
// white (0) to dark blue (1).
inline void write_confusion_heatmap(const Metrics& m, const std::filesystem::path& file, std::size_t cell = 24) {
  const std::size_t c = m.confusion.size();
  require(c > 0, "empty confusion matrix");
  Image img(c * cell, c * cell, 1.0f);
  for (std::size_t r = 0; r < c; ++r) {
    const double row = static_cast<double>(std::accumulate(m.confusion[r].begin(), m.confusion[r].end(), std::size_t{0}));
    for (std::size_t k = 0; k < c; ++k) {
      const double v = row > 0 ? static_cast<double>(m.confusion[r][k]) / row : 0.0;
      const float rgb[3] = {static_cast<float>(1 - 0.9 * v), static_cast<float>(1 - 0.7 * v), static_cast<float>(1 - 0.3 * v)};
      for (std::size_t y = r * cell; y < (r + 1) * cell; ++y)
        for (std::size_t x = k * cell; x < (k + 1) * cell; ++x)
          for (std::size_t ch = 0; ch < 3; ++ch) img.at(y, x, ch) = rgb[ch];
    }
  }
  write_png(file, img);
}

inline void write_metrics(const Metrics& m, const LabelTaxonomy& taxonomy, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "metrics.json") << to_json(m, taxonomy).dump(2) << '\n';
  write_confusion_csv(m, taxonomy, dir / "confusion.csv");
  write_confusion_heatmap(m, dir / "confusion.png");
}

}  // namespace stclr::trainer
