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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace stclr::trainer {

// Append-only JSON-lines training log. Records are also kept in memory.
class TrainingLog {
 public:
  TrainingLog() = default;
  explicit TrainingLog(const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    out_ = std::make_unique<std::ofstream>(file, std::ios::app);
    if (!*out_) throw std::runtime_error("cannot open log " + file.string());
  }

  void set_progress(std::ostream* progress) { progress_ = progress; }

  void record(nlohmann::json entry) {
    entry["timestamp"] =
        std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
    if (out_) *out_ << entry.dump() << '\n' << std::flush;
    records_.push_back(std::move(entry));
  }

  // Progress line on the side channel (stderr in the CLI).
  void note(const std::string& line) {
    if (progress_) *progress_ << line << '\n';
  }

  const std::vector<nlohmann::json>& records() const { return records_; }

 private:
  std::unique_ptr<std::ofstream> out_;
  std::ostream* progress_ = nullptr;
  std::vector<nlohmann::json> records_;
};

}  // namespace stclr::trainer
