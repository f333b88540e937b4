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

#include <vector>

#include "stclr/encoder/spec.hpp"

namespace stclr::testing {

// Encoder architecture table for the 16x224x224 R(2+1)D-18 configuration,
// transcribed row by row: layer name, output size [C, T, H, W], repeat
// marker, kernel count and shape.
//
// Erratum: the source table prints "144, [3, 1, 1]" for the temporal conv of
// the repeated Conv Block 1 pair, although the same row's output has 64
// channels (every other temporal row lists its output width). The output-size
// column is authoritative, so the kernel count is recorded as 64 here.
inline std::vector<encoder::TableRow> reference_layer_rows() {
  return {
      {"Conv Block 1", "[45, 16, 112, 112]", 1, "45, [1, 7, 7]"},
      {"Conv Block 1", "[64, 16, 112, 112]", 1, "64, [3, 1, 1]"},
      {"Conv Block 1", "[144, 16, 112, 112]", 4, "144, [1, 3, 3]"},
      {"Conv Block 1", "[64, 16, 112, 112]", 4, "64, [3, 1, 1]"},
      {"Conv Block 2", "[230, 16, 56, 56]", 1, "230, [1, 3, 3]"},
      {"Conv Block 2", "[128, 8, 56, 56]", 1, "128, [3, 1, 1]"},
      {"Conv Block 2", "[230, 8, 56, 56]", 1, "230, [1, 3, 3]"},
      {"Conv Block 2", "[128, 8, 56, 56]", 1, "128, [3, 1, 1]"},
      {"Residual layer 1", "[128, 8, 56, 56]", 1, "128, [1, 1, 1]"},
      {"Conv Block 3", "[288, 8, 56, 56]", 2, "288, [1, 3, 3]"},
      {"Conv Block 3", "[128, 8, 56, 56]", 2, "128, [3, 1, 1]"},
      {"Conv Block 4", "[460, 8, 28, 28]", 1, "460, [1, 3, 3]"},
      {"Conv Block 4", "[256, 4, 28, 28]", 1, "256, [3, 1, 1]"},
      {"Conv Block 4", "[460, 4, 28, 28]", 1, "460, [1, 3, 3]"},
      {"Conv Block 4", "[256, 4, 28, 28]", 1, "256, [3, 1, 1]"},
      {"Residual layer 2", "[256, 4, 28, 28]", 1, "256, [1, 1, 1]"},
      {"Conv Block 5", "[576, 4, 28, 28]", 2, "576, [1, 3, 3]"},
      {"Conv Block 5", "[256, 4, 28, 28]", 2, "256, [3, 1, 1]"},
      {"Conv Block 6", "[921, 4, 14, 14]", 1, "921, [1, 3, 3]"},
      {"Conv Block 6", "[512, 2, 14, 14]", 1, "512, [3, 1, 1]"},
      {"Conv Block 6", "[921, 2, 14, 14]", 1, "921, [1, 3, 3]"},
      {"Conv Block 6", "[512, 2, 14, 14]", 1, "512, [3, 1, 1]"},
      {"Residual layer 3", "[512, 2, 14, 14]", 1, "512, [1, 1, 1]"},
      {"Conv Block 7", "[1152, 2, 14, 14]", 2, "1152, [1, 3, 3]"},
      {"Conv Block 7", "[512, 2, 14, 14]", 2, "512, [3, 1, 1]"},
      {"Ada. Ave. Pool", "[512, 1, 1, 1]", 1, ""},
  };
}

// Intermediate widths appearing in the table.
inline std::vector<unsigned> reference_intermediate_widths() { return {144, 230, 288, 460, 576, 921, 1152}; }

}  // namespace stclr::testing
