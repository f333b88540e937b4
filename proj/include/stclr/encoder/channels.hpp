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

#include "stclr/error.hpp"

namespace stclr::encoder {

// Weights in a t x d x d 3D convolution from m_in to m_out channels.
inline std::uint64_t params_3d(std::uint64_t m_in, std::uint64_t m_out, std::uint64_t t,
                               std::uint64_t d) {
  return t * d * d * m_in * m_out;
}

// Weights in the (2+1)D replacement: n spatial 1 x d x d kernels over m_in
// channels, then m_out temporal t x 1 x 1 kernels over n channels.
inline std::uint64_t params_2plus1d(std::uint64_t m_in, std::uint64_t m_out, std::uint64_t n,
                                    std::uint64_t t, std::uint64_t d) {
  return n * m_in * d * d + m_out * n * t;
}

// Largest intermediate width whose (2+1)D block does not exceed the 3D
// block's parameter count (never below 1).
inline std::uint64_t intermediate_channels(std::uint64_t m_in, std::uint64_t m_out,
                                           std::uint64_t t, std::uint64_t d) {
  require(m_in >= 1 && m_out >= 1 && t >= 1 && d >= 1,
          "intermediate_channels: arguments must be >= 1");
  return std::max<std::uint64_t>(1, params_3d(m_in, m_out, t, d) / (d * d * m_in + t * m_out));
}

}  // namespace stclr::encoder
