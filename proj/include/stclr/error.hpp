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

#include <stdexcept>
#include <string>

namespace stclr {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define STCLR_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

STCLR_DEFINE_ERROR(ArgumentError);
STCLR_DEFINE_ERROR(ShapeError);
STCLR_DEFINE_ERROR(LoadError);
STCLR_DEFINE_ERROR(TaxonomyError);
STCLR_DEFINE_ERROR(EmptyDatasetError);
STCLR_DEFINE_ERROR(BuildError);
STCLR_DEFINE_ERROR(DegenerateEmbeddingError);
STCLR_DEFINE_ERROR(AssemblyError);
STCLR_DEFINE_ERROR(NumericError);
STCLR_DEFINE_ERROR(CheckpointError);
STCLR_DEFINE_ERROR(ConfigError);

#undef STCLR_DEFINE_ERROR

template <typename E = ArgumentError>
inline void require(bool condition, const std::string& message) {
  if (!condition) throw E(message);
}

}  // namespace stclr
