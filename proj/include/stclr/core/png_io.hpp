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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stclr/core/video.hpp"
#include "stclr/error.hpp"

namespace stclr {

struct PngHeader {
  std::size_t height = 0;
  std::size_t width = 0;
};

namespace detail {

struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

inline std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace detail

inline PngHeader read_png_header(const std::filesystem::path& path) {
  detail::PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.string().c_str()))
    throw LoadError("cannot read image " + path.string() + ": " + png.image.message);
  return {png.image.height, png.image.width};
}

inline Image read_png(const std::filesystem::path& path) {
  detail::PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.string().c_str()))
    throw LoadError("cannot read image " + path.string() + ": " + png.image.message);
  png.image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, bytes.data(), 0, nullptr))
    throw LoadError("cannot decode image " + path.string() + ": " + png.image.message);
  Image img(png.image.height, png.image.width);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0f;
  return img;
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
  std::vector<std::uint8_t> bytes(img.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = detail::quantize(img.data[i]);
  detail::PngImage png;
  png.image.width = static_cast<png_uint_32>(img.width);
  png.image.height = static_cast<png_uint_32>(img.height);
  png.image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png.image, path.string().c_str(), 0, bytes.data(), 0, nullptr))
    throw Error("cannot write image " + path.string() + ": " + png.image.message);
}

}  // namespace stclr
