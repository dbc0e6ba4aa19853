/*
 * Copyright 2026 The texnerf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "texnerf/error.hpp"

namespace texnerf {

/// Row-major interleaved image, row 0 at the top.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * height * channels, fill) {
    if (width < 0 || height < 0 || channels < 1) fail(ErrorCode::kInvalidArgument, "bad image dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using ImageD = Image<double>;

/// Portable float map. Channels 1 (`Pf`) or 3 (`PF`); written little-endian
/// (scale -1.0) as 32-bit floats, bottom row first per the format.
void write_pfm(const std::filesystem::path& path, const ImageD& image);
ImageD read_pfm(const std::filesystem::path& path);

/// Binary 16-bit grayscale PGM (P5, maxval 65535, big-endian samples).
void write_pgm16(const std::filesystem::path& path, const Image<std::uint16_t>& image);
Image<std::uint16_t> read_pgm16(const std::filesystem::path& path);

/// 8-bit RGB PNG for viewing only; input channels in [0,1].
void write_png8(const std::filesystem::path& path, const ImageD& rgb);

}  // namespace texnerf
