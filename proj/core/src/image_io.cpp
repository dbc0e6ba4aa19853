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

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "texnerf/image.hpp"

namespace texnerf {

namespace {

std::string read_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(ch);
  }
  if (token.empty()) fail(ErrorCode::kParse, path.string() + ": truncated header");
  return token;
}

int parse_int(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kParse, path.string() + ": bad header field '" + s + "'");
  }
}

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const ImageD& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    fail(ErrorCode::kInvalidArgument, "PFM supports 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << (image.channels() == 3 ? "PF" : "Pf") << '\n'
      << image.width() << ' ' << image.height() << '\n'
      << "-1.0\n";
  const int row_len = image.width() * image.channels();
  std::vector<std::uint32_t> row(static_cast<std::size_t>(row_len));
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(image(x, y, c)));
        if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
        row[static_cast<std::size_t>(x * image.channels() + c)] = bits;
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

ImageD read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  const std::string magic = read_token(in, path);
  int channels = 0;
  if (magic == "PF") {
    channels = 3;
  } else if (magic == "Pf") {
    channels = 1;
  } else {
    fail(ErrorCode::kParse, path.string() + ": not a PFM file");
  }
  const int width = parse_int(read_token(in, path), path);
  const int height = parse_int(read_token(in, path), path);
  double scale = 0.0;
  try {
    scale = std::stod(read_token(in, path));
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::kParse, path.string() + ": bad scale");
  }
  if (scale == 0.0) fail(ErrorCode::kParse, path.string() + ": zero scale");
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);

  ImageD image(width, height, channels);
  std::vector<std::uint32_t> row(static_cast<std::size_t>(width) * channels);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!in) fail(ErrorCode::kParse, path.string() + ": truncated pixel data");
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        auto bits = row[static_cast<std::size_t>(x * channels + c)];
        if (swap) bits = byteswap32(bits);
        image(x, y, c) = static_cast<double>(std::bit_cast<float>(bits));
      }
    }
  }
  return image;
}

void write_pgm16(const std::filesystem::path& path, const Image<std::uint16_t>& image) {
  if (image.channels() != 1) fail(ErrorCode::kInvalidArgument, "PGM is single channel");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n65535\n";
  std::vector<unsigned char> bytes(image.pixel_count() * 2);
  auto data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    bytes[2 * i] = static_cast<unsigned char>(data[i] >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(data[i] & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

Image<std::uint16_t> read_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  if (read_token(in, path) != "P5") fail(ErrorCode::kParse, path.string() + ": not a binary PGM");
  const int width = parse_int(read_token(in, path), path);
  const int height = parse_int(read_token(in, path), path);
  const int maxval = parse_int(read_token(in, path), path);
  if (maxval < 256 || maxval > 65535) fail(ErrorCode::kParse, path.string() + ": expected a 16-bit PGM");
  Image<std::uint16_t> image(width, height, 1);
  std::vector<unsigned char> bytes(image.pixel_count() * 2);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) fail(ErrorCode::kParse, path.string() + ": truncated pixel data");
  auto data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
  }
  return image;
}

void write_png8(const std::filesystem::path& path, const ImageD& rgb) {
  if (rgb.channels() != 3) fail(ErrorCode::kInvalidArgument, "PNG export expects RGB");
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!file) fail(ErrorCode::kIo, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::kIo, "libpng initialisation failed");
  }
  std::vector<png_byte> row(static_cast<std::size_t>(rgb.width()) * 3);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::kIo, "PNG encoding failed: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(rgb.width()), static_cast<png_uint_32>(rgb.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::isfinite(rgb(x, y, c)) ? std::clamp(rgb(x, y, c), 0.0, 1.0) : 0.0;
        row[static_cast<std::size_t>(x * 3 + c)] = static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace texnerf
