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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "texnerf/image.hpp"
#include "texnerf/texdecomp.hpp"

namespace texnerf::pseudotex {

/// Ordered material -> hue list; hue(i) = i / M after sorting ids.
using Palette = std::vector<std::pair<std::string, double>>;

struct MappingMetadata {
  double t_min = 0.0;  // kelvin at saturation 0
  double t_max = 1.0;  // kelvin at saturation 1
  double x_min = 0.0;  // texture at value 0
  double x_max = 1.0;  // texture at value 1
  Palette palette;

  void validate() const;
  double hue_of(const std::string& material) const;
  /// Nearest palette entry under cyclic hue distance; ties go to the lower index.
  std::size_t nearest_index(double hue) const;
};

/// Three-channel image with H, S, V in [0, 1]. Channel order is (H, S, V).
using HsvImage = ImageD;

Palette build_palette(std::vector<std::string> materials);

/// Cyclic distance on the unit hue circle.
double hue_distance(double a, double b);

struct HsvMapping {
  HsvImage hsv;
  std::size_t invalid_count = 0;  // pixels with NaN T or X
};

HsvMapping tex_to_hsv(const texdecomp::TeXImage& tex, const MappingMetadata& meta);

struct TexMaps {
  ImageD temperature;
  Image<std::uint16_t> material;  // palette index
  ImageD texture;
};

TexMaps hsv_to_tex(const HsvImage& hsv, const MappingMetadata& meta);

/// Hexcone conversion, h * 6 sector rule.
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b);
void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v);
ImageD hsv_to_rgb(const HsvImage& hsv);
HsvImage rgb_to_hsv(const ImageD& rgb);

/// Default ranges: 2nd/98th percentile of the valid T map and of the X map.
MappingMetadata metadata_from_percentiles(const texdecomp::TeXImage& tex, Palette palette);

/// `<stem>.meta.json` next to an HSV image.
std::filesystem::path metadata_path(const std::filesystem::path& image_path);
void save_metadata(const std::filesystem::path& path, const MappingMetadata& meta);
MappingMetadata load_metadata(const std::filesystem::path& path);

/// Color PFM plus sidecar metadata.
void save_hsv(const std::filesystem::path& path, const HsvImage& hsv, const MappingMetadata& meta);

}  // namespace texnerf::pseudotex
