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

#include "texnerf/pseudotex.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json_util.hpp"
#include "texnerf/error.hpp"

namespace texnerf::pseudotex {

void MappingMetadata::validate() const {
  if (!(t_min < t_max)) fail(ErrorCode::kInvalidArgument, "mapping metadata requires t_min < t_max");
  if (!(x_min < x_max)) fail(ErrorCode::kInvalidArgument, "mapping metadata requires x_min < x_max");
  if (palette.empty()) fail(ErrorCode::kInvalidArgument, "mapping metadata has an empty palette");
  const double m = static_cast<double>(palette.size());
  for (std::size_t i = 0; i < palette.size(); ++i) {
    if (std::abs(palette[i].second - static_cast<double>(i) / m) > 1e-12) {
      fail(ErrorCode::kInvariant, "palette hue of '" + palette[i].first + "' is not index / M");
    }
  }
}

double MappingMetadata::hue_of(const std::string& material) const {
  for (const auto& [name, hue] : palette) {
    if (name == material) return hue;
  }
  fail(ErrorCode::kUnknownMaterial, "material '" + material + "' not in palette");
}

std::size_t MappingMetadata::nearest_index(double hue) const {
  std::size_t best = 0;
  double best_d = 2.0;
  for (std::size_t i = 0; i < palette.size(); ++i) {
    const double d = hue_distance(hue, palette[i].second);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Palette build_palette(std::vector<std::string> materials) {
  if (materials.empty()) fail(ErrorCode::kInvalidArgument, "palette needs at least one material");
  std::sort(materials.begin(), materials.end());
  if (auto dup = std::adjacent_find(materials.begin(), materials.end()); dup != materials.end()) {
    fail(ErrorCode::kDuplicateId, "duplicate material id '" + *dup + "'");
  }
  Palette palette;
  const double m = static_cast<double>(materials.size());
  for (std::size_t i = 0; i < materials.size(); ++i) palette.emplace_back(materials[i], static_cast<double>(i) / m);
  return palette;
}

double hue_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

HsvMapping tex_to_hsv(const texdecomp::TeXImage& tex, const MappingMetadata& meta) {
  meta.validate();
  const int w = tex.width();
  const int h = tex.height();
  if (tex.material.width() != w || tex.material.height() != h || tex.texture.width() != w ||
      tex.texture.height() != h) {
    fail(ErrorCode::kDimensionMismatch, "TeX image channels differ in size");
  }
  std::map<std::uint16_t, double> hue_of_label;
  for (const auto& [label, name] : tex.material.legend) hue_of_label[label] = meta.hue_of(name);

  HsvMapping out{HsvImage(w, h, 3), 0};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto it = hue_of_label.find(tex.material.labels(x, y));
      if (it == hue_of_label.end()) {
        fail(ErrorCode::kUnknownMaterial, "mask label " + std::to_string(tex.material.labels(x, y)) + " has no legend");
      }
      const double t = tex.temperature(x, y);
      const double xv = tex.texture(x, y);
      const bool invalid = !std::isfinite(t) || !std::isfinite(xv);
      out.hsv(x, y, 0) = it->second;
      out.hsv(x, y, 1) = std::isfinite(t) ? std::clamp((t - meta.t_min) / (meta.t_max - meta.t_min), 0.0, 1.0) : 0.0;
      out.hsv(x, y, 2) = std::isfinite(xv) ? std::clamp((xv - meta.x_min) / (meta.x_max - meta.x_min), 0.0, 1.0) : 0.0;
      out.invalid_count += invalid ? 1 : 0;
    }
  }
  return out;
}

TexMaps hsv_to_tex(const HsvImage& hsv, const MappingMetadata& meta) {
  meta.validate();
  if (hsv.channels() != 3) fail(ErrorCode::kInvalidArgument, "HSV image needs 3 channels");
  const int w = hsv.width();
  const int h = hsv.height();
  TexMaps out{ImageD(w, h), Image<std::uint16_t>(w, h), ImageD(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.material(x, y) = static_cast<std::uint16_t>(meta.nearest_index(hsv(x, y, 0)));
      out.temperature(x, y) = meta.t_min + hsv(x, y, 1) * (meta.t_max - meta.t_min);
      out.texture(x, y) = meta.x_min + hsv(x, y, 2) * (meta.x_max - meta.x_min);
    }
  }
  return out;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  double h6 = (h - std::floor(h)) * 6.0;
  if (h6 >= 6.0) h6 = 0.0;
  const int sector = static_cast<int>(h6);
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) {
    h = 0.0;
    return;
  }
  if (mx == r) {
    h = (g - b) / delta;
  } else if (mx == g) {
    h = 2.0 + (b - r) / delta;
  } else {
    h = 4.0 + (r - g) / delta;
  }
  h /= 6.0;
  if (h < 0.0) h += 1.0;
  if (h >= 1.0) h -= 1.0;
}

ImageD hsv_to_rgb(const HsvImage& hsv) {
  if (hsv.channels() != 3) fail(ErrorCode::kInvalidArgument, "HSV image needs 3 channels");
  ImageD rgb(hsv.width(), hsv.height(), 3);
  for (int y = 0; y < hsv.height(); ++y) {
    for (int x = 0; x < hsv.width(); ++x) {
      hsv_to_rgb(hsv(x, y, 0), hsv(x, y, 1), hsv(x, y, 2), rgb(x, y, 0), rgb(x, y, 1), rgb(x, y, 2));
    }
  }
  return rgb;
}

HsvImage rgb_to_hsv(const ImageD& rgb) {
  if (rgb.channels() != 3) fail(ErrorCode::kInvalidArgument, "RGB image needs 3 channels");
  HsvImage hsv(rgb.width(), rgb.height(), 3);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      rgb_to_hsv(rgb(x, y, 0), rgb(x, y, 1), rgb(x, y, 2), hsv(x, y, 0), hsv(x, y, 1), hsv(x, y, 2));
    }
  }
  return hsv;
}

namespace {

std::pair<double, double> percentile_range(std::span<const double> data) {
  std::vector<double> v;
  for (double x : data) {
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.empty()) return {0.0, 1.0};
  std::sort(v.begin(), v.end());
  auto pct = [&](double p) {
    const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  double lo = pct(2.0);
  double hi = pct(98.0);
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 0.5, 1e-12);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi};
}

}  // namespace

MappingMetadata metadata_from_percentiles(const texdecomp::TeXImage& tex, Palette palette) {
  MappingMetadata meta;
  std::tie(meta.t_min, meta.t_max) = percentile_range(tex.temperature.data());
  std::tie(meta.x_min, meta.x_max) = percentile_range(tex.texture.data());
  meta.palette = std::move(palette);
  meta.validate();
  return meta;
}

std::filesystem::path metadata_path(const std::filesystem::path& image_path) {
  return image_path.parent_path() / (image_path.stem().string() + ".meta.json");
}

void save_metadata(const std::filesystem::path& path, const MappingMetadata& meta) {
  meta.validate();
  detail::OrderedJson j;
  j["t_min_K"] = meta.t_min;
  j["t_max_K"] = meta.t_max;
  j["x_min"] = meta.x_min;
  j["x_max"] = meta.x_max;
  j["palette"] = detail::OrderedJson::object();
  for (const auto& [name, hue] : meta.palette) j["palette"][name] = hue;
  detail::write_json(path, j);
}

MappingMetadata load_metadata(const std::filesystem::path& path) {
  const auto j = detail::read_json(path);
  const std::string ctx = path.string();
  MappingMetadata meta;
  meta.t_min = detail::get_field<double>(j, "t_min_K", ctx);
  meta.t_max = detail::get_field<double>(j, "t_max_K", ctx);
  meta.x_min = detail::get_field<double>(j, "x_min", ctx);
  meta.x_max = detail::get_field<double>(j, "x_max", ctx);
  const auto palette = detail::get_field<std::map<std::string, double>>(j, "palette", ctx);
  for (const auto& entry : palette) meta.palette.push_back(entry);
  std::sort(meta.palette.begin(), meta.palette.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  meta.validate();
  return meta;
}

void save_hsv(const std::filesystem::path& path, const HsvImage& hsv, const MappingMetadata& meta) {
  write_pfm(path, hsv);
  save_metadata(metadata_path(path), meta);
}

}  // namespace texnerf::pseudotex
