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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "texnerf/image.hpp"
#include "texnerf/radiometry.hpp"

namespace texnerf::texdecomp {

/// Per-pixel multi-band radiance S(nu), stored pixel-major: (y * width + x) * K + k.
class ThermalCube {
 public:
  ThermalCube(int width, int height, radiometry::WavenumberGrid grid);
  ThermalCube(int width, int height, radiometry::WavenumberGrid grid, std::vector<double> radiance);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t bands() const { return grid_.size(); }
  const radiometry::WavenumberGrid& grid() const { return grid_; }

  std::span<double> pixel(int x, int y);
  std::span<const double> pixel(int x, int y) const;
  std::span<const double> radiance() const { return radiance_; }

  /// Throws kInvariant if any sample is negative or non-finite.
  void validate() const;

 private:
  int width_;
  int height_;
  radiometry::WavenumberGrid grid_;
  std::vector<double> radiance_;
};

/// Per-pixel material label plus the label -> material_id legend.
struct MaterialMask {
  Image<std::uint16_t> labels;
  std::map<std::uint16_t, std::string> legend;

  int width() const { return labels.width(); }
  int height() const { return labels.height(); }
  const std::string& material_at(int x, int y) const;
  /// Throws kInvariant if a label is missing from the legend.
  void validate() const;
};

struct TeXImage {
  ImageD temperature;  // kelvin, NaN where unsolved
  MaterialMask material;
  ImageD texture;      // band-integrated reflected radiance X
  ImageD v0;           // band-mean illumination factor (diagnostic)
  std::size_t nan_count = 0;
  std::size_t clamped_count = 0;

  int width() const { return temperature.width(); }
  int height() const { return temperature.height(); }
};

enum class SolveMode { kExact, kPaperVerbatim };

struct DecompositionConfig {
  double t_ref = 295.0;      // T0, reference/ambient temperature for V0 and X
  double eps_e = 0.01;       // emissivity ceiling guard
  SolveMode mode = SolveMode::kExact;
  double t_ambient = 295.0;  // ambient temperature of the single-band path

  void validate() const;
};

/// Temperature from K >= 3 radiance samples with known spectral emissivity.
///
/// With f = S/(1-e) and g = e/(1-e) the radiance equation differentiates to
/// f' = (g B(T))' + X'. Derivatives are central differences on interior
/// samples. kExact minimises the squared residual of that identity over T,
/// modelling the reflected term as beta * B(nu, t_ref) with beta eliminated
/// by linear least squares per trial T (beta = 0 is the wavenumber-flat X
/// case). kPaperVerbatim drops the g B' term: per interior sample it inverts
/// B = f'/g' and returns the median estimate.
double solve_temperature_spectral(std::span<const double> radiance, std::span<const double> emissivity,
                                  const radiometry::WavenumberGrid& grid, const DecompositionConfig& cfg);

/// V0 = (S - e B(T)) / ((1 - e) B(T0)). Not clamped.
double illumination_factor(double radiance, double emissivity, double temperature, double nu,
                           const DecompositionConfig& cfg);

/// X = integral of V0(nu) B(nu, T0) dnu (trapezoid on the grid).
double texture_integral(std::span<const double> v0, double t0, const radiometry::WavenumberGrid& grid);

/// Spectral path over a whole cube. Unsolvable pixels become NaN and are
/// counted; negative V0 samples are clamped to 0 and the pixel counted.
TeXImage decompose_cube(const ThermalCube& cube, const MaterialMask& mask, const radiometry::SpectralLibrary& library,
                        const DecompositionConfig& cfg);

/// Single-band blackbody correction:
/// S = e L(T) + (1 - e) L(t_ambient), solved for T with band_inverse.
double solve_temperature_pseudo(double band_value, double band_emissivity, const radiometry::WavenumberGrid& grid,
                                const DecompositionConfig& cfg);

/// Percentile stretch [p2, p98] -> [0, 1] followed by an unsharp mask
/// (amount 0.5, Gaussian sigma 1.5, 7x7, edge-replicated). A flat image maps to 0.5.
ImageD extract_texture_pseudo(const ImageD& image);

/// Band radiance per pixel, i.e. what a single-band sensor integrating the cube's band sees.
ImageD integrate_cube(const ThermalCube& cube);

/// Single-band path over an image: T by blackbody correction with the
/// band-averaged emissivity of each pixel's material, X by extract_texture_pseudo.
TeXImage decompose_pseudo(const ImageD& band_image, const MaterialMask& mask,
                          const radiometry::SpectralLibrary& library, const radiometry::WavenumberGrid& band,
                          const DecompositionConfig& cfg);

// On-disk formats.
//   cube:  <stem>.json {width, height, bands:[cm^-1...], files:[...]} + one Pf PFM per band
//   mask:  16-bit PGM + <stem>.legend.json {"<label>": "<material>"}
//   TeX:   <stem>.json referencing T / X / v0 PFMs and the mask
void save_cube(const std::filesystem::path& manifest, const ThermalCube& cube);
ThermalCube load_cube(const std::filesystem::path& manifest);
void save_mask(const std::filesystem::path& pgm, const MaterialMask& mask);
MaterialMask load_mask(const std::filesystem::path& pgm);
void save_tex(const std::filesystem::path& manifest, const TeXImage& tex);
TeXImage load_tex(const std::filesystem::path& manifest);

}  // namespace texnerf::texdecomp
