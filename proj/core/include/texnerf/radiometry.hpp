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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace texnerf::radiometry {

/// CODATA 2018 exact values (SI).
struct PhysicalConstants {
  static constexpr double h = 6.62607015e-34;   // J s
  static constexpr double c = 2.99792458e8;     // m / s
  static constexpr double k_B = 1.380649e-23;   // J / K
};

/// Wavenumbers are stored in m^-1; files and the CLI speak cm^-1.
inline constexpr double kPerCmToPerM = 100.0;

/// Temperature bracket used by every iterative inverse, in kelvin.
inline constexpr double kMinTemperature = 1.0;
inline constexpr double kMaxTemperature = 5000.0;

class WavenumberGrid {
 public:
  /// Values in m^-1; must be strictly increasing, positive, and at least two.
  explicit WavenumberGrid(std::vector<double> values);

  static WavenumberGrid uniform(double lo, double hi, std::size_t count);
  static WavenumberGrid from_per_cm(std::span<const double> values_per_cm);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  double width() const { return values_.back() - values_.front(); }

  bool operator==(const WavenumberGrid&) const = default;

 private:
  std::vector<double> values_;
};

/// Emissivity e(nu) of one material, piecewise linear between samples.
class SpectralCurve {
 public:
  SpectralCurve(std::string material_id, WavenumberGrid grid, std::vector<double> emissivity);

  const std::string& material_id() const { return material_id_; }
  const WavenumberGrid& grid() const { return grid_; }
  std::span<const double> emissivity() const { return emissivity_; }

  /// Linear interpolation; throws kExtrapolation outside the sampled span.
  double at(double nu) const;
  std::vector<double> resample(const WavenumberGrid& grid) const;

 private:
  std::string material_id_;
  WavenumberGrid grid_;
  std::vector<double> emissivity_;
};

using SpectralLibrary = std::map<std::string, SpectralCurve, std::less<>>;

/// Blackbody spectral radiance per unit wavenumber,
/// B = 2 h c^2 nu^3 / (exp(h c nu / (k_B T)) - 1), in W sr^-1 m^-2 (m^-1)^-1.
double planck_radiance(double nu, double temperature);

/// dB/dT at fixed wavenumber.
double planck_radiance_dt(double nu, double temperature);

/// Closed-form brightness temperature for a single wavenumber.
double planck_inverse(double nu, double radiance);

/// Trapezoidal rule over (x, y) samples.
double trapezoid(std::span<const double> x, std::span<const double> y);

/// Band-integrated blackbody radiance in W sr^-1 m^-2 (trapezoid over the grid).
double band_radiance(double temperature, const WavenumberGrid& grid);

/// Bisection inverse of band_radiance on [kMinTemperature, kMaxTemperature].
double band_inverse(double band_value, const WavenumberGrid& grid);

/// CSV with header `material,wavenumber_cm1,emissivity`. `#` lines are comments.
SpectralLibrary load_spectral_library(const std::filesystem::path& path);
SpectralLibrary parse_spectral_library(std::istream& in, std::string_view source = "<stream>");
void write_spectral_library(std::ostream& out, const SpectralLibrary& library);
void save_spectral_library(const std::filesystem::path& path, const SpectralLibrary& library);

/// Mean of the interpolated emissivity over [band.front(), band.back()]. The
/// piecewise-linear curve is integrated exactly (trapezoid on the union of
/// curve and band breakpoints).
double band_average_emissivity(const SpectralCurve& curve, const WavenumberGrid& band);

}  // namespace texnerf::radiometry
