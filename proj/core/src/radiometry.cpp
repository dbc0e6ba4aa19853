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

#include "texnerf/radiometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "texnerf/error.hpp"

namespace texnerf::radiometry {

namespace {

constexpr double kH = PhysicalConstants::h;
constexpr double kC = PhysicalConstants::c;
constexpr double kK = PhysicalConstants::k_B;
constexpr double kBisectionTolerance = 1e-6;

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string_view rest = line;
  while (true) {
    auto comma = rest.find(',');
    fields.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return fields;
}

double parse_double(const std::string& field, std::string_view source, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    std::ostringstream msg;
    msg << source << ":" << line << ": expected a number, got '" << field << "'";
    fail(ErrorCode::kParse, msg.str());
  }
  return value;
}

}  // namespace

WavenumberGrid::WavenumberGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) fail(ErrorCode::kInvariant, "wavenumber grid needs at least 2 samples");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      fail(ErrorCode::kInvariant, "wavenumber grid values must be finite and positive");
    }
    if (i > 0 && !(values_[i] > values_[i - 1])) {
      fail(ErrorCode::kInvariant, "wavenumber grid must be strictly increasing");
    }
  }
}

WavenumberGrid WavenumberGrid::uniform(double lo, double hi, std::size_t count) {
  if (count < 2) fail(ErrorCode::kInvariant, "wavenumber grid needs at least 2 samples");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  v.back() = hi;
  return WavenumberGrid(std::move(v));
}

WavenumberGrid WavenumberGrid::from_per_cm(std::span<const double> values_per_cm) {
  std::vector<double> v(values_per_cm.begin(), values_per_cm.end());
  for (double& x : v) x *= kPerCmToPerM;
  return WavenumberGrid(std::move(v));
}

SpectralCurve::SpectralCurve(std::string material_id, WavenumberGrid grid, std::vector<double> emissivity)
    : material_id_(std::move(material_id)), grid_(std::move(grid)), emissivity_(std::move(emissivity)) {
  if (emissivity_.size() != grid_.size()) {
    fail(ErrorCode::kInvariant, "material '" + material_id_ + "': emissivity length differs from grid length");
  }
  for (double e : emissivity_) {
    if (!(e >= 0.0 && e <= 1.0)) {
      fail(ErrorCode::kInvariant, "material '" + material_id_ + "': emissivity outside [0,1]");
    }
  }
}

double SpectralCurve::at(double nu) const {
  const auto v = grid_.values();
  if (nu < v.front() || nu > v.back()) {
    std::ostringstream msg;
    msg << "material '" << material_id_ << "': wavenumber " << nu / kPerCmToPerM << " cm^-1 outside curve span ["
        << v.front() / kPerCmToPerM << ", " << v.back() / kPerCmToPerM << "]";
    fail(ErrorCode::kExtrapolation, msg.str());
  }
  auto it = std::upper_bound(v.begin(), v.end(), nu);
  std::size_t hi = static_cast<std::size_t>(it - v.begin());
  if (hi >= v.size()) return emissivity_.back();
  std::size_t lo = hi - 1;
  double t = (nu - v[lo]) / (v[hi] - v[lo]);
  return emissivity_[lo] + t * (emissivity_[hi] - emissivity_[lo]);
}

std::vector<double> SpectralCurve::resample(const WavenumberGrid& grid) const {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = at(grid[i]);
  return out;
}

double planck_radiance(double nu, double temperature) {
  if (!(nu > 0.0)) fail(ErrorCode::kDomain, "planck_radiance: wavenumber must be positive");
  if (!(temperature > 0.0)) fail(ErrorCode::kDomain, "planck_radiance: temperature must be positive");
  const double x = kH * kC * nu / (kK * temperature);
  return 2.0 * kH * kC * kC * nu * nu * nu / std::expm1(x);
}

double planck_radiance_dt(double nu, double temperature) {
  if (!(nu > 0.0) || !(temperature > 0.0)) fail(ErrorCode::kDomain, "planck_radiance_dt: non-positive argument");
  const double x = kH * kC * nu / (kK * temperature);
  if (x > 700.0) return 0.0;
  const double em1 = std::expm1(x);
  const double b = 2.0 * kH * kC * kC * nu * nu * nu / em1;
  // dB/dT = B * x / T * e^x / (e^x - 1)
  return b * (x / temperature) * ((em1 + 1.0) / em1);
}

double planck_inverse(double nu, double radiance) {
  if (!(nu > 0.0)) fail(ErrorCode::kDomain, "planck_inverse: wavenumber must be positive");
  if (!(radiance > 0.0)) fail(ErrorCode::kDomain, "planck_inverse: radiance must be positive");
  const double a = 2.0 * kH * kC * kC * nu * nu * nu;
  return kH * kC * nu / (kK * std::log1p(a / radiance));
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return sum;
}

double band_radiance(double temperature, const WavenumberGrid& grid) {
  std::vector<double> b(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) b[i] = planck_radiance(grid[i], temperature);
  return trapezoid(grid.values(), b);
}

double band_inverse(double band_value, const WavenumberGrid& grid) {
  if (!(band_value > 0.0)) fail(ErrorCode::kDomain, "band_inverse: band radiance must be positive");
  double lo = kMinTemperature;
  double hi = kMaxTemperature;
  if (band_value > band_radiance(hi, grid) || band_value < band_radiance(lo, grid)) {
    std::ostringstream msg;
    msg << "band radiance " << band_value << " outside [" << kMinTemperature << ", " << kMaxTemperature
        << "] K bracket";
    fail(ErrorCode::kOutOfBracket, msg.str());
  }
  while (hi - lo >= kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (band_radiance(mid, grid) < band_value) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SpectralLibrary parse_spectral_library(std::istream& in, std::string_view source) {
  struct Pending {
    std::vector<double> nu;
    std::vector<double> e;
  };
  std::map<std::string, Pending, std::less<>> pending;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_csv(t);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "material" || fields[1] != "wavenumber_cm1" || fields[2] != "emissivity") {
        std::ostringstream msg;
        msg << source << ":" << line_no << ": expected header 'material,wavenumber_cm1,emissivity'";
        fail(ErrorCode::kParse, msg.str());
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3 || fields[0].empty()) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": expected 3 fields";
      fail(ErrorCode::kParse, msg.str());
    }
    const double nu = parse_double(fields[1], source, line_no) * kPerCmToPerM;
    const double e = parse_double(fields[2], source, line_no);
    if (!(e >= 0.0 && e <= 1.0)) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": material '" << fields[0] << "' has emissivity " << e << " outside [0,1]";
      fail(ErrorCode::kInvariant, msg.str());
    }
    auto& p = pending[fields[0]];
    if (!p.nu.empty() && nu == p.nu.back()) {
      if (e == p.e.back()) continue;  // repeated row
      std::ostringstream msg;
      msg << source << ":" << line_no << ": material '" << fields[0] << "' has conflicting emissivities at "
          << fields[1] << " cm^-1";
      fail(ErrorCode::kParse, msg.str());
    }
    if (!p.nu.empty() && !(nu > p.nu.back())) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": material '" << fields[0] << "' wavenumbers not strictly ascending";
      fail(ErrorCode::kParse, msg.str());
    }
    p.nu.push_back(nu);
    p.e.push_back(e);
  }
  if (!header_seen) fail(ErrorCode::kParse, std::string(source) + ": empty spectral library");
  if (pending.empty()) fail(ErrorCode::kParse, std::string(source) + ": no data rows");

  SpectralLibrary library;
  for (auto& [name, p] : pending) {
    if (p.nu.size() < 2) {
      fail(ErrorCode::kInvariant, std::string(source) + ": material '" + name + "' needs at least 2 samples");
    }
    library.emplace(name, SpectralCurve(name, WavenumberGrid(std::move(p.nu)), std::move(p.e)));
  }
  return library;
}

SpectralLibrary load_spectral_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open spectral library " + path.string());
  return parse_spectral_library(in, path.string());
}

void write_spectral_library(std::ostream& out, const SpectralLibrary& library) {
  out << "material,wavenumber_cm1,emissivity\n";
  out << std::setprecision(17);
  for (const auto& [name, curve] : library) {
    for (std::size_t i = 0; i < curve.grid().size(); ++i) {
      out << name << ',' << curve.grid()[i] / kPerCmToPerM << ',' << curve.emissivity()[i] << '\n';
    }
  }
}

void save_spectral_library(const std::filesystem::path& path, const SpectralLibrary& library) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  write_spectral_library(out, library);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

double band_average_emissivity(const SpectralCurve& curve, const WavenumberGrid& band) {
  const double lo = band.front();
  const double hi = band.back();
  const auto knots = curve.grid().values();
  if (lo < knots.front() || hi > knots.back()) {
    std::ostringstream msg;
    msg << "material '" << curve.material_id() << "': band [" << lo / kPerCmToPerM << ", " << hi / kPerCmToPerM
        << "] cm^-1 exceeds curve span";
    fail(ErrorCode::kExtrapolation, msg.str());
  }
  std::vector<double> x(band.values().begin(), band.values().end());
  for (double k : knots) {
    if (k > lo && k < hi) x.push_back(k);
  }
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end()), x.end());
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = curve.at(x[i]);
  const double mean = trapezoid(x, y) / (hi - lo);
  return std::clamp(mean, 0.0, 1.0);
}

}  // namespace texnerf::radiometry
