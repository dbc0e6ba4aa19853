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

#include "texnerf/texdecomp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "json_util.hpp"
#include "texnerf/error.hpp"
#include "texnerf/parallel.hpp"

namespace texnerf::texdecomp {

using radiometry::WavenumberGrid;
using radiometry::planck_inverse;
using radiometry::planck_radiance;
using radiometry::planck_radiance_dt;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kScanPoints = 256;
constexpr double kGoldenTolerance = 1e-3;  // kelvin
constexpr double kDerivativeTolerance = 1e-10;

/// Central difference on interior samples; result index i is sample i + 1.
void central_difference(std::span<const double> nu, std::span<const double> y, std::vector<double>& out) {
  out.resize(nu.size() - 2);
  for (std::size_t k = 1; k + 1 < nu.size(); ++k) {
    out[k - 1] = (y[k + 1] - y[k - 1]) / (nu[k + 1] - nu[k - 1]);
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Residual of the differentiated radiance identity at one trial temperature.
class SpectralObjective {
 public:
  SpectralObjective(std::span<const double> nu, std::span<const double> g, std::vector<double> df, double t_ref)
      : nu_(nu), g_(g), df_(std::move(df)) {
    std::vector<double> b(nu.size());
    for (std::size_t k = 0; k < nu.size(); ++k) b[k] = planck_radiance(nu[k], t_ref);
    central_difference(nu, b, db_ref_);
    for (double v : db_ref_) bb_ += v * v;
    work_.resize(nu.size());
  }

  /// Squared residual; fills residual_ for derivative().
  double value(double t) {
    for (std::size_t k = 0; k < nu_.size(); ++k) work_[k] = g_[k] * planck_radiance(nu_[k], t);
    central_difference(nu_, work_, da_);
    residual_.resize(da_.size());
    double rb = 0.0;
    for (std::size_t i = 0; i < da_.size(); ++i) {
      residual_[i] = df_[i] - da_[i];
      rb += residual_[i] * db_ref_[i];
    }
    const double beta = bb_ > 0.0 ? rb / bb_ : 0.0;
    double phi = 0.0;
    for (std::size_t i = 0; i < residual_.size(); ++i) {
      residual_[i] -= beta * db_ref_[i];
      phi += residual_[i] * residual_[i];
    }
    return phi;
  }

  /// d(phi)/dT; beta drops out at its optimum.
  double derivative(double t) {
    value(t);
    for (std::size_t k = 0; k < nu_.size(); ++k) work_[k] = g_[k] * planck_radiance_dt(nu_[k], t);
    central_difference(nu_, work_, da_);
    double d = 0.0;
    for (std::size_t i = 0; i < da_.size(); ++i) d -= 2.0 * residual_[i] * da_[i];
    return d;
  }

 private:
  std::span<const double> nu_;
  std::span<const double> g_;
  std::vector<double> df_;
  std::vector<double> db_ref_;
  double bb_ = 0.0;
  std::vector<double> work_;
  std::vector<double> da_;
  std::vector<double> residual_;
};

double solve_exact(SpectralObjective& objective) {
  const double log_lo = std::log(radiometry::kMinTemperature);
  const double log_hi = std::log(radiometry::kMaxTemperature);
  std::array<double, kScanPoints> temps{};
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScanPoints; ++i) {
    temps[i] = std::exp(log_lo + (log_hi - log_lo) * i / (kScanPoints - 1));
    const double v = objective.value(temps[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (!std::isfinite(best_value) || best == 0 || best == kScanPoints - 1) {
    fail(ErrorCode::kNoSolution, "residual minimum lies on the temperature bracket edge");
  }

  // Golden-section search inside the scan bracket.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = temps[best - 1];
  double b = temps[best + 1];
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective.value(c);
  double fd = objective.value(d);
  while (b - a > kGoldenTolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective.value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective.value(d);
    }
  }

  // Refine on the sign of the derivative when the bracket straddles it.
  double lo = a;
  double hi = b;
  if (!(objective.derivative(lo) < 0.0 && objective.derivative(hi) > 0.0)) return 0.5 * (a + b);
  while (hi - lo > kDerivativeTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (objective.derivative(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ThermalCube::ThermalCube(int width, int height, WavenumberGrid grid)
    : ThermalCube(width, height, grid, std::vector<double>(static_cast<std::size_t>(width) * height * grid.size())) {}

ThermalCube::ThermalCube(int width, int height, WavenumberGrid grid, std::vector<double> radiance)
    : width_(width), height_(height), grid_(std::move(grid)), radiance_(std::move(radiance)) {
  if (width < 0 || height < 0) fail(ErrorCode::kInvalidArgument, "negative cube dimensions");
  if (radiance_.size() != static_cast<std::size_t>(width) * height * grid_.size()) {
    fail(ErrorCode::kDimensionMismatch, "cube radiance size does not match width * height * bands");
  }
}

std::span<double> ThermalCube::pixel(int x, int y) {
  const std::size_t k = grid_.size();
  return std::span<double>(radiance_).subspan((static_cast<std::size_t>(y) * width_ + x) * k, k);
}

std::span<const double> ThermalCube::pixel(int x, int y) const {
  const std::size_t k = grid_.size();
  return std::span<const double>(radiance_).subspan((static_cast<std::size_t>(y) * width_ + x) * k, k);
}

void ThermalCube::validate() const {
  for (double v : radiance_) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::kInvariant, "cube radiance must be finite and >= 0");
  }
}

const std::string& MaterialMask::material_at(int x, int y) const {
  auto it = legend.find(labels(x, y));
  if (it == legend.end()) fail(ErrorCode::kInvariant, "mask label " + std::to_string(labels(x, y)) + " not in legend");
  return it->second;
}

void MaterialMask::validate() const {
  for (auto label : labels.data()) {
    if (!legend.contains(label)) fail(ErrorCode::kInvariant, "mask label " + std::to_string(label) + " not in legend");
  }
}

void DecompositionConfig::validate() const {
  if (!(eps_e > 0.0 && eps_e < 0.5)) fail(ErrorCode::kInvalidArgument, "eps_e must lie in (0, 0.5)");
  if (!(t_ref > 0.0)) fail(ErrorCode::kInvalidArgument, "t_ref must be positive");
  if (!(t_ambient > 0.0)) fail(ErrorCode::kInvalidArgument, "t_ambient must be positive");
}

double solve_temperature_spectral(std::span<const double> radiance, std::span<const double> emissivity,
                                  const WavenumberGrid& grid, const DecompositionConfig& cfg) {
  const std::size_t n = grid.size();
  if (n < 3) fail(ErrorCode::kInvalidArgument, "spectral solve needs at least 3 bands");
  if (radiance.size() != n || emissivity.size() != n) {
    fail(ErrorCode::kDimensionMismatch, "radiance/emissivity length differs from grid");
  }
  std::vector<double> f(n), g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double e = emissivity[k];
    if (!(e < 1.0 - cfg.eps_e)) fail(ErrorCode::kEmissivityCeiling, "emissivity at or above 1 - eps_e");
    f[k] = radiance[k] / (1.0 - e);
    g[k] = e / (1.0 - e);
  }
  const auto nu = grid.values();
  std::vector<double> dg, df;
  central_difference(nu, g, dg);
  central_difference(nu, f, df);

  double g_scale = 0.0, dg_max = 0.0;
  for (double v : g) g_scale = std::max(g_scale, std::abs(v));
  for (double v : dg) dg_max = std::max(dg_max, std::abs(v));
  if (!(dg_max > 1e-12 * g_scale / grid.width())) {
    fail(ErrorCode::kDegenerateEmissivity, "emissivity derivative vanishes across the band");
  }

  if (cfg.mode == SolveMode::kPaperVerbatim) {
    std::vector<double> estimates;
    for (std::size_t i = 0; i < dg.size(); ++i) {
      if (dg[i] == 0.0) continue;
      const double b = df[i] / dg[i];
      if (b > 0.0 && std::isfinite(b)) estimates.push_back(planck_inverse(nu[i + 1], b));
    }
    if (estimates.empty()) fail(ErrorCode::kNoSolution, "no interior sample yields positive radiance");
    return median(std::move(estimates));
  }

  SpectralObjective objective(nu, g, std::move(df), cfg.t_ref);
  return solve_exact(objective);
}

double illumination_factor(double radiance, double emissivity, double temperature, double nu,
                           const DecompositionConfig& cfg) {
  if (!(emissivity < 1.0 - cfg.eps_e)) fail(ErrorCode::kEmissivityCeiling, "emissivity at or above 1 - eps_e");
  if (!(temperature > 0.0) || !(cfg.t_ref > 0.0)) fail(ErrorCode::kDomain, "temperatures must be positive");
  return (radiance - emissivity * planck_radiance(nu, temperature)) /
         ((1.0 - emissivity) * planck_radiance(nu, cfg.t_ref));
}

double texture_integral(std::span<const double> v0, double t0, const WavenumberGrid& grid) {
  if (v0.size() != grid.size()) fail(ErrorCode::kDimensionMismatch, "v0 length differs from grid");
  std::vector<double> y(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) y[k] = v0[k] * planck_radiance(grid[k], t0);
  return radiometry::trapezoid(grid.values(), y);
}

TeXImage decompose_cube(const ThermalCube& cube, const MaterialMask& mask, const radiometry::SpectralLibrary& library,
                        const DecompositionConfig& cfg) {
  cfg.validate();
  if (cube.width() != mask.width() || cube.height() != mask.height()) {
    fail(ErrorCode::kDimensionMismatch, "cube and mask dimensions differ");
  }
  mask.validate();
  const WavenumberGrid& grid = cube.grid();

  std::map<std::uint16_t, std::vector<double>> emissivity;
  for (const auto& [label, name] : mask.legend) {
    auto it = library.find(name);
    if (it == library.end()) fail(ErrorCode::kMissingMaterial, "material '" + name + "' not in spectral library");
    emissivity.emplace(label, it->second.resample(grid));
  }

  const int w = cube.width();
  const int h = cube.height();
  TeXImage tex{ImageD(w, h, 1, kNaN), mask, ImageD(w, h, 1, kNaN), ImageD(w, h, 1, kNaN), 0, 0};
  std::vector<std::uint8_t> clamped(static_cast<std::size_t>(w) * h, 0);

  parallel_for(static_cast<std::size_t>(w) * h, [&](std::size_t begin, std::size_t end) {
    std::vector<double> v0(grid.size());
    for (std::size_t p = begin; p < end; ++p) {
      const int x = static_cast<int>(p % w);
      const int y = static_cast<int>(p / w);
      const auto& e = emissivity.at(mask.labels(x, y));
      const auto s = cube.pixel(x, y);
      double t = kNaN;
      try {
        t = solve_temperature_spectral(s, e, grid, cfg);
      } catch (const Error&) {
        continue;
      }
      bool any_clamped = false;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        v0[k] = illumination_factor(s[k], e[k], t, grid[k], cfg);
        if (v0[k] < 0.0) {
          v0[k] = 0.0;
          any_clamped = true;
        }
      }
      tex.temperature(x, y) = t;
      tex.texture(x, y) = texture_integral(v0, cfg.t_ref, grid);
      tex.v0(x, y) = radiometry::trapezoid(grid.values(), v0) / grid.width();
      clamped[p] = any_clamped ? 1 : 0;
    }
  });

  for (double t : tex.temperature.data()) tex.nan_count += std::isnan(t) ? 1 : 0;
  for (auto c : clamped) tex.clamped_count += c;
  return tex;
}

double solve_temperature_pseudo(double band_value, double band_emissivity, const WavenumberGrid& grid,
                                const DecompositionConfig& cfg) {
  if (!(band_emissivity > 0.0 && band_emissivity <= 1.0)) {
    fail(ErrorCode::kDomain, "band emissivity must lie in (0, 1]");
  }
  const double reflected = (1.0 - band_emissivity) * radiometry::band_radiance(cfg.t_ambient, grid);
  const double emitted = band_value - reflected;
  if (!(emitted > 0.0)) {
    std::ostringstream msg;
    msg << "band radiance " << band_value << " does not exceed the reflected ambient term " << reflected;
    fail(ErrorCode::kNegativeEmission, msg.str());
  }
  return radiometry::band_inverse(emitted / band_emissivity, grid);
}

namespace {

double percentile(std::vector<double> sorted, double p) {
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ImageD gaussian_blur_7x7(const ImageD& in, double sigma) {
  constexpr int kRadius = 3;
  std::array<double, 2 * kRadius + 1> kernel{};
  double sum = 0.0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    kernel[i + kRadius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + kRadius];
  }
  for (double& k : kernel) k /= sum;

  const int w = in.width();
  const int h = in.height();
  ImageD tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -kRadius; i <= kRadius; ++i) acc += kernel[i + kRadius] * in(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -kRadius; i <= kRadius; ++i) acc += kernel[i + kRadius] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

ImageD extract_texture_pseudo(const ImageD& image) {
  if (image.channels() != 1) fail(ErrorCode::kInvalidArgument, "texture extraction expects a single channel");
  ImageD out(image.width(), image.height(), 1, 0.5);
  if (image.empty()) return out;
  for (double v : image.data()) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "texture extraction input contains non-finite values");
  }
  std::vector<double> sorted(image.data().begin(), image.data().end());
  std::sort(sorted.begin(), sorted.end());
  const double p2 = percentile(sorted, 2.0);
  const double p98 = percentile(sorted, 98.0);
  if (!(p98 > p2)) return out;

  ImageD stretched(image.width(), image.height());
  for (std::size_t i = 0; i < image.data().size(); ++i) {
    stretched.data()[i] = std::clamp((image.data()[i] - p2) / (p98 - p2), 0.0, 1.0);
  }
  const ImageD blurred = gaussian_blur_7x7(stretched, 1.5);
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    const double s = stretched.data()[i];
    out.data()[i] = std::clamp(s + 0.5 * (s - blurred.data()[i]), 0.0, 1.0);
  }
  return out;
}

ImageD integrate_cube(const ThermalCube& cube) {
  ImageD out(cube.width(), cube.height());
  for (int y = 0; y < cube.height(); ++y) {
    for (int x = 0; x < cube.width(); ++x) out(x, y) = radiometry::trapezoid(cube.grid().values(), cube.pixel(x, y));
  }
  return out;
}

TeXImage decompose_pseudo(const ImageD& band_image, const MaterialMask& mask,
                          const radiometry::SpectralLibrary& library, const WavenumberGrid& band,
                          const DecompositionConfig& cfg) {
  cfg.validate();
  if (band_image.width() != mask.width() || band_image.height() != mask.height()) {
    fail(ErrorCode::kDimensionMismatch, "band image and mask dimensions differ");
  }
  mask.validate();
  std::map<std::uint16_t, double> e_band;
  for (const auto& [label, name] : mask.legend) {
    auto it = library.find(name);
    if (it == library.end()) fail(ErrorCode::kMissingMaterial, "material '" + name + "' not in spectral library");
    e_band.emplace(label, radiometry::band_average_emissivity(it->second, band));
  }
  const int w = band_image.width();
  const int h = band_image.height();
  TeXImage tex{ImageD(w, h, 1, kNaN), mask, extract_texture_pseudo(band_image), ImageD(w, h, 1, kNaN), 0, 0};
  parallel_for(static_cast<std::size_t>(w) * h, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const int x = static_cast<int>(p % w);
      const int y = static_cast<int>(p / w);
      try {
        tex.temperature(x, y) = solve_temperature_pseudo(band_image(x, y), e_band.at(mask.labels(x, y)), band, cfg);
      } catch (const Error&) {
      }
    }
  });
  for (double t : tex.temperature.data()) tex.nan_count += std::isnan(t) ? 1 : 0;
  return tex;
}

// ---------------------------------------------------------------------------
// I/O

namespace {

std::filesystem::path sibling(const std::filesystem::path& manifest, const std::string& suffix) {
  return manifest.parent_path() / (manifest.stem().string() + suffix);
}

std::filesystem::path legend_path(const std::filesystem::path& pgm) { return sibling(pgm, ".legend.json"); }

ImageD read_single(const std::filesystem::path& path, int w, int h) {
  ImageD img = read_pfm(path);
  if (img.channels() != 1 || img.width() != w || img.height() != h) {
    fail(ErrorCode::kDimensionMismatch, path.string() + ": unexpected image shape");
  }
  return img;
}

}  // namespace

void save_cube(const std::filesystem::path& manifest, const ThermalCube& cube) {
  detail::OrderedJson j;
  j["width"] = cube.width();
  j["height"] = cube.height();
  std::vector<double> bands;
  std::vector<std::string> files;
  for (std::size_t k = 0; k < cube.bands(); ++k) {
    bands.push_back(cube.grid()[k] / radiometry::kPerCmToPerM);
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "_b%02zu.pfm", k);
    const auto file = sibling(manifest, suffix);
    ImageD band(cube.width(), cube.height());
    for (int y = 0; y < cube.height(); ++y) {
      for (int x = 0; x < cube.width(); ++x) band(x, y) = cube.pixel(x, y)[k];
    }
    write_pfm(file, band);
    files.push_back(file.filename().string());
  }
  j["bands"] = bands;
  j["files"] = files;
  detail::write_json(manifest, j);
}

ThermalCube load_cube(const std::filesystem::path& manifest) {
  const auto j = detail::read_json(manifest);
  const std::string ctx = manifest.string();
  const int w = detail::get_field<int>(j, "width", ctx);
  const int h = detail::get_field<int>(j, "height", ctx);
  const auto bands = detail::get_field<std::vector<double>>(j, "bands", ctx);
  const auto files = detail::get_field<std::vector<std::string>>(j, "files", ctx);
  if (bands.size() != files.size()) fail(ErrorCode::kParse, ctx + ": bands and files differ in length");
  ThermalCube cube(w, h, WavenumberGrid::from_per_cm(bands));
  for (std::size_t k = 0; k < files.size(); ++k) {
    const ImageD band = read_single(manifest.parent_path() / files[k], w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) cube.pixel(x, y)[k] = band(x, y);
    }
  }
  cube.validate();
  return cube;
}

void save_mask(const std::filesystem::path& pgm, const MaterialMask& mask) {
  write_pgm16(pgm, mask.labels);
  detail::OrderedJson legend = detail::OrderedJson::object();
  for (const auto& [label, name] : mask.legend) legend[std::to_string(label)] = name;
  detail::write_json(legend_path(pgm), legend);
}

MaterialMask load_mask(const std::filesystem::path& pgm) {
  MaterialMask mask{read_pgm16(pgm), {}};
  const auto legend = detail::read_json(legend_path(pgm));
  if (!legend.is_object()) fail(ErrorCode::kParse, legend_path(pgm).string() + ": legend must be an object");
  for (const auto& [key, value] : legend.items()) {
    int label = -1;
    try {
      label = std::stoi(key);
    } catch (const std::exception&) {
    }
    if (label < 0 || label > 65535 || !value.is_string()) {
      fail(ErrorCode::kParse, legend_path(pgm).string() + ": bad legend entry '" + key + "'");
    }
    mask.legend[static_cast<std::uint16_t>(label)] = value.get<std::string>();
  }
  mask.validate();
  return mask;
}

void save_tex(const std::filesystem::path& manifest, const TeXImage& tex) {
  const auto t_file = sibling(manifest, "_T.pfm");
  const auto x_file = sibling(manifest, "_X.pfm");
  const auto v_file = sibling(manifest, "_v0.pfm");
  const auto m_file = sibling(manifest, "_mask.pgm");
  write_pfm(t_file, tex.temperature);
  write_pfm(x_file, tex.texture);
  write_pfm(v_file, tex.v0);
  save_mask(m_file, tex.material);
  detail::OrderedJson j;
  j["width"] = tex.width();
  j["height"] = tex.height();
  j["temperature"] = t_file.filename().string();
  j["texture"] = x_file.filename().string();
  j["v0"] = v_file.filename().string();
  j["mask"] = m_file.filename().string();
  j["nan_count"] = tex.nan_count;
  j["clamped_count"] = tex.clamped_count;
  detail::write_json(manifest, j);
}

TeXImage load_tex(const std::filesystem::path& manifest) {
  const auto j = detail::read_json(manifest);
  const std::string ctx = manifest.string();
  const int w = detail::get_field<int>(j, "width", ctx);
  const int h = detail::get_field<int>(j, "height", ctx);
  const auto dir = manifest.parent_path();
  TeXImage tex;
  tex.temperature = read_single(dir / detail::get_field<std::string>(j, "temperature", ctx), w, h);
  tex.texture = read_single(dir / detail::get_field<std::string>(j, "texture", ctx), w, h);
  tex.v0 = read_single(dir / detail::get_field<std::string>(j, "v0", ctx), w, h);
  tex.material = load_mask(dir / detail::get_field<std::string>(j, "mask", ctx));
  if (tex.material.width() != w || tex.material.height() != h) fail(ErrorCode::kDimensionMismatch, ctx + ": mask shape");
  tex.nan_count = j.value("nan_count", std::size_t{0});
  tex.clamped_count = j.value("clamped_count", std::size_t{0});
  return tex;
}

}  // namespace texnerf::texdecomp
