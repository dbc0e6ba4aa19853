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

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "texnerf/image.hpp"
#include "texnerf/nerf.hpp"
#include "texnerf/pseudotex.hpp"
#include "texnerf/scenesynth.hpp"
#include "texnerf/trainer.hpp"

namespace texnerf::eval {

struct RenderConfig {
  double near = 1.0;
  double far = 4.5;
  int samples = 64;
  int chunk_rays = 2048;
};

/// Deterministic (bin-midpoint) rendering of every pixel.
pseudotex::HsvImage render_view(const nerf::RadianceField& field, const scenesynth::CameraModel& cam,
                                const RenderConfig& cfg);

inline constexpr double kPsnrCap = 99.0;

/// PSNR over all channels of two [0, 1] images; capped at kPsnrCap.
double psnr_images(const ImageD& a, const ImageD& b);
/// PSNR of two HSV images compared in RGB.
double psnr(const pseudotex::HsvImage& a, const pseudotex::HsvImage& b);
/// PSNR of each RGB channel separately.
std::array<double, 3> psnr_channels(const pseudotex::HsvImage& a, const pseudotex::HsvImage& b);

/// Rec. 601 luma of an RGB image.
ImageD luma(const ImageD& rgb);
/// Mean SSIM of single-channel [0, 1] images: 11x11 Gaussian window
/// (sigma 1.5), K1 = 0.01, K2 = 0.03, valid windows only.
double ssim_gray(const ImageD& a, const ImageD& b);
/// SSIM on the luma of the RGB conversion.
double ssim(const pseudotex::HsvImage& a, const pseudotex::HsvImage& b);

struct MaeResult {
  double mae = 0.0;                // NaN when every masked pixel is clipped
  std::size_t used = 0;            // pixels contributing
  double clipped_fraction = 0.0;   // masked pixels skipped for out-of-range or NaN truth
};

/// Mean |T_pred - T_gt| over mask pixels, T_pred decoded from saturation.
/// Throws kEmptyMask when the mask selects nothing.
MaeResult temperature_mae(const pseudotex::HsvImage& pred, const ImageD& gt_temperature,
                          const pseudotex::MappingMetadata& meta, const Image<std::uint8_t>& mask);

struct ViewMetrics {
  std::size_t index = 0;
  double psnr = 0.0;
  std::array<double, 3> psnr_rgb{};  // per-channel diagnostics (R, G, B)
  double ssim = 0.0;
  double temperature_mae = 0.0;
  std::size_t mae_pixels = 0;
  double clipped_fraction = 0.0;
  double material_accuracy = 0.0;  // foreground pixels whose nearest palette hue matches
};

struct EvalReport {
  std::vector<ViewMetrics> views;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_temperature_mae = 0.0;
  double mean_material_accuracy = 0.0;

  std::string to_json() const;
  std::string to_table() const;
};

/// Renders and scores `views`. Ground-truth T and materials come from each
/// view's tex manifest; the foreground is where the depth map is finite.
EvalReport evaluate(const nerf::RadianceField& field, const std::vector<trainer::PosedImage>& views,
                    const pseudotex::MappingMetadata& meta, const RenderConfig& cfg,
                    std::vector<pseudotex::HsvImage>* renders = nullptr);

struct BoundingBox {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
};

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> hsv;
  std::vector<double> sigma;
};

/// Regular grid over the box with inclusive endpoints (resolution >= 2 per
/// axis); keeps points with density above `threshold`. Colours are queried
/// with a straight-down view direction.
PointCloud extract_point_cloud(const nerf::RadianceField& field, const BoundingBox& box, int resolution,
                               double threshold);

/// ASCII PLY with float xyz, uchar rgb and float density.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace texnerf::eval
