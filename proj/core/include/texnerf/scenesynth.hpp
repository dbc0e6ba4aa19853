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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "texnerf/image.hpp"
#include "texnerf/pseudotex.hpp"
#include "texnerf/radiometry.hpp"
#include "texnerf/texdecomp.hpp"

namespace texnerf::scenesynth {

enum class Shape { kSphere, kBox, kPlane };

/// Sphere: size.x() is the radius. Box: axis-aligned, size is the half
/// extents. Plane: horizontal rectangle at center.z() with half extents
/// size.x(), size.y(), visible from both sides.
struct Primitive {
  Shape shape = Shape::kSphere;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  double temperature = 300.0;
  std::string material;
};

struct SceneDescription {
  std::vector<Primitive> primitives;
  double ambient_temperature = 295.0;
  std::string background_material;
  double background_temperature = 295.0;
  radiometry::WavenumberGrid band = radiometry::WavenumberGrid::uniform(800e2, 1400e2, 16);

  void validate(const radiometry::SpectralLibrary& library) const;
  /// Distinct materials including the background, sorted.
  std::vector<std::string> materials() const;
};

/// Pinhole camera, world z up. Camera frame is right-handed, looking down -z
/// with +y up in the image.
struct CameraModel {
  int width = 0;
  int height = 0;
  double focal = 1.0;  // pixels
  Eigen::Matrix4d c2w = Eigen::Matrix4d::Identity();

  static CameraModel from_fov(int width, int height, double camera_angle_x, const Eigen::Matrix4d& c2w);
  double camera_angle_x() const;
  Eigen::Vector3d origin() const { return c2w.block<3, 1>(0, 3); }
  /// Throws kInvariant unless the rotation block is orthonormal and focal > 0.
  void validate() const;
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;  // unit
};

/// Ray through image position (px, py) in pixel units, (0, 0) the top-left
/// corner. Pixel centres sit at (u + 0.5, v + 0.5).
Ray camera_ray(const CameraModel& cam, double px, double py);

struct Hit {
  double t;
  std::size_t primitive;
};

std::optional<Hit> intersect(const SceneDescription& scene, const Ray& ray);

/// Unsigned distance from p to the nearest primitive surface.
double distance_to_surface(const SceneDescription& scene, const Eigen::Vector3d& p);

/// Cameras evenly spaced in azimuth (starting at 0 deg on +x) on a circle
/// around `lookat` at the given elevation, all aimed at `lookat`.
std::vector<CameraModel> generate_orbit_poses(int n, double radius, double elevation_deg,
                                              const Eigen::Vector3d& lookat, int width = 64, int height = 64,
                                              double camera_angle_x = 0.7);

/// Multi-ring orbit: pose i sits at azimuth 2 pi i / n on ring i mod R, so
/// rings interleave and each ring is staggered against the others.
std::vector<CameraModel> generate_orbit_poses(int n, double radius, const std::vector<double>& elevations_deg,
                                              const Eigen::Vector3d& lookat, int width = 64, int height = 64,
                                              double camera_angle_x = 0.7);

struct ThermalView {
  texdecomp::ThermalCube cube;
  texdecomp::TeXImage truth;
  ImageD depth;  // hit distance; +inf where the ray misses
};

/// Single-bounce forward model per band:
/// S = e B(T_obj) + (1 - e) B(T_ambient).
ThermalView raytrace_thermal(const SceneDescription& scene, const CameraModel& cam,
                             const radiometry::SpectralLibrary& library);

/// Mapping ranges for a synthetic scene: temperatures padded by 5 K around
/// the scene's extremes, texture in [0, band_radiance(t_max)].
pseudotex::MappingMetadata scene_metadata(const SceneDescription& scene);

struct EmitOptions {
  double noise_sigma = 0.0;  // additive Gaussian radiance noise, cube only
  std::uint64_t seed = 0;
  bool write_png = true;
};

/// Writes the dataset layout consumed by decompose/train/eval:
///   transforms.json, scene.json, library.csv and views/r_NNN{.pfm,.meta.json,.png,
///   _cube.json,_cube_bKK.pfm,_tex.json,_tex_*.pfm,_depth.pfm}
void emit_dataset(const SceneDescription& scene, const std::vector<CameraModel>& poses,
                  const radiometry::SpectralLibrary& library, const std::filesystem::path& out_dir,
                  const EmitOptions& options);

/// Reference desk scene: plaster and polished-metal spheres on a painted table.
SceneDescription reference_scene();
radiometry::SpectralLibrary reference_library();

SceneDescription load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneDescription& scene);

}  // namespace texnerf::scenesynth
