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

#include "texnerf/scenesynth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>

#include "json_util.hpp"
#include "texnerf/error.hpp"
#include "texnerf/parallel.hpp"
#include "texnerf/rng.hpp"

namespace texnerf::scenesynth {

using Eigen::Matrix3d;
using Eigen::Matrix4d;
using Eigen::Vector3d;
using radiometry::planck_radiance;

namespace {

constexpr double kHitEpsilon = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<double> intersect_sphere(const Primitive& p, const Ray& ray) {
  const Vector3d oc = ray.origin - p.center;
  const double r = p.size.x();
  const double b = oc.dot(ray.direction);
  const double c = oc.squaredNorm() - r * r;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = -b - sq;
  if (t0 > kHitEpsilon) return t0;
  const double t1 = -b + sq;
  if (t1 > kHitEpsilon) return t1;
  return std::nullopt;
}

std::optional<double> intersect_box(const Primitive& p, const Ray& ray) {
  double t_near = -kInf;
  double t_far = kInf;
  for (int a = 0; a < 3; ++a) {
    const double lo = p.center[a] - p.size[a];
    const double hi = p.center[a] + p.size[a];
    if (std::abs(ray.direction[a]) < 1e-300) {
      if (ray.origin[a] < lo || ray.origin[a] > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - ray.origin[a]) / ray.direction[a];
    double t1 = (hi - ray.origin[a]) / ray.direction[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far) return std::nullopt;
  if (t_near > kHitEpsilon) return t_near;
  if (t_far > kHitEpsilon) return t_far;
  return std::nullopt;
}

std::optional<double> intersect_plane(const Primitive& p, const Ray& ray) {
  if (std::abs(ray.direction.z()) < 1e-300) return std::nullopt;
  const double t = (p.center.z() - ray.origin.z()) / ray.direction.z();
  if (!(t > kHitEpsilon)) return std::nullopt;
  const Vector3d hit = ray.origin + t * ray.direction;
  if (std::abs(hit.x() - p.center.x()) > p.size.x() || std::abs(hit.y() - p.center.y()) > p.size.y()) {
    return std::nullopt;
  }
  return t;
}

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::kSphere: return "sphere";
    case Shape::kBox: return "box";
    case Shape::kPlane: return "plane";
  }
  return "?";
}

Shape parse_shape(const std::string& s, const std::string& ctx) {
  if (s == "sphere") return Shape::kSphere;
  if (s == "box") return Shape::kBox;
  if (s == "plane") return Shape::kPlane;
  fail(ErrorCode::kParse, ctx + ": unknown shape '" + s + "'");
}

Vector3d to_vec3(const std::vector<double>& v, const std::string& ctx) {
  if (v.size() != 3) fail(ErrorCode::kParse, ctx + ": expected a 3-vector");
  return {v[0], v[1], v[2]};
}

}  // namespace

void SceneDescription::validate(const radiometry::SpectralLibrary& library) const {
  if (primitives.empty()) fail(ErrorCode::kInvalidArgument, "scene needs at least one primitive");
  if (!(ambient_temperature > 0.0) || !(background_temperature > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "scene temperatures must be positive");
  }
  for (const auto& p : primitives) {
    if (!(p.temperature > 0.0)) fail(ErrorCode::kInvalidArgument, "primitive temperature must be positive");
    if ((p.shape == Shape::kSphere && !(p.size.x() > 0.0)) || (p.shape != Shape::kSphere && !(p.size.minCoeff() >= 0.0))) {
      fail(ErrorCode::kInvalidArgument, std::string(shape_name(p.shape)) + " has a non-positive size");
    }
  }
  for (const auto& m : materials()) {
    auto it = library.find(m);
    if (it == library.end()) fail(ErrorCode::kMissingMaterial, "scene material '" + m + "' not in spectral library");
    it->second.resample(band);
  }
}

std::vector<std::string> SceneDescription::materials() const {
  std::set<std::string> names;
  for (const auto& p : primitives) names.insert(p.material);
  names.insert(background_material);
  return {names.begin(), names.end()};
}

CameraModel CameraModel::from_fov(int width, int height, double camera_angle_x, const Matrix4d& c2w) {
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.focal = 0.5 * width / std::tan(0.5 * camera_angle_x);
  cam.c2w = c2w;
  cam.validate();
  return cam;
}

double CameraModel::camera_angle_x() const { return 2.0 * std::atan(0.5 * width / focal); }

void CameraModel::validate() const {
  if (width <= 0 || height <= 0) fail(ErrorCode::kInvariant, "camera needs positive image size");
  if (!(focal > 0.0)) fail(ErrorCode::kInvariant, "camera focal length must be positive");
  const Matrix3d r = c2w.block<3, 3>(0, 0);
  if ((r.transpose() * r - Matrix3d::Identity()).norm() >= 1e-9) {
    fail(ErrorCode::kInvariant, "camera rotation is not orthonormal");
  }
}

Ray camera_ray(const CameraModel& cam, double px, double py) {
  const Vector3d d_cam((px - 0.5 * cam.width) / cam.focal, -(py - 0.5 * cam.height) / cam.focal, -1.0);
  return {cam.origin(), (cam.c2w.block<3, 3>(0, 0) * d_cam).normalized()};
}

std::optional<Hit> intersect(const SceneDescription& scene, const Ray& ray) {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const auto& p = scene.primitives[i];
    std::optional<double> t;
    switch (p.shape) {
      case Shape::kSphere: t = intersect_sphere(p, ray); break;
      case Shape::kBox: t = intersect_box(p, ray); break;
      case Shape::kPlane: t = intersect_plane(p, ray); break;
    }
    if (t && (!best || *t < best->t)) best = Hit{*t, i};
  }
  return best;
}

double distance_to_surface(const SceneDescription& scene, const Vector3d& p) {
  double best = kInf;
  for (const auto& prim : scene.primitives) {
    double d = kInf;
    const Vector3d q = p - prim.center;
    switch (prim.shape) {
      case Shape::kSphere:
        d = std::abs(q.norm() - prim.size.x());
        break;
      case Shape::kBox: {
        const Vector3d e = q.cwiseAbs() - prim.size;
        d = e.maxCoeff() > 0.0 ? e.cwiseMax(0.0).norm() : -e.maxCoeff();
        break;
      }
      case Shape::kPlane: {
        const double dx = std::max(std::abs(q.x()) - prim.size.x(), 0.0);
        const double dy = std::max(std::abs(q.y()) - prim.size.y(), 0.0);
        d = std::sqrt(dx * dx + dy * dy + q.z() * q.z());
        break;
      }
    }
    best = std::min(best, d);
  }
  return best;
}

namespace {

CameraModel orbit_camera(double radius, double elevation_deg, double az, const Vector3d& lookat, int width,
                         int height, double camera_angle_x) {
  const double el = elevation_deg * std::numbers::pi / 180.0;
  const Vector3d pos = lookat + radius * Vector3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  const Vector3d forward = (lookat - pos).normalized();
  Vector3d right = forward.cross(Vector3d::UnitZ());
  if (right.norm() < 1e-9) right = forward.cross(Vector3d::UnitY());
  right.normalize();
  const Vector3d up = right.cross(forward).normalized();
  Matrix4d c2w = Matrix4d::Identity();
  c2w.block<3, 1>(0, 0) = right;
  c2w.block<3, 1>(0, 1) = up;
  c2w.block<3, 1>(0, 2) = -forward;
  c2w.block<3, 1>(0, 3) = pos;
  return CameraModel::from_fov(width, height, camera_angle_x, c2w);
}

}  // namespace

std::vector<CameraModel> generate_orbit_poses(int n, double radius, double elevation_deg, const Vector3d& lookat,
                                              int width, int height, double camera_angle_x) {
  return generate_orbit_poses(n, radius, std::vector<double>{elevation_deg}, lookat, width, height, camera_angle_x);
}

std::vector<CameraModel> generate_orbit_poses(int n, double radius, const std::vector<double>& elevations_deg,
                                              const Vector3d& lookat, int width, int height, double camera_angle_x) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "orbit needs at least one pose");
  if (!(radius > 0.0)) fail(ErrorCode::kInvalidArgument, "orbit radius must be positive");
  if (elevations_deg.empty()) fail(ErrorCode::kInvalidArgument, "orbit needs at least one elevation");
  std::vector<CameraModel> cams;
  cams.reserve(static_cast<std::size_t>(n));
  const std::size_t rings = elevations_deg.size();
  for (int i = 0; i < n; ++i) {
    const double az = 2.0 * std::numbers::pi * i / n;
    cams.push_back(orbit_camera(radius, elevations_deg[static_cast<std::size_t>(i) % rings], az, lookat, width,
                                height, camera_angle_x));
  }
  return cams;
}

ThermalView raytrace_thermal(const SceneDescription& scene, const CameraModel& cam,
                             const radiometry::SpectralLibrary& library) {
  scene.validate(library);
  cam.validate();
  const auto& band = scene.band;
  const std::size_t k_count = band.size();
  const auto names = scene.materials();

  std::map<std::string, std::uint16_t> label_of;
  texdecomp::MaterialMask mask{Image<std::uint16_t>(cam.width, cam.height), {}};
  std::vector<std::vector<double>> emissivity;
  for (std::size_t i = 0; i < names.size(); ++i) {
    label_of[names[i]] = static_cast<std::uint16_t>(i);
    mask.legend[static_cast<std::uint16_t>(i)] = names[i];
    emissivity.push_back(library.find(names[i])->second.resample(band));
  }
  std::vector<double> ambient(k_count);
  for (std::size_t k = 0; k < k_count; ++k) ambient[k] = planck_radiance(band[k], scene.ambient_temperature);
  const double x_truth = radiometry::band_radiance(scene.ambient_temperature, band);

  ThermalView view{texdecomp::ThermalCube(cam.width, cam.height, band),
                   texdecomp::TeXImage{ImageD(cam.width, cam.height), std::move(mask),
                                       ImageD(cam.width, cam.height, 1, x_truth),
                                       ImageD(cam.width, cam.height, 1, 1.0), 0, 0},
                   ImageD(cam.width, cam.height, 1, kInf)};

  const std::size_t pixels = static_cast<std::size_t>(cam.width) * cam.height;
  parallel_for(pixels, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const int x = static_cast<int>(p % cam.width);
      const int y = static_cast<int>(p / cam.width);
      const Ray ray = camera_ray(cam, x + 0.5, y + 0.5);
      const auto hit = intersect(scene, ray);
      double temperature = scene.background_temperature;
      const std::string* material = &scene.background_material;
      if (hit) {
        temperature = scene.primitives[hit->primitive].temperature;
        material = &scene.primitives[hit->primitive].material;
        view.depth(x, y) = hit->t;
      }
      const std::uint16_t label = label_of.at(*material);
      const auto& e = emissivity[label];
      auto s = view.cube.pixel(x, y);
      for (std::size_t k = 0; k < k_count; ++k) {
        s[k] = e[k] * planck_radiance(band[k], temperature) + (1.0 - e[k]) * ambient[k];
      }
      view.truth.temperature(x, y) = temperature;
      view.truth.material.labels(x, y) = label;
    }
  });
  return view;
}

pseudotex::MappingMetadata scene_metadata(const SceneDescription& scene) {
  double lo = scene.background_temperature;
  double hi = scene.background_temperature;
  for (const auto& p : scene.primitives) {
    lo = std::min(lo, p.temperature);
    hi = std::max(hi, p.temperature);
  }
  pseudotex::MappingMetadata meta;
  meta.t_min = lo - 5.0;
  meta.t_max = hi + 5.0;
  meta.x_min = 0.0;
  meta.x_max = radiometry::band_radiance(meta.t_max, scene.band);
  meta.palette = pseudotex::build_palette(scene.materials());
  meta.validate();
  return meta;
}

void emit_dataset(const SceneDescription& scene, const std::vector<CameraModel>& poses,
                  const radiometry::SpectralLibrary& library, const std::filesystem::path& out_dir,
                  const EmitOptions& options) {
  namespace fs = std::filesystem;
  scene.validate(library);
  if (poses.empty()) fail(ErrorCode::kInvalidArgument, "dataset needs at least one pose");
  std::error_code ec;
  fs::create_directories(out_dir / "views", ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + (out_dir / "views").string() + ": " + ec.message());

  save_scene(out_dir / "scene.json", scene);
  radiometry::SpectralLibrary used;
  for (const auto& m : scene.materials()) used.emplace(m, library.find(m)->second);
  radiometry::save_spectral_library(out_dir / "library.csv", used);

  const auto meta = scene_metadata(scene);
  Rng rng(options.seed);

  detail::OrderedJson transforms;
  transforms["camera_angle_x"] = poses.front().camera_angle_x();
  transforms["width"] = poses.front().width;
  transforms["height"] = poses.front().height;
  transforms["frames"] = detail::OrderedJson::array();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "r_%03zu", i);
    const std::string base = std::string("views/") + stem;
    ThermalView view = raytrace_thermal(scene, poses[i], library);
    if (options.noise_sigma > 0.0) {
      for (int y = 0; y < view.cube.height(); ++y) {
        for (int x = 0; x < view.cube.width(); ++x) {
          for (double& s : view.cube.pixel(x, y)) s = std::max(0.0, s + options.noise_sigma * standard_normal(rng));
        }
      }
    }
    const auto hsv = pseudotex::tex_to_hsv(view.truth, meta);
    pseudotex::save_hsv(out_dir / (base + ".pfm"), hsv.hsv, meta);
    if (options.write_png) write_png8(out_dir / (base + ".png"), pseudotex::hsv_to_rgb(hsv.hsv));
    texdecomp::save_cube(out_dir / (base + "_cube.json"), view.cube);
    texdecomp::save_tex(out_dir / (base + "_tex.json"), view.truth);
    write_pfm(out_dir / (base + "_depth.pfm"), view.depth);

    detail::OrderedJson frame;
    frame["file_path"] = base + ".pfm";
    detail::OrderedJson rows = detail::OrderedJson::array();
    for (int r = 0; r < 4; ++r) {
      rows.push_back({poses[i].c2w(r, 0), poses[i].c2w(r, 1), poses[i].c2w(r, 2), poses[i].c2w(r, 3)});
    }
    frame["transform_matrix"] = rows;
    frame["cube"] = base + "_cube.json";
    frame["tex"] = base + "_tex.json";
    frame["depth"] = base + "_depth.pfm";
    transforms["frames"].push_back(frame);
  }
  detail::write_json(out_dir / "transforms.json", transforms);
}

SceneDescription reference_scene() {
  SceneDescription scene;
  scene.ambient_temperature = 295.0;
  scene.background_material = "backdrop";
  scene.background_temperature = 290.0;
  scene.band = radiometry::WavenumberGrid::uniform(800e2, 1400e2, 16);
  scene.primitives = {
      {Shape::kPlane, Vector3d(0.0, 0.0, 0.0), Vector3d(1.1, 1.1, 0.0), 295.0, "table_paint"},
      {Shape::kSphere, Vector3d(-0.35, -0.1, 0.3), Vector3d(0.3, 0.0, 0.0), 310.0, "plaster"},
      {Shape::kSphere, Vector3d(0.4, 0.2, 0.25), Vector3d(0.25, 0.0, 0.0), 330.0, "polished_metal"},
  };
  return scene;
}

radiometry::SpectralLibrary reference_library() {
  // Piecewise-linear LWIR emissivity, wavenumbers in cm^-1.
  struct Entry {
    const char* name;
    std::vector<double> nu;
    std::vector<double> e;
  };
  const std::vector<Entry> entries = {
      {"backdrop", {700, 1000, 1500}, {0.80, 0.86, 0.90}},
      {"plaster", {700, 800, 1000, 1150, 1250, 1400, 1500}, {0.88, 0.89, 0.91, 0.95, 0.94, 0.93, 0.93}},
      {"polished_metal", {700, 800, 1100, 1400, 1500}, {0.16, 0.18, 0.25, 0.31, 0.32}},
      {"table_paint", {700, 800, 1000, 1400, 1500}, {0.97, 0.97, 0.95, 0.92, 0.92}},
  };
  radiometry::SpectralLibrary lib;
  for (const auto& en : entries) {
    lib.emplace(en.name, radiometry::SpectralCurve(en.name, radiometry::WavenumberGrid::from_per_cm(en.nu), en.e));
  }
  return lib;
}

SceneDescription load_scene(const std::filesystem::path& path) {
  const auto j = detail::read_json(path);
  const std::string ctx = path.string();
  SceneDescription scene;
  scene.ambient_temperature = detail::get_field<double>(j, "ambient_temperature_K", ctx);
  const auto bg = detail::get_field<detail::Json>(j, "background", ctx);
  scene.background_material = detail::get_field<std::string>(bg, "material", ctx + " background");
  scene.background_temperature = detail::get_field<double>(bg, "temperature_K", ctx + " background");
  const auto band = detail::get_field<detail::Json>(j, "band", ctx);
  const auto count = detail::get_field<std::size_t>(band, "count", ctx + " band");
  scene.band = radiometry::WavenumberGrid::uniform(detail::get_field<double>(band, "min_cm1", ctx) * 100.0,
                                                   detail::get_field<double>(band, "max_cm1", ctx) * 100.0, count);
  for (const auto& pj : detail::get_field<detail::Json>(j, "primitives", ctx)) {
    Primitive p;
    p.shape = parse_shape(detail::get_field<std::string>(pj, "shape", ctx), ctx);
    p.center = to_vec3(detail::get_field<std::vector<double>>(pj, "center", ctx), ctx);
    if (p.shape == Shape::kSphere) {
      p.size = Vector3d(detail::get_field<double>(pj, "radius", ctx), 0.0, 0.0);
    } else {
      auto he = detail::get_field<std::vector<double>>(pj, "half_extents", ctx);
      if (p.shape == Shape::kPlane && he.size() == 2) he.push_back(0.0);
      p.size = to_vec3(he, ctx);
    }
    p.temperature = detail::get_field<double>(pj, "temperature_K", ctx);
    p.material = detail::get_field<std::string>(pj, "material", ctx);
    scene.primitives.push_back(std::move(p));
  }
  return scene;
}

void save_scene(const std::filesystem::path& path, const SceneDescription& scene) {
  detail::OrderedJson j;
  j["ambient_temperature_K"] = scene.ambient_temperature;
  j["background"] = {{"material", scene.background_material}, {"temperature_K", scene.background_temperature}};
  j["band"] = {{"min_cm1", scene.band.front() / 100.0},
               {"max_cm1", scene.band.back() / 100.0},
               {"count", scene.band.size()}};
  j["primitives"] = detail::OrderedJson::array();
  for (const auto& p : scene.primitives) {
    detail::OrderedJson pj;
    pj["shape"] = shape_name(p.shape);
    pj["center"] = {p.center.x(), p.center.y(), p.center.z()};
    if (p.shape == Shape::kSphere) {
      pj["radius"] = p.size.x();
    } else if (p.shape == Shape::kPlane) {
      pj["half_extents"] = {p.size.x(), p.size.y()};
    } else {
      pj["half_extents"] = {p.size.x(), p.size.y(), p.size.z()};
    }
    pj["temperature_K"] = p.temperature;
    pj["material"] = p.material;
    j["primitives"].push_back(pj);
  }
  detail::write_json(path, j);
}

}  // namespace texnerf::scenesynth
