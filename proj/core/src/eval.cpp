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

#include "texnerf/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json_util.hpp"
#include "texnerf/error.hpp"
#include "texnerf/parallel.hpp"

namespace texnerf::eval {

using Eigen::Vector3d;

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::array<double, kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    w[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-mode separable filtering of a dense row-major plane.
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h) {
  static const auto g = gaussian_window();
  const int ow = w - kSsimWindow + 1;
  const int oh = h - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += g[k] * in[static_cast<std::size_t>(y) * w + x + k];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += g[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

void require_same_shape(const ImageD& a, const ImageD& b, const char* what) {
  if (!a.same_shape(b)) fail(ErrorCode::kDimensionMismatch, std::string(what) + ": image shapes differ");
  if (a.empty()) fail(ErrorCode::kInvalidArgument, std::string(what) + ": empty image");
}

double mean_finite(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  }
  return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

std::string fmt(double v, int precision) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

pseudotex::HsvImage render_view(const nerf::RadianceField& field, const scenesynth::CameraModel& cam,
                                const RenderConfig& cfg) {
  cam.validate();
  if (cfg.samples <= 0 || cfg.chunk_rays <= 0 || !(cfg.far > cfg.near) || cfg.near < 0.0) {
    fail(ErrorCode::kInvalidArgument, "render config needs samples > 0, chunk_rays > 0 and 0 <= near < far");
  }
  pseudotex::HsvImage out(cam.width, cam.height, 3);
  const std::size_t total = static_cast<std::size_t>(cam.width) * cam.height;
  const std::size_t chunks = (total + cfg.chunk_rays - 1) / cfg.chunk_rays;
  parallel_for(chunks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t first = c * cfg.chunk_rays;
      const std::size_t count = std::min<std::size_t>(cfg.chunk_rays, total - first);
      nerf::RaySampleBatch batch;
      batch.origins.resize(3, static_cast<Eigen::Index>(count));
      batch.directions.resize(3, static_cast<Eigen::Index>(count));
      batch.gt_hsv = Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(count));
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t p = first + i;
        const auto ray = scenesynth::camera_ray(cam, static_cast<double>(p % cam.width) + 0.5,
                                                static_cast<double>(p / cam.width) + 0.5);
        batch.origins.col(static_cast<Eigen::Index>(i)) = ray.origin;
        batch.directions.col(static_cast<Eigen::Index>(i)) = ray.direction;
      }
      nerf::assign_samples(batch, cfg.near, cfg.far, cfg.samples, nullptr);
      const auto rendered = nerf::render_batch(field, batch);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t p = first + i;
        for (int ch = 0; ch < 3; ++ch) {
          out(static_cast<int>(p % cam.width), static_cast<int>(p / cam.width), ch) =
              std::clamp(rendered.hsv(ch, static_cast<Eigen::Index>(i)), 0.0, 1.0);
        }
      }
    }
  });
  return out;
}

double psnr_images(const ImageD& a, const ImageD& b) {
  require_same_shape(a, b, "psnr");
  const auto da = a.data();
  const auto db = b.data();
  double se = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(da.size());
  if (!std::isfinite(mse)) fail(ErrorCode::kNonFinite, "psnr: non-finite pixel values");
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double psnr(const pseudotex::HsvImage& a, const pseudotex::HsvImage& b) {
  return psnr_images(pseudotex::hsv_to_rgb(a), pseudotex::hsv_to_rgb(b));
}

std::array<double, 3> psnr_channels(const pseudotex::HsvImage& a, const pseudotex::HsvImage& b) {
  require_same_shape(a, b, "psnr");
  if (a.channels() != 3) fail(ErrorCode::kDimensionMismatch, "psnr_channels needs HSV images");
  const auto ra = pseudotex::hsv_to_rgb(a);
  const auto rb = pseudotex::hsv_to_rgb(b);
  std::array<double, 3> out{};
  for (int ch = 0; ch < 3; ++ch) {
    ImageD ca(a.width(), a.height(), 1), cb(a.width(), a.height(), 1);
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        ca(x, y) = ra(x, y, ch);
        cb(x, y) = rb(x, y, ch);
      }
    }
    out[ch] = psnr_images(ca, cb);
  }
  return out;
}

ImageD luma(const ImageD& rgb) {
  if (rgb.channels() != 3) fail(ErrorCode::kDimensionMismatch, "luma needs a 3-channel image");
  ImageD out(rgb.width(), rgb.height(), 1);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      out(x, y) = 0.299 * rgb(x, y, 0) + 0.587 * rgb(x, y, 1) + 0.114 * rgb(x, y, 2);
    }
  }
  return out;
}

double ssim_gray(const ImageD& a, const ImageD& b) {
  require_same_shape(a, b, "ssim");
  if (a.channels() != 1) fail(ErrorCode::kDimensionMismatch, "ssim_gray needs single-channel images");
  const int w = a.width();
  const int h = a.height();
  if (w < kSsimWindow || h < kSsimWindow) {
    fail(ErrorCode::kInvalidArgument, "ssim needs images of at least 11x11 pixels");
  }
  const std::size_t n = a.pixel_count();
  std::vector<double> x(a.data().begin(), a.data().end()), y(b.data().begin(), b.data().end());
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, w, h);
  const auto my = filter_valid(y, w, h);
  const auto sxx = filter_valid(xx, w, h);
  const auto syy = filter_valid(yy, w, h);
  const auto sxy = filter_valid(xy, w, h);
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double sum = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
           ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return sum / static_cast<double>(mx.size());
}

double ssim(const pseudotex::HsvImage& a, const pseudotex::HsvImage& b) {
  return ssim_gray(luma(pseudotex::hsv_to_rgb(a)), luma(pseudotex::hsv_to_rgb(b)));
}

MaeResult temperature_mae(const pseudotex::HsvImage& pred, const ImageD& gt_temperature,
                          const pseudotex::MappingMetadata& meta, const Image<std::uint8_t>& mask) {
  meta.validate();
  if (pred.channels() != 3) fail(ErrorCode::kDimensionMismatch, "temperature_mae: prediction must be HSV");
  if (pred.width() != gt_temperature.width() || pred.height() != gt_temperature.height() ||
      pred.width() != mask.width() || pred.height() != mask.height()) {
    fail(ErrorCode::kDimensionMismatch, "temperature_mae: prediction, truth and mask sizes differ");
  }
  std::size_t selected = 0, clipped = 0;
  double sum = 0.0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!mask(x, y)) continue;
      ++selected;
      const double t = gt_temperature(x, y);
      if (!std::isfinite(t) || t < meta.t_min || t > meta.t_max) {
        ++clipped;
        continue;
      }
      const double t_pred = meta.t_min + std::clamp(pred(x, y, 1), 0.0, 1.0) * (meta.t_max - meta.t_min);
      sum += std::abs(t_pred - t);
    }
  }
  if (selected == 0) fail(ErrorCode::kEmptyMask, "temperature_mae: mask selects no pixels");
  MaeResult r;
  r.used = selected - clipped;
  r.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(selected);
  r.mae = r.used ? sum / static_cast<double>(r.used) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::string EvalReport::to_json() const {
  detail::OrderedJson j;
  auto num = [](double v) { return std::isfinite(v) ? detail::OrderedJson(v) : detail::OrderedJson(nullptr); };
  j["mean_psnr"] = num(mean_psnr);
  j["mean_ssim"] = num(mean_ssim);
  j["mean_temperature_mae_K"] = num(mean_temperature_mae);
  j["mean_material_accuracy"] = num(mean_material_accuracy);
  j["views"] = detail::OrderedJson::array();
  for (const auto& v : views) {
    detail::OrderedJson e;
    e["index"] = v.index;
    e["psnr"] = num(v.psnr);
    e["psnr_rgb"] = {num(v.psnr_rgb[0]), num(v.psnr_rgb[1]), num(v.psnr_rgb[2])};
    e["ssim"] = num(v.ssim);
    e["temperature_mae_K"] = num(v.temperature_mae);
    e["mae_pixels"] = v.mae_pixels;
    e["clipped_fraction"] = num(v.clipped_fraction);
    e["material_accuracy"] = num(v.material_accuracy);
    j["views"].push_back(e);
  }
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream s;
  s << std::left << std::setw(6) << "view" << std::right << std::setw(9) << "psnr" << std::setw(8) << "ssim"
    << std::setw(10) << "mae_K" << std::setw(9) << "clipped" << std::setw(10) << "mat_acc" << '\n';
  auto line = [&](const std::string& name, double p, double ss, double m, double c, double a) {
    s << std::left << std::setw(6) << name << std::right << std::setw(9) << fmt(p, 2) << std::setw(8) << fmt(ss, 4)
      << std::setw(10) << fmt(m, 3) << std::setw(9) << fmt(c, 3) << std::setw(10) << fmt(a, 3) << '\n';
  };
  for (const auto& v : views) {
    line(std::to_string(v.index), v.psnr, v.ssim, v.temperature_mae, v.clipped_fraction, v.material_accuracy);
  }
  line("mean", mean_psnr, mean_ssim, mean_temperature_mae, std::numeric_limits<double>::quiet_NaN(),
       mean_material_accuracy);
  return s.str();
}

EvalReport evaluate(const nerf::RadianceField& field, const std::vector<trainer::PosedImage>& views,
                    const pseudotex::MappingMetadata& meta, const RenderConfig& cfg,
                    std::vector<pseudotex::HsvImage>* renders) {
  if (views.empty()) fail(ErrorCode::kInvalidArgument, "evaluate: no views");
  EvalReport report;
  std::vector<double> ps, ss, ms, as;
  for (const auto& view : views) {
    const auto pred = render_view(field, view.camera, cfg);
    ViewMetrics m;
    m.index = view.index;
    m.psnr = psnr(pred, view.hsv);
    m.psnr_rgb = psnr_channels(pred, view.hsv);
    m.ssim = ssim(pred, view.hsv);
    m.temperature_mae = std::numeric_limits<double>::quiet_NaN();
    m.clipped_fraction = std::numeric_limits<double>::quiet_NaN();
    m.material_accuracy = std::numeric_limits<double>::quiet_NaN();

    Image<std::uint8_t> fg(pred.width(), pred.height(), 1, 1);
    if (!view.depth_path.empty()) {
      const auto depth = read_pfm(view.depth_path);
      if (depth.width() != pred.width() || depth.height() != pred.height()) {
        fail(ErrorCode::kDimensionMismatch, "evaluate: depth map size differs from the image");
      }
      for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) fg(x, y) = std::isfinite(depth(x, y)) ? 1 : 0;
      }
    }
    if (!view.tex_path.empty()) {
      const auto tex = texdecomp::load_tex(view.tex_path);
      const auto r = temperature_mae(pred, tex.temperature, meta, fg);
      m.temperature_mae = r.mae;
      m.mae_pixels = r.used;
      m.clipped_fraction = r.clipped_fraction;
      std::size_t hits = 0, total = 0;
      for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) {
          if (!fg(x, y)) continue;
          ++total;
          const std::size_t k = meta.nearest_index(pred(x, y, 0));
          if (meta.palette[k].first == tex.material.material_at(x, y)) ++hits;
        }
      }
      if (total) m.material_accuracy = static_cast<double>(hits) / static_cast<double>(total);
    }
    ps.push_back(m.psnr);
    ss.push_back(m.ssim);
    ms.push_back(m.temperature_mae);
    as.push_back(m.material_accuracy);
    report.views.push_back(m);
    if (renders) renders->push_back(pred);
  }
  report.mean_psnr = mean_finite(ps);
  report.mean_ssim = mean_finite(ss);
  report.mean_temperature_mae = mean_finite(ms);
  report.mean_material_accuracy = mean_finite(as);
  return report;
}

PointCloud extract_point_cloud(const nerf::RadianceField& field, const BoundingBox& box, int resolution,
                               double threshold) {
  if (resolution < 2) fail(ErrorCode::kInvalidArgument, "point cloud resolution must be >= 2");
  if (!(box.lo.array() < box.hi.array()).all() || !box.lo.allFinite() || !box.hi.allFinite()) {
    fail(ErrorCode::kInvalidArgument, "point cloud box needs lo < hi on every axis");
  }
  const int n = resolution;
  const Vector3d step = (box.hi - box.lo) / (n - 1);
  PointCloud cloud;
  const Vector3d down(0.0, 0.0, -1.0);
  for (int iz = 0; iz < n; ++iz) {
    Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(n) * n);
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        // Endpoints are placed exactly on the box faces.
        const Vector3d idx(ix, iy, iz);
        Vector3d p = box.lo + step.cwiseProduct(idx);
        if (ix == n - 1) p.x() = box.hi.x();
        if (iy == n - 1) p.y() = box.hi.y();
        if (iz == n - 1) p.z() = box.hi.z();
        pts.col(static_cast<Eigen::Index>(iy) * n + ix) = p;
      }
    }
    const Eigen::Matrix3Xd dirs = down.replicate(1, pts.cols());
    const auto out = nerf::field_forward(field, pts, dirs);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      if (out.sigma(i) > threshold) {
        cloud.points.emplace_back(pts.col(i));
        cloud.hsv.emplace_back(out.h(i), out.s(i), out.v(i));
        cloud.sigma.push_back(out.sigma(i));
      }
    }
  }
  return cloud;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty float density\nend_header\n";
  out << std::setprecision(7);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    double r, g, b;
    pseudotex::hsv_to_rgb(cloud.hsv[i].x(), cloud.hsv[i].y(), cloud.hsv[i].z(), r, g, b);
    auto byte = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    const auto& p = cloud.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << byte(r) << ' ' << byte(g) << ' ' << byte(b) << ' '
        << cloud.sigma[i] << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace texnerf::eval
