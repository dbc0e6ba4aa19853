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

#include "texnerf/nerf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "texnerf/error.hpp"

namespace texnerf::nerf {

using Eigen::Map;
using Eigen::Matrix3Xd;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void relu_inplace(MatrixXd& m) { m = m.cwiseMax(0.0); }

// Octave j+1 from octave j by the double-angle identities.
void encode_into(const double* x, int levels, bool include_input, double* out) {
  if (include_input) {
    out[0] = x[0];
    out[1] = x[1];
    out[2] = x[2];
    out += 3;
  }
  if (levels == 0) return;
  double sn[3], cs[3];
  for (int c = 0; c < 3; ++c) {
    sn[c] = std::sin(std::numbers::pi * x[c]);
    cs[c] = std::cos(std::numbers::pi * x[c]);
  }
  for (int j = 0; j < levels; ++j) {
    for (int c = 0; c < 3; ++c) {
      out[c] = sn[c];
      out[3 + c] = cs[c];
      const double s2 = 2.0 * sn[c] * cs[c];
      cs[c] = (cs[c] - sn[c]) * (cs[c] + sn[c]);
      sn[c] = s2;
    }
    out += 6;
  }
}

}  // namespace

int encoded_size(int levels, bool include_input) { return 3 * ((include_input ? 1 : 0) + 2 * levels); }

VectorXd positional_encoding(const Vector3d& x, int levels, bool include_input) {
  VectorXd out(encoded_size(levels, include_input));
  encode_into(x.data(), levels, include_input, out.data());
  return out;
}

MatrixXd positional_encoding_jacobian(const Vector3d& x, int levels, bool include_input) {
  MatrixXd jac = MatrixXd::Zero(encoded_size(levels, include_input), 3);
  int row = 0;
  if (include_input) {
    jac.topRows<3>().setIdentity();
    row = 3;
  }
  for (int j = 0; j < levels; ++j) {
    const double freq = std::ldexp(std::numbers::pi, j);
    for (int c = 0; c < 3; ++c) {
      jac(row + c, c) = freq * std::cos(freq * x(c));
      jac(row + 3 + c, c) = -freq * std::sin(freq * x(c));
    }
    row += 6;
  }
  return jac;
}

MatrixXd positional_encoding(const Matrix3Xd& x, int levels, bool include_input) {
  MatrixXd out(encoded_size(levels, include_input), x.cols());
  for (Eigen::Index p = 0; p < x.cols(); ++p) encode_into(x.col(p).data(), levels, include_input, out.col(p).data());
  return out;
}

void FieldConfig::validate() const {
  if (encoding.l_pos < 0 || encoding.l_dir < 0) fail(ErrorCode::kInvalidArgument, "encoding levels must be >= 0");
  if (encoded_size(encoding.l_pos, encoding.include_input) == 0) {
    fail(ErrorCode::kInvalidArgument, "position encoding is empty");
  }
  if (trunk_depth < 1 || trunk_width < 1 || sv_width < 1) {
    fail(ErrorCode::kInvalidArgument, "network sizes must be positive");
  }
  if (hue_tap < 1 || hue_tap > trunk_depth) fail(ErrorCode::kInvalidArgument, "hue_tap must lie in [1, trunk_depth]");
}

RadianceField::RadianceField(const FieldConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int pos_dim = encoded_size(cfg_.encoding.l_pos, cfg_.encoding.include_input);
  const int dir_dim = encoded_size(cfg_.encoding.l_dir, cfg_.encoding.include_input);
  const int w = cfg_.trunk_width;
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    tensors_.push_back({std::move(name), rows, cols, offset});
    offset += tensors_.back().size();
  };
  for (int l = 0; l < cfg_.trunk_depth; ++l) {
    add("trunk." + std::to_string(l) + ".weight", w, l == 0 ? pos_dim : w);
    add("trunk." + std::to_string(l) + ".bias", w, 1);
  }
  add("hue.weight", 1, w);
  add("hue.bias", 1, 1);
  add("density.weight", 1, w);
  add("density.bias", 1, 1);
  add("sv_hidden.weight", cfg_.sv_width, w + dir_dim);
  add("sv_hidden.bias", cfg_.sv_width, 1);
  add("sv_out.weight", 2, cfg_.sv_width);
  add("sv_out.bias", 2, 1);
  params_ = VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

const TensorInfo& RadianceField::info(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  fail(ErrorCode::kInvalidArgument, "no tensor named '" + name + "'");
}

Map<MatrixXd> RadianceField::view(const TensorInfo& info, VectorXd& flat) {
  return Map<MatrixXd>(flat.data() + info.offset, info.rows, info.cols);
}

Map<const MatrixXd> RadianceField::view(int index) const {
  const auto& t = tensors_[static_cast<std::size_t>(index)];
  return Map<const MatrixXd>(params_.data() + t.offset, t.rows, t.cols);
}

Map<MatrixXd> RadianceField::tensor(const std::string& name) { return view(info(name), params_); }

Map<const MatrixXd> RadianceField::tensor(const std::string& name) const {
  const auto& t = info(name);
  return Map<const MatrixXd>(params_.data() + t.offset, t.rows, t.cols);
}

void RadianceField::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (const auto& t : tensors_) {
    const bool is_bias = t.cols == 1 && t.name.ends_with(".bias");
    if (is_bias) {
      params_.segment(static_cast<Eigen::Index>(t.offset), static_cast<Eigen::Index>(t.size())).setZero();
      continue;
    }
    const double bound = std::sqrt(6.0 / t.cols);
    for (std::size_t i = 0; i < t.size(); ++i) {
      params_(static_cast<Eigen::Index>(t.offset + i)) = bound * (2.0 * uniform01(rng) - 1.0);
    }
  }
}

void RadianceField::zero_output_layers() {
  for (int idx : {hue_weight(), density_weight(), sv_out_weight()}) {
    for (int k : {idx, idx + 1}) {
      const auto& t = tensors_[static_cast<std::size_t>(k)];
      params_.segment(static_cast<Eigen::Index>(t.offset), static_cast<Eigen::Index>(t.size())).setZero();
    }
  }
}

void RadianceField::check_finite() const {
  for (const auto& t : tensors_) {
    if (!params_.segment(static_cast<Eigen::Index>(t.offset), static_cast<Eigen::Index>(t.size())).allFinite()) {
      fail(ErrorCode::kNonFinite, "parameter tensor '" + t.name + "' is not finite");
    }
  }
}

FieldOutputs field_forward(const RadianceField& field, const Matrix3Xd& positions, const Matrix3Xd& directions,
                           FieldCache* cache) {
  const auto& cfg = field.config();
  const Eigen::Index p = positions.cols();
  if (directions.cols() != p) fail(ErrorCode::kDimensionMismatch, "positions and directions differ in count");
  FieldCache local;
  FieldCache& c = cache ? *cache : local;
  const int depth = cfg.trunk_depth;
  const int w = cfg.trunk_width;

  c.x_enc = positional_encoding(positions, cfg.encoding.l_pos, cfg.encoding.include_input);
  c.d_enc = positional_encoding(directions, cfg.encoding.l_dir, cfg.encoding.include_input);
  c.trunk.resize(static_cast<std::size_t>(depth));
  for (int l = 0; l < depth; ++l) {
    const MatrixXd& in = l == 0 ? c.x_enc : c.trunk[static_cast<std::size_t>(l - 1)];
    MatrixXd& z = c.trunk[static_cast<std::size_t>(l)];
    z.noalias() = field.view(field.trunk_weight(l)) * in;
    z.colwise() += field.view(field.trunk_bias(l)).col(0);
    relu_inplace(z);
  }
  const MatrixXd& last = c.trunk.back();
  const MatrixXd& tap = c.trunk[static_cast<std::size_t>(cfg.hue_tap - 1)];

  FieldOutputs out;
  RowVectorXd hue_pre = field.view(field.hue_weight()) * tap;
  hue_pre.array() += field.view(field.hue_weight() + 1)(0, 0);
  out.h = hue_pre.unaryExpr(&sigmoid);

  c.density_pre.noalias() = field.view(field.density_weight()) * last;
  c.density_pre.array() += field.view(field.density_weight() + 1)(0, 0);
  out.sigma = c.density_pre.unaryExpr(&softplus);

  const auto w_sv = field.view(field.sv_hidden_weight());
  c.sv_hidden.noalias() = w_sv.leftCols(w) * last;
  if (c.d_enc.rows() > 0) c.sv_hidden.noalias() += w_sv.rightCols(c.d_enc.rows()) * c.d_enc;
  c.sv_hidden.colwise() += field.view(field.sv_hidden_weight() + 1).col(0);
  relu_inplace(c.sv_hidden);

  MatrixXd sv_pre = field.view(field.sv_out_weight()) * c.sv_hidden;
  sv_pre.colwise() += field.view(field.sv_out_weight() + 1).col(0);
  out.s = sv_pre.row(0).unaryExpr(&sigmoid);
  out.v = sv_pre.row(1).unaryExpr(&sigmoid);
  return out;
}

FieldSample field_forward(const RadianceField& field, const Vector3d& x, const Vector3d& d) {
  if (std::abs(d.norm() - 1.0) > 1e-9) fail(ErrorCode::kInvalidArgument, "view direction must be unit length");
  field.check_finite();
  const auto out = field_forward(field, Matrix3Xd(x), Matrix3Xd(d));
  return {out.sigma(0), out.h(0), out.s(0), out.v(0)};
}

void field_backward(const RadianceField& field, const FieldCache& c, const FieldOutputs& out,
                    const FieldOutputs& d_out, VectorXd& grad) {
  const auto& cfg = field.config();
  const auto& tensors = field.tensors();
  if (grad.size() != field.parameters().size()) grad = VectorXd::Zero(field.parameters().size());
  auto g = [&](int index) { return RadianceField::view(tensors[static_cast<std::size_t>(index)], grad); };
  const int depth = cfg.trunk_depth;
  const int w = cfg.trunk_width;
  const MatrixXd& last = c.trunk.back();

  // Output activations.
  const RowVectorXd dz_sigma = d_out.sigma.array() * c.density_pre.unaryExpr(&sigmoid).array();
  const RowVectorXd dz_h = d_out.h.array() * out.h.array() * (1.0 - out.h.array());
  MatrixXd dz_sv(2, out.s.size());
  dz_sv.row(0) = d_out.s.array() * out.s.array() * (1.0 - out.s.array());
  dz_sv.row(1) = d_out.v.array() * out.v.array() * (1.0 - out.v.array());

  // S/V branch.
  g(field.sv_out_weight()).noalias() += dz_sv * c.sv_hidden.transpose();
  g(field.sv_out_weight() + 1) += dz_sv.rowwise().sum();
  MatrixXd d_svh = field.view(field.sv_out_weight()).transpose() * dz_sv;
  d_svh = d_svh.cwiseProduct((c.sv_hidden.array() > 0.0).cast<double>().matrix());
  auto g_sv = g(field.sv_hidden_weight());
  g_sv.leftCols(w).noalias() += d_svh * last.transpose();
  if (c.d_enc.rows() > 0) g_sv.rightCols(c.d_enc.rows()).noalias() += d_svh * c.d_enc.transpose();
  g(field.sv_hidden_weight() + 1) += d_svh.rowwise().sum();

  // Density head.
  g(field.density_weight()).noalias() += dz_sigma * last.transpose();
  g(field.density_weight() + 1)(0, 0) += dz_sigma.sum();

  MatrixXd dh = field.view(field.sv_hidden_weight()).leftCols(w).transpose() * d_svh;
  dh.noalias() += field.view(field.density_weight()).transpose() * dz_sigma;

  // Hue head.
  const MatrixXd& tap = c.trunk[static_cast<std::size_t>(cfg.hue_tap - 1)];
  g(field.hue_weight()).noalias() += dz_h * tap.transpose();
  g(field.hue_weight() + 1)(0, 0) += dz_h.sum();

  // Trunk.
  for (int l = depth - 1; l >= 0; --l) {
    if (l == cfg.hue_tap - 1) dh.noalias() += field.view(field.hue_weight()).transpose() * dz_h;
    const MatrixXd& act = c.trunk[static_cast<std::size_t>(l)];
    dh = dh.cwiseProduct((act.array() > 0.0).cast<double>().matrix());
    const MatrixXd& in = l == 0 ? c.x_enc : c.trunk[static_cast<std::size_t>(l - 1)];
    g(field.trunk_weight(l)).noalias() += dh * in.transpose();
    g(field.trunk_bias(l)) += dh.rowwise().sum();
    if (l > 0) dh = field.view(field.trunk_weight(l)).transpose() * dh;
  }
}

std::vector<double> stratified_sample(double near, double far, int n, Rng& rng) {
  if (!(near >= 0.0 && near < far) || n < 1) fail(ErrorCode::kInvalidArgument, "need 0 <= near < far and n >= 1");
  std::vector<double> t(static_cast<std::size_t>(n));
  const double step = (far - near) / n;
  for (int i = 0; i < n; ++i) {
    const double lo = near + i * step;
    const double hi = i + 1 == n ? far : near + (i + 1) * step;
    double v = lo + uniform01(rng) * (hi - lo);
    if (v >= hi) v = std::nextafter(hi, lo);
    t[static_cast<std::size_t>(i)] = v;
  }
  return t;
}

std::vector<double> midpoint_sample(double near, double far, int n) {
  if (!(near >= 0.0 && near < far) || n < 1) fail(ErrorCode::kInvalidArgument, "need 0 <= near < far and n >= 1");
  std::vector<double> t(static_cast<std::size_t>(n));
  const double step = (far - near) / n;
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = near + (i + 0.5) * step;
  return t;
}

namespace {

/// Per-ray compositing shared by the single-ray API and the batch paths.
template <typename Sigma, typename Delta, typename Weights, typename Trans>
double composite_weights(const Sigma& sigma, const Delta& delta, int n, Weights& weights, Trans& trans) {
  double optical = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sd = sigma[i] * delta[i];
    trans[i] = std::exp(-optical);
    weights[i] = trans[i] * -std::expm1(-sd);
    optical += sd;
  }
  trans[n] = std::exp(-optical);
  return trans[n];
}

}  // namespace

RenderResult volume_render_hsv(std::span<const double> sigma, std::span<const Vector3d> hsv,
                               std::span<const double> deltas) {
  const int n = static_cast<int>(sigma.size());
  if (hsv.size() != sigma.size() || deltas.size() != sigma.size()) {
    fail(ErrorCode::kDimensionMismatch, "sigma, colour and delta counts differ");
  }
  RenderResult r;
  r.weights.resize(static_cast<std::size_t>(n));
  r.transmittance.resize(static_cast<std::size_t>(n) + 1);
  composite_weights(sigma, deltas, n, r.weights, r.transmittance);
  for (int i = 0; i < n; ++i) {
    r.hsv += r.weights[static_cast<std::size_t>(i)] * hsv[static_cast<std::size_t>(i)];
    r.opacity += r.weights[static_cast<std::size_t>(i)];
  }
  return r;
}

double hue_loss(double pred, double gt) {
  const double d = std::abs(pred - gt);
  return std::min(d, 1.0 - d);
}

double hue_loss_grad(double pred, double gt) {
  const double d = pred - gt;
  const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  return std::abs(d) <= 0.5 ? sign : -sign;
}

LossTerms total_loss(const Matrix3Xd& pred, const Matrix3Xd& gt) {
  if (pred.cols() != gt.cols() || pred.cols() < 1) fail(ErrorCode::kDimensionMismatch, "loss needs matching non-empty batches");
  LossTerms terms;
  for (Eigen::Index r = 0; r < pred.cols(); ++r) {
    terms.hue += hue_loss(pred(0, r), gt(0, r));
    const double ds = pred(1, r) - gt(1, r);
    const double dv = pred(2, r) - gt(2, r);
    terms.sat += ds * ds;
    terms.val += dv * dv;
  }
  const double n = static_cast<double>(pred.cols());
  terms.hue /= n;
  terms.sat /= n;
  terms.val /= n;
  terms.total = terms.hue + terms.sat + terms.val;
  return terms;
}

Matrix3Xd RaySampleBatch::positions() const {
  const int n = samples();
  Matrix3Xd pos(3, static_cast<Eigen::Index>(rays()) * n);
  for (int r = 0; r < rays(); ++r) {
    for (int i = 0; i < n; ++i) pos.col(static_cast<Eigen::Index>(r) * n + i) = origins.col(r) + t_vals(i, r) * directions.col(r);
  }
  return pos;
}

void RaySampleBatch::validate() const {
  const int r = rays();
  if (directions.cols() != r || t_vals.cols() != r || deltas.cols() != r || deltas.rows() != t_vals.rows() ||
      (gt_hsv.cols() != 0 && gt_hsv.cols() != r)) {
    fail(ErrorCode::kDimensionMismatch, "ray batch arrays disagree in shape");
  }
  for (int k = 0; k < r; ++k) {
    if (std::abs(directions.col(k).norm() - 1.0) > 1e-9) fail(ErrorCode::kInvariant, "ray direction not unit length");
    for (int i = 0; i < samples(); ++i) {
      if (!(deltas(i, k) > 0.0)) fail(ErrorCode::kInvariant, "sample spacing must be positive");
      if (i > 0 && !(t_vals(i, k) > t_vals(i - 1, k))) fail(ErrorCode::kInvariant, "t values must increase");
    }
  }
}

void assign_samples(RaySampleBatch& batch, double near, double far, int n, Rng* rng) {
  const int r = batch.rays();
  batch.t_vals.resize(n, r);
  batch.deltas.resize(n, r);
  const std::vector<double> mid = rng ? std::vector<double>{} : midpoint_sample(near, far, n);
  for (int k = 0; k < r; ++k) {
    const std::vector<double> t = rng ? stratified_sample(near, far, n, *rng) : mid;
    for (int i = 0; i < n; ++i) {
      batch.t_vals(i, k) = t[static_cast<std::size_t>(i)];
      batch.deltas(i, k) = (i + 1 < n ? t[static_cast<std::size_t>(i + 1)] : far) - t[static_cast<std::size_t>(i)];
    }
  }
}

namespace {

Matrix3Xd repeat_directions(const RaySampleBatch& batch) {
  const int n = batch.samples();
  Matrix3Xd dirs(3, static_cast<Eigen::Index>(batch.rays()) * n);
  for (int r = 0; r < batch.rays(); ++r) {
    dirs.middleCols(static_cast<Eigen::Index>(r) * n, n) = batch.directions.col(r).replicate(1, n);
  }
  return dirs;
}

}  // namespace

BatchRender render_batch(const RadianceField& field, const RaySampleBatch& batch) {
  const int n = batch.samples();
  const int rays = batch.rays();
  const auto out = field_forward(field, batch.positions(), repeat_directions(batch));
  BatchRender result{Matrix3Xd::Zero(3, rays), RowVectorXd::Zero(rays)};
  std::vector<double> weights(static_cast<std::size_t>(n)), trans(static_cast<std::size_t>(n) + 1);
  for (int r = 0; r < rays; ++r) {
    const Eigen::Index base = static_cast<Eigen::Index>(r) * n;
    composite_weights(out.sigma.data() + base, batch.deltas.col(r).data(), n, weights, trans);
    for (int i = 0; i < n; ++i) {
      const double wi = weights[static_cast<std::size_t>(i)];
      result.hsv.col(r) += wi * Vector3d(out.h(base + i), out.s(base + i), out.v(base + i));
      result.opacity(r) += wi;
    }
  }
  return result;
}

StepResult backward(const RadianceField& field, const RaySampleBatch& batch) {
  const int n = batch.samples();
  const int rays = batch.rays();
  if (batch.gt_hsv.cols() != rays) fail(ErrorCode::kDimensionMismatch, "batch lacks ground truth");
  FieldCache cache;
  const auto out = field_forward(field, batch.positions(), repeat_directions(batch), &cache);

  StepResult step;
  step.rendered = Matrix3Xd::Zero(3, rays);
  std::vector<double> weights(static_cast<std::size_t>(n) * rays), trans(static_cast<std::size_t>(n) + 1);
  std::vector<double> trans_next(static_cast<std::size_t>(n) * rays);
  for (int r = 0; r < rays; ++r) {
    const Eigen::Index base = static_cast<Eigen::Index>(r) * n;
    double* w = weights.data() + base;
    composite_weights(out.sigma.data() + base, batch.deltas.col(r).data(), n, w, trans);
    for (int i = 0; i < n; ++i) {
      trans_next[static_cast<std::size_t>(base + i)] = trans[static_cast<std::size_t>(i) + 1];
      step.rendered.col(r) += w[i] * Vector3d(out.h(base + i), out.s(base + i), out.v(base + i));
    }
  }
  step.loss = total_loss(step.rendered, batch.gt_hsv);

  const Eigen::Index points = static_cast<Eigen::Index>(rays) * n;
  FieldOutputs d_out{RowVectorXd::Zero(points), RowVectorXd::Zero(points), RowVectorXd::Zero(points),
                     RowVectorXd::Zero(points)};
  const double inv_n = 1.0 / rays;
  for (int r = 0; r < rays; ++r) {
    const Vector3d dc(hue_loss_grad(step.rendered(0, r), batch.gt_hsv(0, r)) * inv_n,
                      2.0 * (step.rendered(1, r) - batch.gt_hsv(1, r)) * inv_n,
                      2.0 * (step.rendered(2, r) - batch.gt_hsv(2, r)) * inv_n);
    const Eigen::Index base = static_cast<Eigen::Index>(r) * n;
    double suffix = 0.0;  // sum_{i > k} w_i (dc . c_i)
    for (int k = n - 1; k >= 0; --k) {
      const Eigen::Index p = base + k;
      const double wk = weights[static_cast<std::size_t>(p)];
      const double gc = dc(0) * out.h(p) + dc(1) * out.s(p) + dc(2) * out.v(p);
      d_out.h(p) = wk * dc(0);
      d_out.s(p) = wk * dc(1);
      d_out.v(p) = wk * dc(2);
      d_out.sigma(p) = batch.deltas(k, r) * (trans_next[static_cast<std::size_t>(p)] * gc - suffix);
      suffix += wk * gc;
    }
  }

  step.gradient = VectorXd::Zero(field.parameters().size());
  field_backward(field, cache, out, d_out, step.gradient);
  for (const auto& t : field.tensors()) {
    if (!step.gradient.segment(static_cast<Eigen::Index>(t.offset), static_cast<Eigen::Index>(t.size())).allFinite()) {
      fail(ErrorCode::kNonFinite, "gradient of '" + t.name + "' is not finite");
    }
  }
  return step;
}

}  // namespace texnerf::nerf
