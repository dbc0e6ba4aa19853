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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "texnerf/rng.hpp"

namespace texnerf::nerf {

struct EncodingConfig {
  int l_pos = 10;
  int l_dir = 4;
  bool include_input = true;
};

/// Output length 3 * (include_input + 2 * levels).
int encoded_size(int levels, bool include_input);

/// [x, sin(2^j pi x), cos(2^j pi x) for j < levels], each block per component.
Eigen::VectorXd positional_encoding(const Eigen::Vector3d& x, int levels, bool include_input);

/// d(encoding)/dx, encoded_size x 3.
Eigen::MatrixXd positional_encoding_jacobian(const Eigen::Vector3d& x, int levels, bool include_input);

/// Column-wise encoding of a 3 x P matrix.
Eigen::MatrixXd positional_encoding(const Eigen::Matrix3Xd& x, int levels, bool include_input);

/// Trunk of `trunk_depth` ReLU layers; hue taps trunk layer `hue_tap`
/// (1-based); density and the view-conditioned S/V branch read the last layer.
struct FieldConfig {
  EncodingConfig encoding;
  int trunk_depth = 4;
  int trunk_width = 128;
  int hue_tap = 2;
  int sv_width = 64;

  void validate() const;
};

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// MLP parameters stored as one flat vector with named column-major views.
class RadianceField {
 public:
  explicit RadianceField(const FieldConfig& cfg = {});

  const FieldConfig& config() const { return cfg_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  const TensorInfo& info(const std::string& name) const;
  Eigen::Map<Eigen::MatrixXd> tensor(const std::string& name);
  Eigen::Map<const Eigen::MatrixXd> tensor(const std::string& name) const;

  /// Weights uniform in +-sqrt(6 / fan_in), biases zero.
  void initialize(std::uint64_t seed);
  /// Zeroes the hue, density and S/V output layers.
  void zero_output_layers();
  /// Throws kNonFinite naming the first offending tensor.
  void check_finite() const;

  // Tensor indices, fixed by construction.
  int trunk_weight(int layer) const { return 2 * layer; }
  int trunk_bias(int layer) const { return 2 * layer + 1; }
  int hue_weight() const { return 2 * cfg_.trunk_depth; }
  int density_weight() const { return 2 * cfg_.trunk_depth + 2; }
  int sv_hidden_weight() const { return 2 * cfg_.trunk_depth + 4; }
  int sv_out_weight() const { return 2 * cfg_.trunk_depth + 6; }
  Eigen::Map<const Eigen::MatrixXd> view(int index) const;
  static Eigen::Map<Eigen::MatrixXd> view(const TensorInfo& info, Eigen::VectorXd& flat);

 private:
  FieldConfig cfg_;
  std::vector<TensorInfo> tensors_;
  Eigen::VectorXd params_;
};

struct FieldSample {
  double sigma;
  double h;
  double s;
  double v;
};

/// Per-point outputs for a batch, each row-vector of length P.
struct FieldOutputs {
  Eigen::RowVectorXd sigma, h, s, v;
};

/// Activations kept for the backward pass.
struct FieldCache {
  Eigen::MatrixXd x_enc;
  Eigen::MatrixXd d_enc;
  std::vector<Eigen::MatrixXd> trunk;  // post-ReLU outputs
  Eigen::RowVectorXd density_pre;
  Eigen::MatrixXd sv_hidden;           // post-ReLU
};

FieldOutputs field_forward(const RadianceField& field, const Eigen::Matrix3Xd& positions,
                           const Eigen::Matrix3Xd& directions, FieldCache* cache = nullptr);

/// Single point; d must be unit length. Throws kNonFinite on bad parameters.
FieldSample field_forward(const RadianceField& field, const Eigen::Vector3d& x, const Eigen::Vector3d& d);

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(outputs).
void field_backward(const RadianceField& field, const FieldCache& cache, const FieldOutputs& out,
                    const FieldOutputs& d_out, Eigen::VectorXd& grad);

/// Stratified depths: one uniform draw per bin of [near, far). Strictly increasing.
std::vector<double> stratified_sample(double near, double far, int n, Rng& rng);
/// Bin midpoints (deterministic inference).
std::vector<double> midpoint_sample(double near, double far, int n);

struct RenderResult {
  Eigen::Vector3d hsv = Eigen::Vector3d::Zero();
  std::vector<double> weights;
  std::vector<double> transmittance;  // N + 1 entries; the last is the escape probability
  double opacity = 0.0;
};

/// C = sum_i T_i (1 - exp(-sigma_i delta_i)) c_i, zero background.
RenderResult volume_render_hsv(std::span<const double> sigma, std::span<const Eigen::Vector3d> hsv,
                               std::span<const double> deltas);

/// min(|d|, 1 - |d|) with d = pred - gt.
double hue_loss(double pred, double gt);
/// d(hue_loss)/d(pred); the tie |d| = 0.5 takes the unwrapped branch.
double hue_loss_grad(double pred, double gt);

struct LossTerms {
  double total = 0.0;
  double hue = 0.0;
  double sat = 0.0;
  double val = 0.0;
};

/// Mean over rays of hue_loss + (S - S_gt)^2 + (V - V_gt)^2. Columns are rays.
LossTerms total_loss(const Eigen::Matrix3Xd& pred, const Eigen::Matrix3Xd& gt);

struct RaySampleBatch {
  Eigen::Matrix3Xd origins;
  Eigen::Matrix3Xd directions;
  Eigen::MatrixXd t_vals;  // N x R
  Eigen::MatrixXd deltas;  // N x R, last = far - t_N
  Eigen::Matrix3Xd gt_hsv;

  int rays() const { return static_cast<int>(origins.cols()); }
  int samples() const { return static_cast<int>(t_vals.rows()); }
  /// 3 x (R * N), ray-major.
  Eigen::Matrix3Xd positions() const;
  void validate() const;
};

/// Fills t_vals and deltas for every ray; stratified when rng is given, else midpoints.
void assign_samples(RaySampleBatch& batch, double near, double far, int n, Rng* rng);

struct BatchRender {
  Eigen::Matrix3Xd hsv;        // per ray
  Eigen::RowVectorXd opacity;  // per ray
};

/// Forward-only rendering of every ray in the batch.
BatchRender render_batch(const RadianceField& field, const RaySampleBatch& batch);

struct StepResult {
  LossTerms loss;
  Eigen::VectorXd gradient;
  Eigen::Matrix3Xd rendered;
};

/// Forward pass, loss and exact reverse-mode gradient for all parameters.
/// Throws kNonFinite naming the tensor if a gradient entry is not finite.
StepResult backward(const RadianceField& field, const RaySampleBatch& batch);

/// Named tensors plus configs and RNG state. The format is versioned binary:
/// magic line, header JSON, then raw little-endian doubles in header order.
struct NamedTensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
};

struct Checkpoint {
  FieldConfig field;
  Eigen::VectorXd parameters;
  std::vector<NamedTensor> extra;  // e.g. optimizer moments
  std::string rng_state;
  std::string run_config;          // opaque JSON text owned by the caller
  std::uint64_t iteration = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Rebuilds a field from a checkpoint, validating tensor shapes.
RadianceField field_from_checkpoint(const Checkpoint& ckpt);

}  // namespace texnerf::nerf
