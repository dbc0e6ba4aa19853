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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "texnerf/nerf.hpp"
#include "texnerf/pseudotex.hpp"
#include "texnerf/rng.hpp"
#include "texnerf/scenesynth.hpp"

namespace texnerf::trainer {

/// Field names double as config-file keys.
struct TrainConfig {
  int iterations = 2000;
  int batch_rays = 1024;
  int samples_per_ray = 64;
  double near = 1.0;
  double far = 4.5;
  double learning_rate = 5e-4;
  double learning_rate_final = 5e-5;
  std::uint64_t seed = 0;
  int log_every = 100;
  int checkpoint_every = 1000;
  int holdout_eval_every = 100;  // 0 disables held-out PSNR during training
  int holdout_stride = 8;        // views with (index + 1) % stride == 0 are held out
  bool zero_init_heads = false;  // start hue, density and S/V output layers at zero
  nerf::FieldConfig field;

  void validate() const;
  /// Exponential decay from learning_rate to learning_rate_final over the run.
  double learning_rate_at(int iteration) const;
};

std::string to_json(const TrainConfig& cfg);
/// Unknown keys are rejected with kInvalidArgument.
TrainConfig train_config_from_json(const std::string& json_text, const TrainConfig& defaults = {});

struct OptimizerState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t step = 0;

  explicit OptimizerState(Eigen::Index size = 0) : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}
};

/// Bias-corrected adaptive-moment update. Throws kNonFinite if the update is not finite.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, OptimizerState& state, double lr);

struct PosedImage {
  std::size_t index = 0;  // frame index in transforms.json
  scenesynth::CameraModel camera;
  pseudotex::HsvImage hsv;
  std::filesystem::path image_path;
  std::filesystem::path tex_path;    // empty when the frame carries no ground truth
  std::filesystem::path depth_path;
};

struct Dataset {
  std::filesystem::path root;
  std::vector<PosedImage> train;
  std::vector<PosedImage> holdout;
  pseudotex::MappingMetadata meta;

  std::size_t train_pixels() const;
};

bool is_holdout(std::size_t index, int stride);
Dataset load_dataset(const std::filesystem::path& root, int holdout_stride = 8);

/// Pinhole ray through the centre of pixel (u, v). Throws kOutOfBounds outside the image.
scenesynth::Ray generate_rays(const scenesynth::CameraModel& cam, int u, int v);

/// Uniform draw of cfg.batch_rays distinct (view, pixel) pairs plus stratified depths.
nerf::RaySampleBatch sample_batch(const std::vector<PosedImage>& views, const TrainConfig& cfg, Rng& rng);

struct LogRow {
  int iteration = 0;
  double loss = 0.0;
  double loss_h = 0.0;
  double loss_s = 0.0;
  double loss_v = 0.0;
  double psnr_holdout = 0.0;  // NaN when not evaluated at this row
};

struct TrainResult {
  nerf::RadianceField field;
  std::vector<double> losses;  // one per iteration run
  std::vector<LogRow> log;
  std::filesystem::path final_checkpoint;
};

/// Runs sample_batch -> backward -> adam_step. Writes metrics.csv,
/// config.json and checkpoints/ckpt_NNNNNN.bin under out_dir. When `resume`
/// is given the run continues from that checkpoint's iteration, optimizer
/// moments and RNG state.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const std::filesystem::path& out_dir,
                  const std::optional<std::filesystem::path>& resume = std::nullopt);

/// Latest checkpoint in `dir/checkpoints` (or `dir` itself if it is a file).
std::filesystem::path resolve_checkpoint(const std::filesystem::path& path);

/// Field plus training config stored in a checkpoint.
struct LoadedModel {
  nerf::RadianceField field;
  TrainConfig config;
};
LoadedModel load_model(const std::filesystem::path& checkpoint);

}  // namespace texnerf::trainer
