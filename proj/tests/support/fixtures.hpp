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

// Small on-disk datasets and configs shared by the trainer/eval/cli tests.
#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>

#include "texnerf/scenesynth.hpp"
#include "texnerf/trainer.hpp"

namespace testsupport {

/// Reference scene rendered from `views` orbit poses at size x size, written
/// once per process under the temp dir and removed at exit.
class SmallDataset {
 public:
  SmallDataset(int views, int size, const std::string& tag) {
    root_ = std::filesystem::temp_directory_path() /
            ("texnerf_ds_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(root_);
    const auto poses = texnerf::scenesynth::generate_orbit_poses(views, 2.0, 55.0, Eigen::Vector3d(0, 0, 0.15), size,
                                                                 size, 0.7);
    texnerf::scenesynth::EmitOptions opt;
    opt.write_png = false;
    texnerf::scenesynth::emit_dataset(texnerf::scenesynth::reference_scene(), poses,
                                      texnerf::scenesynth::reference_library(), root_, opt);
  }
  ~SmallDataset() {
    std::error_code ec;
    std::filesystem::remove_all(root_, ec);
  }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

/// Nine 16x16 views; view 7 is held out with the default stride.
inline const SmallDataset& nine_views() {
  static const SmallDataset data(9, 16, "nine");
  return data;
}

inline texnerf::trainer::TrainConfig tiny_train_config() {
  texnerf::trainer::TrainConfig cfg;
  cfg.iterations = 20;
  cfg.batch_rays = 64;
  cfg.samples_per_ray = 8;
  cfg.near = 1.0;
  cfg.far = 3.6;
  cfg.learning_rate = 5e-3;
  cfg.learning_rate_final = 5e-4;
  cfg.seed = 3;
  cfg.log_every = 5;
  cfg.checkpoint_every = 10;
  cfg.holdout_eval_every = 10;
  cfg.field.trunk_depth = 2;
  cfg.field.trunk_width = 16;
  cfg.field.hue_tap = 1;
  cfg.field.sv_width = 8;
  cfg.field.encoding.l_pos = 4;
  cfg.field.encoding.l_dir = 2;
  return cfg;
}

}  // namespace testsupport
