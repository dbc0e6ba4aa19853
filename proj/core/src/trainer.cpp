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

#include "texnerf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "json_util.hpp"
#include "texnerf/error.hpp"
#include "texnerf/eval.hpp"
#include "texnerf/image.hpp"

namespace texnerf::trainer {

namespace fs = std::filesystem;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

detail::OrderedJson config_json(const TrainConfig& c) {
  detail::OrderedJson j;
  j["iterations"] = c.iterations;
  j["batch_rays"] = c.batch_rays;
  j["samples_per_ray"] = c.samples_per_ray;
  j["near"] = c.near;
  j["far"] = c.far;
  j["learning_rate"] = c.learning_rate;
  j["learning_rate_final"] = c.learning_rate_final;
  j["seed"] = c.seed;
  j["log_every"] = c.log_every;
  j["checkpoint_every"] = c.checkpoint_every;
  j["holdout_eval_every"] = c.holdout_eval_every;
  j["holdout_stride"] = c.holdout_stride;
  j["zero_init_heads"] = c.zero_init_heads;
  j["l_pos"] = c.field.encoding.l_pos;
  j["l_dir"] = c.field.encoding.l_dir;
  j["include_input"] = c.field.encoding.include_input;
  j["trunk_depth"] = c.field.trunk_depth;
  j["trunk_width"] = c.field.trunk_width;
  j["hue_tap"] = c.field.hue_tap;
  j["sv_width"] = c.field.sv_width;
  return j;
}

template <typename T>
void assign(const detail::Json& j, const std::string& key, T& dst) {
  try {
    dst = j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, "train config key '" + key + "': " + e.what());
  }
}

std::string checkpoint_name(int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06d.bin", iteration);
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

nerf::Checkpoint make_checkpoint(const nerf::RadianceField& field, const OptimizerState& opt, const Rng& rng,
                                 const TrainConfig& cfg, int iteration) {
  nerf::Checkpoint ck;
  ck.field = field.config();
  ck.parameters = field.parameters();
  const int n = static_cast<int>(opt.m.size());
  ck.extra.push_back({"adam_m", n, 1, std::vector<double>(opt.m.data(), opt.m.data() + n)});
  ck.extra.push_back({"adam_v", n, 1, std::vector<double>(opt.v.data(), opt.v.data() + n)});
  ck.extra.push_back({"adam_step", 1, 1, {static_cast<double>(opt.step)}});
  ck.rng_state = rng_state(rng);
  ck.run_config = to_json(cfg);
  ck.iteration = static_cast<std::uint64_t>(iteration);
  return ck;
}

const nerf::NamedTensor& find_extra(const nerf::Checkpoint& ck, const std::string& name, std::size_t size) {
  for (const auto& t : ck.extra) {
    if (t.name == name) {
      if (t.values.size() != size) fail(ErrorCode::kDimensionMismatch, "checkpoint tensor '" + name + "' has wrong size");
      return t;
    }
  }
  fail(ErrorCode::kParse, "checkpoint lacks tensor '" + name + "'");
}

double holdout_psnr(const nerf::RadianceField& field, const Dataset& data, const TrainConfig& cfg) {
  if (data.holdout.empty()) return std::numeric_limits<double>::quiet_NaN();
  const eval::RenderConfig rc{cfg.near, cfg.far, cfg.samples_per_ray};
  double sum = 0.0;
  for (const auto& view : data.holdout) sum += eval::psnr(eval::render_view(field, view.camera, rc), view.hsv);
  return sum / static_cast<double>(data.holdout.size());
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::kInvalidArgument, "train config: " + what);
  };
  require(iterations >= 0, "iterations must be >= 0");
  require(batch_rays > 0, "batch_rays must be > 0");
  require(samples_per_ray > 0, "samples_per_ray must be > 0");
  require(std::isfinite(near) && std::isfinite(far) && near >= 0.0 && far > near, "need 0 <= near < far");
  require(learning_rate > 0.0 && learning_rate_final > 0.0, "learning rates must be > 0");
  require(log_every > 0, "log_every must be > 0");
  require(checkpoint_every >= 0, "checkpoint_every must be >= 0");
  require(holdout_eval_every >= 0, "holdout_eval_every must be >= 0");
  require(holdout_stride >= 2, "holdout_stride must be >= 2");
  field.validate();
}

double TrainConfig::learning_rate_at(int iteration) const {
  const double frac = iterations > 0 ? static_cast<double>(iteration) / iterations : 0.0;
  return learning_rate * std::pow(learning_rate_final / learning_rate, frac);
}

std::string to_json(const TrainConfig& cfg) { return config_json(cfg).dump(); }

TrainConfig train_config_from_json(const std::string& json_text, const TrainConfig& defaults) {
  detail::Json j;
  try {
    j = detail::Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("train config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "train config must be a JSON object");
  TrainConfig c = defaults;
  for (const auto& [key, value] : j.items()) {
    if (key == "iterations") assign(value, key, c.iterations);
    else if (key == "batch_rays") assign(value, key, c.batch_rays);
    else if (key == "samples_per_ray") assign(value, key, c.samples_per_ray);
    else if (key == "near") assign(value, key, c.near);
    else if (key == "far") assign(value, key, c.far);
    else if (key == "learning_rate") assign(value, key, c.learning_rate);
    else if (key == "learning_rate_final") assign(value, key, c.learning_rate_final);
    else if (key == "seed") assign(value, key, c.seed);
    else if (key == "log_every") assign(value, key, c.log_every);
    else if (key == "checkpoint_every") assign(value, key, c.checkpoint_every);
    else if (key == "holdout_eval_every") assign(value, key, c.holdout_eval_every);
    else if (key == "holdout_stride") assign(value, key, c.holdout_stride);
    else if (key == "zero_init_heads") assign(value, key, c.zero_init_heads);
    else if (key == "l_pos") assign(value, key, c.field.encoding.l_pos);
    else if (key == "l_dir") assign(value, key, c.field.encoding.l_dir);
    else if (key == "include_input") assign(value, key, c.field.encoding.include_input);
    else if (key == "trunk_depth") assign(value, key, c.field.trunk_depth);
    else if (key == "trunk_width") assign(value, key, c.field.trunk_width);
    else if (key == "hue_tap") assign(value, key, c.field.hue_tap);
    else if (key == "sv_width") assign(value, key, c.field.sv_width);
    else fail(ErrorCode::kInvalidArgument, "unknown train config key '" + key + "'");
  }
  return c;
}

void adam_step(VectorXd& params, const VectorXd& grads, OptimizerState& state, double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    fail(ErrorCode::kDimensionMismatch, "adam_step: parameter, gradient and moment sizes differ");
  }
  if (!grads.allFinite()) fail(ErrorCode::kNonFinite, "adam_step: non-finite gradient");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail(ErrorCode::kInvalidArgument, "adam_step: learning rate must be > 0");
  using S = OptimizerState;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(S::kBeta1, t);
  const double c2 = 1.0 - std::pow(S::kBeta2, t);
  state.m = S::kBeta1 * state.m + (1.0 - S::kBeta1) * grads;
  state.v = S::kBeta2 * state.v + (1.0 - S::kBeta2) * grads.cwiseProduct(grads);
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + S::kEpsilon);
  if (!params.allFinite()) fail(ErrorCode::kNonFinite, "adam_step: parameters became non-finite");
}

std::size_t Dataset::train_pixels() const {
  std::size_t n = 0;
  for (const auto& v : train) n += static_cast<std::size_t>(v.camera.width) * v.camera.height;
  return n;
}

bool is_holdout(std::size_t index, int stride) { return stride > 0 && (index + 1) % static_cast<std::size_t>(stride) == 0; }

Dataset load_dataset(const fs::path& root, int holdout_stride) {
  if (holdout_stride < 2) fail(ErrorCode::kInvalidArgument, "holdout_stride must be >= 2");
  const auto tf_path = root / "transforms.json";
  const auto tf = detail::read_json(tf_path);
  const std::string ctx = tf_path.string();
  const double angle = detail::get_field<double>(tf, "camera_angle_x", ctx);
  const auto& frames = tf.contains("frames") ? tf.at("frames") : detail::Json();
  if (!frames.is_array() || frames.empty()) fail(ErrorCode::kParse, ctx + ": 'frames' must be a non-empty array");

  Dataset data;
  data.root = root;
  bool have_meta = false;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    const std::string fctx = ctx + " frame " + std::to_string(i);
    PosedImage view;
    view.index = i;
    view.image_path = root / detail::get_field<std::string>(f, "file_path", fctx);
    const auto rows = detail::get_field<std::vector<std::vector<double>>>(f, "transform_matrix", fctx);
    if (rows.size() != 4) fail(ErrorCode::kParse, fctx + ": transform_matrix must be 4x4");
    Eigen::Matrix4d c2w;
    for (int r = 0; r < 4; ++r) {
      if (rows[r].size() != 4) fail(ErrorCode::kParse, fctx + ": transform_matrix must be 4x4");
      for (int c = 0; c < 4; ++c) c2w(r, c) = rows[r][c];
    }
    view.hsv = read_pfm(view.image_path);
    if (view.hsv.channels() != 3) fail(ErrorCode::kDimensionMismatch, fctx + ": image must have 3 channels");
    view.camera = scenesynth::CameraModel::from_fov(view.hsv.width(), view.hsv.height(), angle, c2w);
    if (f.contains("tex")) view.tex_path = root / f.at("tex").get<std::string>();
    if (f.contains("depth")) view.depth_path = root / f.at("depth").get<std::string>();

    const auto meta = pseudotex::load_metadata(pseudotex::metadata_path(view.image_path));
    if (!have_meta) {
      data.meta = meta;
      have_meta = true;
    } else if (meta.t_min != data.meta.t_min || meta.t_max != data.meta.t_max || meta.x_min != data.meta.x_min ||
               meta.x_max != data.meta.x_max || meta.palette != data.meta.palette) {
      fail(ErrorCode::kInvariant, fctx + ": mapping metadata differs from frame 0");
    }
    (is_holdout(i, holdout_stride) ? data.holdout : data.train).push_back(std::move(view));
  }
  if (data.train.empty()) fail(ErrorCode::kInvalidArgument, ctx + ": no training views after the held-out split");
  return data;
}

scenesynth::Ray generate_rays(const scenesynth::CameraModel& cam, int u, int v) {
  if (u < 0 || v < 0 || u >= cam.width || v >= cam.height) {
    fail(ErrorCode::kOutOfBounds, "pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside " +
                                      std::to_string(cam.width) + "x" + std::to_string(cam.height) + " image");
  }
  return scenesynth::camera_ray(cam, u + 0.5, v + 0.5);
}

nerf::RaySampleBatch sample_batch(const std::vector<PosedImage>& views, const TrainConfig& cfg, Rng& rng) {
  std::vector<std::size_t> offsets{0};
  for (const auto& v : views) offsets.push_back(offsets.back() + static_cast<std::size_t>(v.camera.width) * v.camera.height);
  const std::size_t total = offsets.back();
  const auto r = static_cast<std::size_t>(cfg.batch_rays);
  if (total == 0) fail(ErrorCode::kInvalidArgument, "sample_batch: no training pixels");
  if (r > total) fail(ErrorCode::kInvalidArgument, "sample_batch: batch_rays exceeds the number of training pixels");

  nerf::RaySampleBatch batch;
  batch.origins.resize(3, cfg.batch_rays);
  batch.directions.resize(3, cfg.batch_rays);
  batch.gt_hsv.resize(3, cfg.batch_rays);
  std::unordered_set<std::size_t> seen;
  seen.reserve(r * 2);
  for (std::size_t k = 0; k < r;) {
    const std::size_t g = uniform_index(rng, total);
    if (!seen.insert(g).second) continue;
    const auto vi = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), g) - offsets.begin()) - 1;
    const auto& view = views[vi];
    const std::size_t local = g - offsets[vi];
    const int u = static_cast<int>(local % view.camera.width);
    const int v = static_cast<int>(local / view.camera.width);
    const auto ray = generate_rays(view.camera, u, v);
    const auto col = static_cast<Eigen::Index>(k);
    batch.origins.col(col) = ray.origin;
    batch.directions.col(col) = ray.direction;
    for (int c = 0; c < 3; ++c) batch.gt_hsv(c, col) = view.hsv(u, v, c);
    ++k;
  }
  nerf::assign_samples(batch, cfg.near, cfg.far, cfg.samples_per_ray, &rng);
  return batch;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, const fs::path& out_dir,
                  const std::optional<fs::path>& resume) {
  cfg.validate();
  const fs::path ckpt_dir = out_dir / "checkpoints";
  std::error_code ec;
  fs::create_directories(ckpt_dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + ckpt_dir.string() + ": " + ec.message());

  TrainResult result{nerf::RadianceField(cfg.field), {}, {}, {}};
  nerf::RadianceField& field = result.field;
  OptimizerState opt(static_cast<Eigen::Index>(field.parameter_count()));
  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  int start = 0;

  if (resume) {
    const auto ck = nerf::load_checkpoint(*resume);
    field = nerf::field_from_checkpoint(ck);
    if (field.parameter_count() != nerf::RadianceField(cfg.field).parameter_count()) {
      fail(ErrorCode::kDimensionMismatch, "resume: checkpoint field shape differs from the train config");
    }
    const auto n = field.parameter_count();
    opt = OptimizerState(static_cast<Eigen::Index>(n));
    const auto& m = find_extra(ck, "adam_m", n);
    const auto& v = find_extra(ck, "adam_v", n);
    opt.m = Eigen::Map<const VectorXd>(m.values.data(), static_cast<Eigen::Index>(n));
    opt.v = Eigen::Map<const VectorXd>(v.values.data(), static_cast<Eigen::Index>(n));
    opt.step = static_cast<std::uint64_t>(find_extra(ck, "adam_step", 1).values[0]);
    set_rng_state(rng, ck.rng_state);
    start = static_cast<int>(ck.iteration);
    if (start > cfg.iterations) fail(ErrorCode::kInvalidArgument, "resume: checkpoint is past the requested iterations");
    result.final_checkpoint = *resume;
  } else {
    field.initialize(cfg.seed);
    if (cfg.zero_init_heads) field.zero_output_layers();
    result.final_checkpoint = ckpt_dir / checkpoint_name(0);
    nerf::save_checkpoint(result.final_checkpoint, make_checkpoint(field, opt, rng, cfg, 0));
  }
  detail::write_json(out_dir / "config.json", config_json(cfg));

  const fs::path csv_path = out_dir / "metrics.csv";
  const bool append = resume.has_value() && fs::exists(csv_path);
  std::ofstream csv(csv_path, append ? std::ios::app : std::ios::trunc);
  if (!csv) fail(ErrorCode::kIo, "cannot write " + csv_path.string());
  if (!append) csv << "iter,loss,loss_h,loss_s,loss_v,psnr_holdout\n";

  auto abort_run = [&](int iteration, const std::string& why) {
    fail(ErrorCode::kNonFinite, "training diverged at iteration " + std::to_string(iteration) + " (" + why +
                                    "); last good checkpoint: " + result.final_checkpoint.string());
  };

  nerf::LossTerms window{};
  int window_count = 0;
  for (int it = start; it < cfg.iterations; ++it) {
    const auto batch = sample_batch(data.train, cfg, rng);
    nerf::StepResult step;
    std::string failure;
    try {
      step = nerf::backward(field, batch);
      if (!std::isfinite(step.loss.total)) failure = "non-finite loss";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFinite) throw;
      failure = e.what();
    }
    if (failure.empty()) {
      VectorXd trial = field.parameters();
      OptimizerState trial_opt = opt;
      try {
        adam_step(trial, step.gradient, trial_opt, cfg.learning_rate_at(it));
        field.parameters() = std::move(trial);
        opt = std::move(trial_opt);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite) throw;
        failure = e.what();
      }
    }
    if (!failure.empty()) abort_run(it + 1, failure);
    result.losses.push_back(step.loss.total);
    window.total += step.loss.total;
    window.hue += step.loss.hue;
    window.sat += step.loss.sat;
    window.val += step.loss.val;
    ++window_count;

    const int done = it + 1;
    if (done % cfg.log_every == 0 || done == cfg.iterations) {
      LogRow row;
      row.iteration = done;
      row.loss = window.total / window_count;
      row.loss_h = window.hue / window_count;
      row.loss_s = window.sat / window_count;
      row.loss_v = window.val / window_count;
      const bool eval_now = cfg.holdout_eval_every > 0 && (done % cfg.holdout_eval_every == 0 || done == cfg.iterations);
      row.psnr_holdout = eval_now ? holdout_psnr(field, data, cfg) : std::numeric_limits<double>::quiet_NaN();
      csv << row.iteration << ',' << format_double(row.loss) << ',' << format_double(row.loss_h) << ','
          << format_double(row.loss_s) << ',' << format_double(row.loss_v) << ',' << format_double(row.psnr_holdout)
          << '\n';
      csv.flush();
      result.log.push_back(row);
      window = {};
      window_count = 0;
    }
    if ((cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) || done == cfg.iterations) {
      result.final_checkpoint = ckpt_dir / checkpoint_name(done);
      nerf::save_checkpoint(result.final_checkpoint, make_checkpoint(field, opt, rng, cfg, done));
    }
  }
  return result;
}

fs::path resolve_checkpoint(const fs::path& path) {
  if (fs::is_regular_file(path)) return path;
  fs::path dir = path;
  if (fs::is_directory(path / "checkpoints")) dir = path / "checkpoints";
  if (!fs::is_directory(dir)) fail(ErrorCode::kIo, "no checkpoint at " + path.string());
  fs::path best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("ckpt_", 0) == 0 && entry.path().extension() == ".bin" && (best.empty() || name > best.filename().string())) {
      best = entry.path();
    }
  }
  if (best.empty()) fail(ErrorCode::kIo, "no ckpt_*.bin under " + dir.string());
  return best;
}

LoadedModel load_model(const fs::path& checkpoint) {
  const auto ck = nerf::load_checkpoint(resolve_checkpoint(checkpoint));
  LoadedModel model{nerf::field_from_checkpoint(ck), {}};
  model.config = ck.run_config.empty() ? TrainConfig{} : train_config_from_json(ck.run_config);
  model.config.field = ck.field;
  return model;
}

}  // namespace texnerf::trainer
