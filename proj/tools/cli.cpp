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

#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "texnerf/error.hpp"
#include "texnerf/eval.hpp"
#include "texnerf/image.hpp"
#include "texnerf/parallel.hpp"
#include "texnerf/pseudotex.hpp"
#include "texnerf/radiometry.hpp"
#include "texnerf/scenesynth.hpp"
#include "texnerf/texdecomp.hpp"
#include "texnerf/trainer.hpp"

namespace texnerf::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kCommands = {"synth", "decompose", "map", "train", "render", "eval", "pointcloud"};

Json train_defaults() {
  Json j = Json::parse(trainer::to_json(trainer::TrainConfig{}));
  j.erase("seed");
  Json out;
  out["data"] = "";
  out["resume"] = "";
  out.update(j);
  return out;
}

Json default_config() {
  Json c;
  c["seed"] = 0;
  c["threads"] = 0;
  c["synth"] = {{"scene", "reference"},      {"library", "reference"}, {"views", 27},
                {"radius", 2.0},             {"elevation_deg", {55.0}}, {"lookat", {0.0, 0.0, 0.15}},
                {"width", 64},               {"height", 64},           {"camera_angle_x", 0.7},
                {"noise_sigma", 0.0},        {"write_png", true}};
  c["decompose"] = {{"data", ""},    {"library", ""},     {"path", "spectral"}, {"mode", "exact"},
                    {"t_ref", 295.0}, {"eps_e", 0.01},     {"t_ambient", 295.0}};
  c["map"] = {{"data", ""},     {"library", ""},   {"range", "percentile"},
              {"t_min", 280.0}, {"t_max", 340.0}, {"x_min", 0.0},          {"x_max", 1.0}};
  c["train"] = train_defaults();
  c["render"] = {{"checkpoint", ""}, {"data", ""}, {"split", "holdout"}, {"samples", 0}};
  c["eval"] = {{"checkpoint", ""}, {"data", ""}, {"split", "holdout"}, {"samples", 0}};
  c["pointcloud"] = {{"checkpoint", ""},
                     {"bbox_min", {-1.0, -1.0, -0.1}},
                     {"bbox_max", {1.0, 1.0, 0.7}},
                     {"resolution", 64},
                     {"threshold", 20.0}};
  return c;
}

// Desk-scale reference pipeline; the train section is sized for a single CPU core.
const char* kRefScenePreset = R"({
  "synth": {"scene": "reference", "views": 27, "radius": 2.0,
            "elevation_deg": [30.0, 55.0, 75.0], "lookat": [0.0, 0.0, 0.15], "width": 64, "height": 64, "camera_angle_x": 0.7},
  "train": {"iterations": 1200, "batch_rays": 4096, "samples_per_ray": 32, "near": 1.0, "far": 3.6,
            "learning_rate": 0.005, "learning_rate_final": 0.00005, "log_every": 100,
            "checkpoint_every": 400, "holdout_eval_every": 400, "zero_init_heads": true,
            "l_pos": 10, "l_dir": 4, "trunk_depth": 4, "trunk_width": 64, "hue_tap": 2, "sv_width": 32},
  "pointcloud": {"bbox_min": [-1.0, -1.0, -0.1], "bbox_max": [1.0, 1.0, 0.7], "resolution": 64, "threshold": 20.0}
})";

// Seconds-scale pipeline for smoke tests.
const char* kSmokePreset = R"({
  "synth": {"views": 9, "width": 16, "height": 16, "radius": 2.0, "elevation_deg": [55.0]},
  "train": {"iterations": 20, "batch_rays": 64, "samples_per_ray": 8, "near": 1.0, "far": 3.6,
            "log_every": 5, "checkpoint_every": 10, "holdout_eval_every": 10, "zero_init_heads": true,
            "l_pos": 4, "l_dir": 2, "trunk_depth": 2, "trunk_width": 16, "hue_tap": 1, "sv_width": 8},
  "pointcloud": {"resolution": 8}
})";

const std::map<std::string, const char*>& presets() {
  static const std::map<std::string, const char*> p = {{"ref_scene", kRefScenePreset}, {"smoke", kSmokePreset}};
  return p;
}

const char* kind(const Json& j) {
  if (j.is_number()) return "number";
  if (j.is_boolean()) return "boolean";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

void merge_strict(Json& base, const Json& overlay, const std::string& ctx) {
  if (!overlay.is_object()) fail(ErrorCode::kInvalidArgument, "config " + (ctx.empty() ? "root" : ctx) + " must be an object");
  for (const auto& [key, value] : overlay.items()) {
    const std::string path = ctx.empty() ? key : ctx + "." + key;
    if (!base.contains(key)) fail(ErrorCode::kInvalidArgument, "unknown config key '" + path + "'");
    Json& slot = base[key];
    if (slot.is_object()) {
      merge_strict(slot, value, path);
      continue;
    }
    if (std::string(kind(slot)) != kind(value)) {
      fail(ErrorCode::kInvalidArgument,
           "config key '" + path + "' expects a " + kind(slot) + ", got a " + kind(value));
    }
    if (slot.is_number_integer() && value.is_number_float()) {
      const double v = value.get<double>();
      if (v != std::floor(v)) fail(ErrorCode::kInvalidArgument, "config key '" + path + "' expects an integer");
      slot = static_cast<long long>(v);
    } else {
      slot = value;
    }
  }
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, source + ": " + e.what());
  }
}

Json load_config_source(const std::string& config) {
  if (config.empty()) return Json::object();
  if (auto it = presets().find(config); it != presets().end()) return parse_json_text(it->second, "preset " + config);
  if (!fs::is_regular_file(config)) {
    std::string names;
    for (const auto& [name, text] : presets()) names += (names.empty() ? "" : ", ") + name;
    fail(ErrorCode::kInvalidArgument, "--config '" + config + "' is neither a file nor a preset (" + names + ")");
  }
  std::ifstream in(config);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j = parse_json_text(buf.str(), config);
  if (j.is_object()) j.erase("command");  // snapshots carry the command that wrote them
  return j;
}

void apply_override(Json& cfg, const std::string& command, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::kInvalidArgument, "--set expects key=value, got '" + assignment + "'");
  }
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }
  Json patch;
  if (key.find('.') != std::string::npos) {
    const auto dot = key.find('.');
    patch[key.substr(0, dot)][key.substr(dot + 1)] = value;
  } else if (key == "seed" || key == "threads") {
    patch[key] = value;
  } else {
    patch[command][key] = value;
  }
  merge_strict(cfg, patch, "");
}

Json resolve(const std::string& command, const std::string& config, const std::vector<std::string>& overrides,
             long long seed, int threads) {
  Json cfg = default_config();
  merge_strict(cfg, load_config_source(config), "");
  for (const auto& o : overrides) apply_override(cfg, command, o);
  if (seed >= 0) cfg["seed"] = seed;
  if (threads >= 0) cfg["threads"] = threads;
  if (cfg["seed"].get<long long>() < 0) fail(ErrorCode::kInvalidArgument, "seed must be >= 0");
  if (cfg["threads"].get<long long>() < 0) fail(ErrorCode::kInvalidArgument, "threads must be >= 0");
  Json resolved;
  resolved["command"] = command;
  resolved["seed"] = cfg["seed"];
  resolved["threads"] = cfg["threads"];
  resolved[command] = cfg[command];
  return resolved;
}

template <typename T>
T get(const Json& section, const char* key, const std::string& command) {
  try {
    return section.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, command + "." + key + ": " + e.what());
  }
}

Eigen::Vector3d get_vec3(const Json& section, const char* key, const std::string& command) {
  const auto v = get<std::vector<double>>(section, key, command);
  if (v.size() != 3) fail(ErrorCode::kInvalidArgument, command + "." + key + " must have 3 entries");
  return {v[0], v[1], v[2]};
}

fs::path require_path(const Json& section, const char* key, const std::string& command) {
  const auto s = get<std::string>(section, key, command);
  if (s.empty()) fail(ErrorCode::kInvalidArgument, command + "." + key + " is required (use --set " + key + "=PATH)");
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

void prepare_out(const fs::path& out, const Json& resolved) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + out.string() + ": " + ec.message());
  write_text(out / "resolved_config.json", resolved.dump(2) + "\n");
}

std::string frame_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "r_%03zu", i);
  return buf;
}

Json read_transforms(const fs::path& data) {
  const fs::path p = data / "transforms.json";
  std::ifstream in(p);
  if (!in) fail(ErrorCode::kIo, "cannot open " + p.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, p.string() + ": " + e.what());
  }
}

// Frame paths are rewritten relative to `out` when copying a manifest.
std::string absolute_from(const fs::path& data, const std::string& rel) { return fs::absolute(data / rel).lexically_normal().string(); }

radiometry::SpectralLibrary library_for(const Json& section, const fs::path& data, const std::string& command) {
  auto lib = get<std::string>(section, "library", command);
  if (lib.empty()) lib = (data / "library.csv").string();
  if (lib == "reference") return scenesynth::reference_library();
  return radiometry::load_spectral_library(lib);
}

std::vector<trainer::PosedImage> select_split(const trainer::Dataset& data, const std::string& split,
                                              const std::string& command) {
  if (split == "holdout") return data.holdout;
  if (split == "train") return data.train;
  if (split == "all") {
    auto v = data.train;
    v.insert(v.end(), data.holdout.begin(), data.holdout.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    return v;
  }
  fail(ErrorCode::kInvalidArgument, command + ".split must be holdout, train or all");
}

eval::RenderConfig render_config(const trainer::TrainConfig& tc, int samples) {
  if (samples < 0) fail(ErrorCode::kInvalidArgument, "samples must be >= 0");
  return {tc.near, tc.far, samples > 0 ? samples : tc.samples_per_ray};
}

// ---- subcommands ----------------------------------------------------------

void cmd_synth(const Json& cfg, const fs::path& out, std::ostream& log) {
  const Json& s = cfg["synth"];
  const auto scene_src = get<std::string>(s, "scene", "synth");
  const auto lib_src = get<std::string>(s, "library", "synth");
  const auto scene = scene_src == "reference" ? scenesynth::reference_scene() : scenesynth::load_scene(scene_src);
  const auto library =
      lib_src == "reference" ? scenesynth::reference_library() : radiometry::load_spectral_library(lib_src);
  const int views = get<int>(s, "views", "synth");
  if (views < 1) fail(ErrorCode::kInvalidArgument, "synth.views must be >= 1");
  std::vector<double> rings;
  for (const auto& e : s["elevation_deg"]) {
    if (!e.is_number()) fail(ErrorCode::kInvalidArgument, "synth.elevation_deg must be a list of numbers");
    rings.push_back(e.get<double>());
  }
  const auto poses = scenesynth::generate_orbit_poses(
      views, get<double>(s, "radius", "synth"), rings, get_vec3(s, "lookat", "synth"),
      get<int>(s, "width", "synth"), get<int>(s, "height", "synth"), get<double>(s, "camera_angle_x", "synth"));
  scenesynth::EmitOptions opt;
  opt.noise_sigma = get<double>(s, "noise_sigma", "synth");
  opt.seed = cfg["seed"].get<std::uint64_t>();
  opt.write_png = get<bool>(s, "write_png", "synth");
  if (!(opt.noise_sigma >= 0.0)) fail(ErrorCode::kInvalidArgument, "synth.noise_sigma must be >= 0");
  scenesynth::emit_dataset(scene, poses, library, out, opt);
  log << "synth: wrote " << views << " views to " << out.string() << "\n";
}

void cmd_decompose(const Json& cfg, const fs::path& out, std::ostream& log) {
  const Json& s = cfg["decompose"];
  const fs::path data = require_path(s, "data", "decompose");
  const auto library = library_for(s, data, "decompose");
  texdecomp::DecompositionConfig dc;
  dc.t_ref = get<double>(s, "t_ref", "decompose");
  dc.eps_e = get<double>(s, "eps_e", "decompose");
  dc.t_ambient = get<double>(s, "t_ambient", "decompose");
  const auto mode = get<std::string>(s, "mode", "decompose");
  if (mode == "exact") dc.mode = texdecomp::SolveMode::kExact;
  else if (mode == "paper_verbatim") dc.mode = texdecomp::SolveMode::kPaperVerbatim;
  else fail(ErrorCode::kInvalidArgument, "decompose.mode must be exact or paper_verbatim");
  const auto path = get<std::string>(s, "path", "decompose");
  if (path != "spectral" && path != "pseudo") fail(ErrorCode::kInvalidArgument, "decompose.path must be spectral or pseudo");
  dc.validate();

  Json tf = read_transforms(data);
  fs::create_directories(out / "views");
  Json report = Json::array();
  std::size_t nan_total = 0, clamped_total = 0;
  for (std::size_t i = 0; i < tf["frames"].size(); ++i) {
    Json& frame = tf["frames"][i];
    if (!frame.contains("cube") || !frame.contains("tex")) {
      fail(ErrorCode::kParse, "decompose: frame " + std::to_string(i) + " needs 'cube' and 'tex' (material mask) entries");
    }
    const auto cube = texdecomp::load_cube(data / frame["cube"].get<std::string>());
    const auto truth = texdecomp::load_tex(data / frame["tex"].get<std::string>());
    const auto tex = path == "spectral"
                         ? texdecomp::decompose_cube(cube, truth.material, library, dc)
                         : texdecomp::decompose_pseudo(texdecomp::integrate_cube(cube), truth.material, library,
                                                       cube.grid(), dc);
    const std::string rel = "views/" + frame_stem(i) + "_tex.json";
    texdecomp::save_tex(out / rel, tex);
    double err = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < tex.height(); ++y) {
      for (int x = 0; x < tex.width(); ++x) {
        const double a = tex.temperature(x, y), b = truth.temperature(x, y);
        if (std::isfinite(a) && std::isfinite(b)) {
          err += std::abs(a - b);
          ++n;
        }
      }
    }
    nan_total += tex.nan_count;
    clamped_total += tex.clamped_count;
    report.push_back({{"frame", i},
                      {"nan_count", tex.nan_count},
                      {"clamped_count", tex.clamped_count},
                      {"temperature_mae_vs_input_K", n ? Json(err / static_cast<double>(n)) : Json(nullptr)}});
    for (const char* key : {"file_path", "cube", "depth"}) {
      if (frame.contains(key)) frame[key] = absolute_from(data, frame[key].get<std::string>());
    }
    frame["tex"] = rel;
  }
  write_text(out / "transforms.json", tf.dump(2) + "\n");
  write_text(out / "decompose_report.json", report.dump(2) + "\n");
  radiometry::save_spectral_library(out / "library.csv", library);
  log << "decompose: " << tf["frames"].size() << " frames, " << nan_total << " unsolved pixels, " << clamped_total
      << " clamped pixels\n";
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void cmd_map(const Json& cfg, const fs::path& out, std::ostream& log) {
  const Json& s = cfg["map"];
  const fs::path data = require_path(s, "data", "map");
  const auto library = library_for(s, data, "map");
  Json tf = read_transforms(data);
  std::vector<texdecomp::TeXImage> texes;
  for (std::size_t i = 0; i < tf["frames"].size(); ++i) {
    const Json& frame = tf["frames"][i];
    if (!frame.contains("tex")) fail(ErrorCode::kParse, "map: frame " + std::to_string(i) + " has no 'tex' entry");
    texes.push_back(texdecomp::load_tex(data / frame["tex"].get<std::string>()));
  }
  std::vector<std::string> materials;
  for (const auto& [id, curve] : library) materials.push_back(id);
  pseudotex::MappingMetadata meta;
  meta.palette = pseudotex::build_palette(materials);
  const auto range = get<std::string>(s, "range", "map");
  if (range == "fixed") {
    meta.t_min = get<double>(s, "t_min", "map");
    meta.t_max = get<double>(s, "t_max", "map");
    meta.x_min = get<double>(s, "x_min", "map");
    meta.x_max = get<double>(s, "x_max", "map");
  } else if (range == "percentile") {
    std::vector<double> ts, xs;
    for (const auto& t : texes) {
      for (double v : t.temperature.data()) if (std::isfinite(v)) ts.push_back(v);
      for (double v : t.texture.data()) if (std::isfinite(v)) xs.push_back(v);
    }
    if (ts.empty() || xs.empty()) fail(ErrorCode::kInvalidArgument, "map: no finite temperature or texture values");
    meta.t_min = percentile(ts, 0.02);
    meta.t_max = percentile(ts, 0.98);
    meta.x_min = percentile(xs, 0.02);
    meta.x_max = percentile(xs, 0.98);
    if (!(meta.t_max > meta.t_min)) {
      meta.t_min -= 1.0;
      meta.t_max += 1.0;
    }
    if (!(meta.x_max > meta.x_min)) {
      const double pad = std::max(1e-9, std::abs(meta.x_min) * 1e-3);
      meta.x_min -= pad;
      meta.x_max += pad;
    }
  } else {
    fail(ErrorCode::kInvalidArgument, "map.range must be percentile or fixed");
  }
  meta.validate();
  fs::create_directories(out / "views");
  std::size_t invalid = 0;
  for (std::size_t i = 0; i < texes.size(); ++i) {
    Json& frame = tf["frames"][i];
    const auto mapped = pseudotex::tex_to_hsv(texes[i], meta);
    invalid += mapped.invalid_count;
    const std::string rel = "views/" + frame_stem(i) + ".pfm";
    pseudotex::save_hsv(out / rel, mapped.hsv, meta);
    write_png8(out / ("views/" + frame_stem(i) + ".png"), pseudotex::hsv_to_rgb(mapped.hsv));
    for (const char* key : {"cube", "depth", "tex"}) {
      if (frame.contains(key)) frame[key] = absolute_from(data, frame[key].get<std::string>());
    }
    frame["file_path"] = rel;
  }
  write_text(out / "transforms.json", tf.dump(2) + "\n");
  radiometry::save_spectral_library(out / "library.csv", library);
  log << "map: " << texes.size() << " images, T range [" << meta.t_min << ", " << meta.t_max << "] K, " << invalid
      << " pixels with invalid T or X\n";
}

trainer::TrainConfig train_config_of(const Json& cfg) {
  Json t = cfg["train"];
  t.erase("data");
  t.erase("resume");
  t["seed"] = cfg["seed"];
  auto tc = trainer::train_config_from_json(t.dump());
  tc.validate();
  return tc;
}

void cmd_train(const Json& cfg, const fs::path& out, std::ostream& log) {
  const Json& s = cfg["train"];
  const fs::path data_dir = require_path(s, "data", "train");
  const auto tc = train_config_of(cfg);
  const auto data = trainer::load_dataset(data_dir, tc.holdout_stride);
  const auto resume = get<std::string>(s, "resume", "train");
  std::optional<fs::path> resume_path;
  if (!resume.empty()) resume_path = trainer::resolve_checkpoint(resume);
  log << "train: " << data.train.size() << " training views, " << data.holdout.size() << " held out, "
      << tc.iterations << " iterations\n";
  const auto result = trainer::train(data, tc, out, resume_path);
  if (!result.log.empty()) {
    const auto& last = result.log.back();
    log << "train: iteration " << last.iteration << " loss " << last.loss;
    if (std::isfinite(last.psnr_holdout)) log << " held-out PSNR " << last.psnr_holdout << " dB";
    log << "\n";
  }
  log << "train: checkpoint " << result.final_checkpoint.string() << "\n";
}

void cmd_render(const Json& cfg, const fs::path& out, std::ostream& log) {
  const Json& s = cfg["render"];
  const auto model = trainer::load_model(require_path(s, "checkpoint", "render"));
  const auto data = trainer::load_dataset(require_path(s, "data", "render"), model.config.holdout_stride);
  const auto views = select_split(data, get<std::string>(s, "split", "render"), "render");
  const auto rc = render_config(model.config, get<int>(s, "samples", "render"));
  fs::create_directories(out / "views");
  for (const auto& v : views) {
    const auto hsv = eval::render_view(model.field, v.camera, rc);
    const std::string stem = "views/" + frame_stem(v.index);
    pseudotex::save_hsv(out / (stem + ".pfm"), hsv, data.meta);
    write_png8(out / (stem + ".png"), pseudotex::hsv_to_rgb(hsv));
  }
  log << "render: wrote " << views.size() << " views to " << (out / "views").string() << "\n";
}

void cmd_eval(const Json& cfg, const fs::path& out, std::ostream& log) {
  const Json& s = cfg["eval"];
  const auto model = trainer::load_model(require_path(s, "checkpoint", "eval"));
  const auto data = trainer::load_dataset(require_path(s, "data", "eval"), model.config.holdout_stride);
  const auto views = select_split(data, get<std::string>(s, "split", "eval"), "eval");
  const auto report = eval::evaluate(model.field, views, data.meta, render_config(model.config, get<int>(s, "samples", "eval")));
  write_text(out / "eval.json", report.to_json() + "\n");
  write_text(out / "eval.txt", report.to_table());
  log << report.to_table();
}

void cmd_pointcloud(const Json& cfg, const fs::path& out, std::ostream& log) {
  const Json& s = cfg["pointcloud"];
  const auto model = trainer::load_model(require_path(s, "checkpoint", "pointcloud"));
  const eval::BoundingBox box{get_vec3(s, "bbox_min", "pointcloud"), get_vec3(s, "bbox_max", "pointcloud")};
  const auto cloud = eval::extract_point_cloud(model.field, box, get<int>(s, "resolution", "pointcloud"),
                                               get<double>(s, "threshold", "pointcloud"));
  eval::write_ply(out / "pointcloud.ply", cloud);
  log << "pointcloud: " << cloud.points.size() << " points -> " << (out / "pointcloud.ply").string() << "\n";
}

int dispatch(const std::string& command, const Json& cfg, const fs::path& out, std::ostream& log) {
  const auto threads = cfg["threads"].get<int>();
  if (threads > 0) set_thread_count(static_cast<std::size_t>(threads));
  prepare_out(out, cfg);
  if (command == "synth") cmd_synth(cfg, out, log);
  else if (command == "decompose") cmd_decompose(cfg, out, log);
  else if (command == "map") cmd_map(cfg, out, log);
  else if (command == "train") cmd_train(cfg, out, log);
  else if (command == "render") cmd_render(cfg, out, log);
  else if (command == "eval") cmd_eval(cfg, out, log);
  else if (command == "pointcloud") cmd_pointcloud(cfg, out, log);
  return kExitOk;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : presets()) names.push_back(name);
  return names;
}

std::string resolve_config(const std::string& command, const std::string& config,
                           const std::vector<std::string>& overrides, long long seed) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    fail(ErrorCode::kInvalidArgument, "unknown subcommand '" + command + "'");
  }
  return resolve(command, config, overrides, seed, -1).dump(2);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"texnerf: thermal TeX decomposition, pseudo-TeX HSV mapping and HSV radiance fields"};
  app.name("texnerf");
  app.require_subcommand(0, 1);

  struct Common {
    std::string config;
    long long seed = -1;
    std::string out;
    int threads = -1;
    std::vector<std::string> set;
  };
  std::map<std::string, Common> common;
  const std::map<std::string, std::string> help = {
      {"synth", "render a synthetic multi-band thermal dataset"},
      {"decompose", "spectral or single-band TeX decomposition of a dataset's cubes"},
      {"map", "map TeX images to pseudo-TeX HSV images"},
      {"train", "train an HSV radiance field"},
      {"render", "render views of a trained field"},
      {"eval", "PSNR, SSIM, temperature MAE and material accuracy on held-out views"},
      {"pointcloud", "export a density point cloud as ASCII PLY"}};
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    auto& c = common[name];
    sub->add_option("--config", c.config, "config file (JSON) or preset name: ref_scene, smoke");
    sub->add_option("--seed", c.seed, "random seed (>= 0)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", c.out, "output directory")->required();
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--set", c.set, "override key=value (repeatable); key may be section.key");
  }

  if (argc <= 1) {
    err << app.help();
    return kExitValidation;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  const auto chosen = app.get_subcommands();
  if (chosen.empty()) {
    err << "error: a subcommand is required\n\n" << app.help();
    return kExitValidation;
  }
  const std::string command = chosen.front()->get_name();
  const auto& c = common.at(command);
  try {
    const Json cfg = resolve(command, c.config, c.set, c.seed, c.threads);
    return dispatch(command, cfg, c.out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"texnerf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace texnerf::cli
