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

#include <bit>
#include <cstring>
#include <fstream>

#include "json_util.hpp"
#include "texnerf/error.hpp"
#include "texnerf/nerf.hpp"

namespace texnerf::nerf {

namespace {

constexpr const char* kMagic = "TEXNERF-CHECKPOINT";
constexpr int kVersion = 1;

detail::OrderedJson field_to_json(const FieldConfig& f) {
  detail::OrderedJson j;
  j["l_pos"] = f.encoding.l_pos;
  j["l_dir"] = f.encoding.l_dir;
  j["include_input"] = f.encoding.include_input;
  j["trunk_depth"] = f.trunk_depth;
  j["trunk_width"] = f.trunk_width;
  j["hue_tap"] = f.hue_tap;
  j["sv_width"] = f.sv_width;
  return j;
}

FieldConfig field_from_json(const detail::OrderedJson& j, const std::string& ctx) {
  FieldConfig f;
  f.encoding.l_pos = detail::get_field<int>(j, "l_pos", ctx);
  f.encoding.l_dir = detail::get_field<int>(j, "l_dir", ctx);
  f.encoding.include_input = detail::get_field<bool>(j, "include_input", ctx);
  f.trunk_depth = detail::get_field<int>(j, "trunk_depth", ctx);
  f.trunk_width = detail::get_field<int>(j, "trunk_width", ctx);
  f.hue_tap = detail::get_field<int>(j, "hue_tap", ctx);
  f.sv_width = detail::get_field<int>(j, "sv_width", ctx);
  return f;
}

void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
  static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t n, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) fail(ErrorCode::kParse, path.string() + ": truncated tensor data");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  RadianceField shape(ckpt.field);
  if (shape.parameters().size() != ckpt.parameters.size()) {
    fail(ErrorCode::kDimensionMismatch, "checkpoint parameter count does not match its field config");
  }
  detail::OrderedJson header;
  header["format"] = kMagic;
  header["version"] = kVersion;
  header["field"] = field_to_json(ckpt.field);
  header["iteration"] = ckpt.iteration;
  header["rng_state"] = ckpt.rng_state;
  header["run_config"] = ckpt.run_config;
  header["tensors"] = detail::OrderedJson::array();
  for (const auto& t : shape.tensors()) header["tensors"].push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  for (const auto& t : ckpt.extra) {
    if (t.values.size() != static_cast<std::size_t>(t.rows) * t.cols) {
      fail(ErrorCode::kDimensionMismatch, "extra tensor '" + t.name + "' has the wrong size");
    }
    header["tensors"].push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << kMagic << '\n' << text.size() << '\n' << text << '\n';
  write_doubles(out, ckpt.parameters.data(), static_cast<std::size_t>(ckpt.parameters.size()));
  for (const auto& t : ckpt.extra) write_doubles(out, t.values.data(), t.values.size());
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) fail(ErrorCode::kParse, path.string() + ": not a texnerf checkpoint");
  std::string len_line;
  std::getline(in, len_line);
  std::size_t len = 0;
  try {
    len = std::stoull(len_line);
  } catch (const std::exception&) {
    fail(ErrorCode::kParse, path.string() + ": bad header length");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in || in.get() != '\n') fail(ErrorCode::kParse, path.string() + ": truncated header");
  detail::OrderedJson header;
  try {
    header = detail::OrderedJson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  const std::string ctx = path.string();
  if (detail::get_field<int>(header, "version", ctx) != kVersion) {
    fail(ErrorCode::kParse, ctx + ": unsupported checkpoint version");
  }
  Checkpoint ckpt;
  ckpt.field = field_from_json(detail::get_field<detail::OrderedJson>(header, "field", ctx), ctx);
  ckpt.iteration = detail::get_field<std::uint64_t>(header, "iteration", ctx);
  ckpt.rng_state = detail::get_field<std::string>(header, "rng_state", ctx);
  ckpt.run_config = detail::get_field<std::string>(header, "run_config", ctx);

  RadianceField shape(ckpt.field);
  const auto tensors = detail::get_field<detail::OrderedJson>(header, "tensors", ctx);
  if (tensors.size() < shape.tensors().size()) fail(ErrorCode::kParse, ctx + ": missing parameter tensors");
  for (std::size_t i = 0; i < shape.tensors().size(); ++i) {
    const auto& t = shape.tensors()[i];
    if (tensors[i].at("name") != t.name || tensors[i].at("rows") != t.rows || tensors[i].at("cols") != t.cols) {
      fail(ErrorCode::kParse, ctx + ": tensor table does not match field config at '" + t.name + "'");
    }
  }
  ckpt.parameters = Eigen::VectorXd(shape.parameters().size());
  read_doubles(in, ckpt.parameters.data(), static_cast<std::size_t>(ckpt.parameters.size()), path);
  for (std::size_t i = shape.tensors().size(); i < tensors.size(); ++i) {
    NamedTensor t;
    t.name = tensors[i].at("name").get<std::string>();
    t.rows = tensors[i].at("rows").get<int>();
    t.cols = tensors[i].at("cols").get<int>();
    t.values.resize(static_cast<std::size_t>(t.rows) * t.cols);
    read_doubles(in, t.values.data(), t.values.size(), path);
    ckpt.extra.push_back(std::move(t));
  }
  return ckpt;
}

RadianceField field_from_checkpoint(const Checkpoint& ckpt) {
  RadianceField field(ckpt.field);
  if (field.parameters().size() != ckpt.parameters.size()) {
    fail(ErrorCode::kDimensionMismatch, "checkpoint parameter count does not match its field config");
  }
  field.parameters() = ckpt.parameters;
  return field;
}

}  // namespace texnerf::nerf
