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

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "texnerf/error.hpp"

namespace texnerf::detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

template <typename J = Json>
J read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return J::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

template <typename J>
void write_json(const std::filesystem::path& path, const J& json) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << json.dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

/// Typed field access that reports the key on failure.
template <typename T, typename J>
T get_field(const J& json, const char* key, const std::string& context) {
  if (!json.contains(key)) fail(ErrorCode::kParse, context + ": missing key '" + key + "'");
  try {
    return json.at(key).template get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, context + ": key '" + key + "': " + e.what());
  }
}

}  // namespace texnerf::detail
