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

#include <stdexcept>
#include <string>
#include <string_view>

namespace texnerf {

enum class ErrorCode {
  kDomain,
  kOutOfBracket,
  kParse,
  kInvariant,
  kExtrapolation,
  kDegenerateEmissivity,
  kNoSolution,
  kEmissivityCeiling,
  kMissingMaterial,
  kDimensionMismatch,
  kNegativeEmission,
  kDuplicateId,
  kUnknownMaterial,
  kNonFinite,
  kOutOfBounds,
  kEmptyMask,
  kInvalidArgument,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

/// True for codes caused by bad user input (config, files, arguments) as
/// opposed to numerical or I/O failures at run time.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace texnerf
