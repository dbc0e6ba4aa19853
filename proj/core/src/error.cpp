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

#include "texnerf/error.hpp"

namespace texnerf {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kOutOfBracket: return "out-of-bracket";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kInvariant: return "invariant violation";
    case ErrorCode::kExtrapolation: return "extrapolation";
    case ErrorCode::kDegenerateEmissivity: return "degenerate emissivity";
    case ErrorCode::kNoSolution: return "no solution";
    case ErrorCode::kEmissivityCeiling: return "emissivity ceiling";
    case ErrorCode::kMissingMaterial: return "missing material";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kNegativeEmission: return "negative emission";
    case ErrorCode::kDuplicateId: return "duplicate id";
    case ErrorCode::kUnknownMaterial: return "unknown material";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kOutOfBounds: return "out of bounds";
    case ErrorCode::kEmptyMask: return "empty mask";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kIo: return "I/O error";
  }
  return "error";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kInvariant:
    case ErrorCode::kMissingMaterial:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kUnknownMaterial:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kExtrapolation:
    case ErrorCode::kEmptyMask:
    case ErrorCode::kOutOfBounds:
      return true;
    default:
      return false;
  }
}

}  // namespace texnerf
