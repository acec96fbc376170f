// Copyright 2026 The ssmgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ssmgen/errors.h"

namespace ssmgen {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kDimension: return "dimension";
    case ErrorCategory::kVocabulary: return "vocabulary";
    case ErrorCategory::kLength: return "length";
    case ErrorCategory::kContract: return "contract";
    case ErrorCategory::kGeometry: return "geometry";
    case ErrorCategory::kNumeric: return "numeric";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kConfigNotFound: return "config-not-found";
    case ErrorCategory::kMissingFile: return "missing-file";
    case ErrorCategory::kSchema: return "schema";
    case ErrorCategory::kBadMagic: return "bad-magic";
    case ErrorCategory::kTruncated: return "truncated";
    case ErrorCategory::kDimensionOverflow: return "dimension-overflow";
    case ErrorCategory::kVersionMismatch: return "version-mismatch";
    case ErrorCategory::kShapeMismatch: return "shape-mismatch";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kUsage: return "usage";
    case ErrorCategory::kValidation: return "validation";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage: return 2;
    case ErrorCategory::kConfigNotFound: return 3;
    case ErrorCategory::kMissingFile: return 4;
    case ErrorCategory::kSchema: return 5;
    case ErrorCategory::kConfig: return 6;
    case ErrorCategory::kBadMagic:
    case ErrorCategory::kTruncated:
    case ErrorCategory::kDimensionOverflow:
    case ErrorCategory::kVersionMismatch: return 7;
    case ErrorCategory::kShapeMismatch: return 8;
    case ErrorCategory::kIo: return 9;
    case ErrorCategory::kValidation: return 10;
    default: return 1;
  }
}

Error::Error(ErrorCategory category, const std::string& message)
    : std::runtime_error(message), category_(category) {}

void raise(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace ssmgen
