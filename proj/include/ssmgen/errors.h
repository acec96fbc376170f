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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssmgen {

// Every failure the library raises carries one of these categories. The CLI
// prints the category name verbatim so callers can branch on it.
enum class ErrorCategory {
  kDimension,
  kVocabulary,
  kLength,
  kContract,
  kGeometry,
  kNumeric,
  kConfig,
  kConfigNotFound,
  kMissingFile,
  kSchema,
  kBadMagic,
  kTruncated,
  kDimensionOverflow,
  kVersionMismatch,
  kShapeMismatch,
  kIo,
  kUsage,
  kValidation,
};

std::string_view category_name(ErrorCategory category);

// Process exit status used by the CLI for a category. Never 0.
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message);

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void raise(ErrorCategory category, const std::string& message);

}  // namespace ssmgen
