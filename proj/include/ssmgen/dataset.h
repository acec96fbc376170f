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

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssmgen/metrics.h"
#include "ssmgen/tensor.h"

namespace ssmgen {

enum class Split { kTrain, kVal, kTest };

const char* split_name(Split s);
Split parse_split(const std::string& name);  // kUsage on unknown names

// One JSONL line:
//   {"id": "...", "feature_path": "a.r2gf" | [...], "report": "...",
//    "split": "train", "labels": [0,1,...] | "0100..."}
// image_path may replace feature_path. Paths are relative to the JSONL file.
struct DatasetRecord {
  std::string id;
  std::vector<std::filesystem::path> feature_paths;
  std::vector<std::filesystem::path> image_paths;
  std::string report;
  Split split = Split::kTrain;
  std::optional<LabelVector> labels;
};

// All-or-nothing: the first bad line raises kSchema naming its line number.
std::vector<DatasetRecord> parse_dataset(const std::string& text,
                                         const std::filesystem::path& base_dir,
                                         const std::string& source);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

std::vector<const DatasetRecord*> select_split(const std::vector<DatasetRecord>& records,
                                               Split split);

// Raw features [S, feature_dim]: feature files or pooled images, several
// views concatenated along S.
Tensor load_record_features(const DatasetRecord& record, std::size_t image_patch);

// {"id": ..., "report": ...} lines; other fields are ignored.
std::vector<std::pair<std::string, std::string>> load_reports(const std::filesystem::path& path);

// Each line is "id,d1,...,d14" or just the 14 comma-separated digits, in
// which case the id is empty and pairing is positional.
std::vector<std::pair<std::string, LabelVector>> parse_labels(const std::string& text,
                                                              const std::string& source);
std::vector<std::pair<std::string, LabelVector>> load_labels(const std::filesystem::path& path);

}  // namespace ssmgen
