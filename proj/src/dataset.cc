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

#include "ssmgen/dataset.h"

#include <set>
#include <sstream>

#include "json.hpp"

#include "ssmgen/errors.h"
#include "ssmgen/features.h"
#include "ssmgen/file_util.h"

namespace ssmgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& source, std::size_t line, const std::string& msg) {
  raise(ErrorCategory::kSchema, source + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

std::vector<fs::path> path_list(const json& v, const fs::path& base, const std::string& source,
                                std::size_t line, const char* key) {
  std::vector<fs::path> out;
  auto add = [&](const json& item) {
    if (!item.is_string() || item.get<std::string>().empty()) {
      schema_error(source, line, std::string(key) + " must be a non-empty string");
    }
    out.push_back(base / item.get<std::string>());
  };
  if (v.is_array()) {
    if (v.empty()) schema_error(source, line, std::string(key) + " must not be empty");
    for (const json& item : v) add(item);
  } else {
    add(v);
  }
  return out;
}

LabelVector labels_from_json(const json& v, const std::string& source, std::size_t line) {
  LabelVector labels{};
  auto bad = [&] { schema_error(source, line, "labels must hold 14 binary values"); };
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.size() != kNumCeCategories) bad();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '0' && s[i] != '1') bad();
      labels[i] = s[i] == '1';
    }
  } else if (v.is_array()) {
    if (v.size() != kNumCeCategories) bad();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || (v[i] != 0 && v[i] != 1)) bad();
      labels[i] = v[i] == 1;
    }
  } else {
    bad();
  }
  return labels;
}

json parse_line(const std::string& line, const std::string& source, std::size_t number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    schema_error(source, number, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) schema_error(source, number, "expected a JSON object");
  return j;
}

std::string required_string(const json& j, const char* key, const std::string& source,
                            std::size_t line) {
  if (!j.contains(key) || !j[key].is_string()) {
    schema_error(source, line, std::string("missing string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  raise(ErrorCategory::kUsage, "unknown split '" + name + "'");
}

std::vector<DatasetRecord> parse_dataset(const std::string& text, const fs::path& base_dir,
                                         const std::string& source) {
  std::vector<DatasetRecord> records;
  std::set<std::string> ids;
  const std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t number = i + 1;
    if (blank(lines[i])) continue;
    const json j = parse_line(lines[i], source, number);

    DatasetRecord r;
    r.id = required_string(j, "id", source, number);
    if (r.id.empty()) schema_error(source, number, "id must not be empty");
    if (!ids.insert(r.id).second) schema_error(source, number, "duplicate id '" + r.id + "'");

    const bool has_features = j.contains("feature_path");
    const bool has_image = j.contains("image_path");
    if (has_features == has_image) {
      schema_error(source, number, "exactly one of feature_path and image_path is required");
    }
    if (has_features) r.feature_paths = path_list(j["feature_path"], base_dir, source, number, "feature_path");
    if (has_image) r.image_paths = path_list(j["image_path"], base_dir, source, number, "image_path");

    try {
      r.split = parse_split(required_string(j, "split", source, number));
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::kUsage) throw;
      schema_error(source, number, e.what());
    }
    if (j.contains("report")) {
      if (!j["report"].is_string()) schema_error(source, number, "report must be a string");
      r.report = j["report"].get<std::string>();
    }
    if (r.split != Split::kTest && blank(r.report)) {
      schema_error(source, number, "report is required for train and val records");
    }
    if (j.contains("labels") && !j["labels"].is_null()) {
      r.labels = labels_from_json(j["labels"], source, number);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) raise(ErrorCategory::kSchema, source + ": no records");
  return records;
}

std::vector<DatasetRecord> load_dataset(const fs::path& path) {
  return parse_dataset(read_file(path), path.parent_path(), path.string());
}

std::vector<const DatasetRecord*> select_split(const std::vector<DatasetRecord>& records,
                                               Split split) {
  std::vector<const DatasetRecord*> out;
  for (const DatasetRecord& r : records) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

Tensor load_record_features(const DatasetRecord& record, std::size_t image_patch) {
  std::vector<FeatureSequence> parts;
  for (const fs::path& p : record.feature_paths) parts.push_back(load_features(p));
  for (const fs::path& p : record.image_paths) {
    parts.push_back({pool_patches(read_pgm(p), image_patch)});
  }
  return parts.size() == 1 ? parts[0].values : concat_features(parts).values;
}

std::vector<std::pair<std::string, std::string>> load_reports(const fs::path& path) {
  const std::string source = path.string();
  const std::vector<std::string> lines = split_lines(read_file(path));
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const json j = parse_line(lines[i], source, i + 1);
    std::string id = required_string(j, "id", source, i + 1);
    if (!ids.insert(id).second) schema_error(source, i + 1, "duplicate id '" + id + "'");
    out.emplace_back(std::move(id), required_string(j, "report", source, i + 1));
  }
  return out;
}

std::vector<std::pair<std::string, LabelVector>> parse_labels(const std::string& text,
                                                              const std::string& source) {
  std::vector<std::pair<std::string, LabelVector>> out;
  std::optional<bool> with_ids;
  const std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    std::vector<std::string> fields;
    std::istringstream in(lines[i]);
    for (std::string f; std::getline(in, f, ',');) {
      const auto b = f.find_first_not_of(" \t"), e = f.find_last_not_of(" \t");
      fields.push_back(b == std::string::npos ? "" : f.substr(b, e - b + 1));
    }
    const bool has_id = fields.size() == kNumCeCategories + 1;
    if (!has_id && fields.size() != kNumCeCategories) {
      schema_error(source, i + 1, "expected 14 label digits, optionally preceded by an id");
    }
    if (with_ids && *with_ids != has_id) schema_error(source, i + 1, "mixed id and positional lines");
    with_ids = has_id;
    LabelVector labels{};
    for (std::size_t c = 0; c < kNumCeCategories; ++c) {
      const std::string& f = fields[c + (has_id ? 1 : 0)];
      if (f != "0" && f != "1") schema_error(source, i + 1, "label digits must be 0 or 1");
      labels[c] = f == "1";
    }
    out.emplace_back(has_id ? fields[0] : std::string(), labels);
  }
  return out;
}

std::vector<std::pair<std::string, LabelVector>> load_labels(const fs::path& path) {
  return parse_labels(read_file(path), path.string());
}

}  // namespace ssmgen
