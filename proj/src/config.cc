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

#include "ssmgen/config.h"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "ssmgen/errors.h"
#include "ssmgen/file_util.h"

namespace ssmgen {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    raise(ErrorCategory::kConfig, "key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    raise(ErrorCategory::kConfig, "key '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  raise(ErrorCategory::kConfig, "key '" + key + "' expects a number, got '" + v + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ModelConfig::validate() const {
  if (feature_dim == 0) raise(ErrorCategory::kConfig, "feature_dim must be positive");
  encoder.validate();
  decoder.validate();
  if (encoder.d != decoder.d) raise(ErrorCategory::kConfig, "encoder and decoder widths differ");
}

void TrainConfig::validate() const {
  if (!(lr_visual > 0.0) || !(lr_other > 0.0)) {
    raise(ErrorCategory::kConfig, "learning rates must be positive");
  }
  if (!(decay > 0.0 && decay <= 1.0)) raise(ErrorCategory::kConfig, "lr_decay must be in (0, 1]");
  if (batch_size == 0) raise(ErrorCategory::kConfig, "batch_size must be positive");
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCategory::kConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) raise(ErrorCategory::kConfig, "line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) {
      raise(ErrorCategory::kConfig, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  const auto& e = model.encoder;
  const auto& d = model.decoder;
  os << "d_model=" << e.d << '\n'
     << "d_state=" << e.d_state << '\n'
     << "d_conv=" << e.d_conv << '\n'
     << "expand=" << e.expand << '\n'
     << "encoder_layers=" << e.n_layers << '\n'
     << "decoder_layers=" << d.n_layers << '\n'
     << "heads=" << d.heads << '\n'
     << "d_ff=" << d.d_ff << '\n'
     << "dropout=" << format_double(d.dropout) << '\n'
     << "vocab_size=" << d.vocab_size << '\n'
     << "max_len=" << d.max_len << '\n'
     << "feature_dim=" << model.feature_dim << '\n'
     << "lr_visual=" << format_double(train.lr_visual) << '\n'
     << "lr_other=" << format_double(train.lr_other) << '\n'
     << "lr_decay=" << format_double(train.decay) << '\n'
     << "epochs=" << train.epochs << '\n'
     << "batch_size=" << train.batch_size << '\n'
     << "seed=" << train.seed << '\n'
     << "beam_size=" << generation.beam_size << '\n'
     << "length_norm=" << format_double(generation.length_norm) << '\n'
     << "min_freq=" << data.min_freq << '\n'
     << "image_patch=" << data.image_patch << '\n';
  return os.str();
}

RunConfig RunConfig::from_text(std::string_view text) {
  RunConfig cfg;
  auto& e = cfg.model.encoder;
  auto& d = cfg.model.decoder;
  for (const auto& [key, v] : parse_key_values(text)) {
    if (key.rfind("state.", 0) == 0) continue;
    if (key == "d_model") {
      e.d = d.d = parse_size(key, v);
    } else if (key == "d_state") {
      e.d_state = parse_size(key, v);
    } else if (key == "d_conv") {
      e.d_conv = parse_size(key, v);
    } else if (key == "expand") {
      e.expand = parse_size(key, v);
    } else if (key == "encoder_layers") {
      e.n_layers = parse_size(key, v);
    } else if (key == "decoder_layers") {
      d.n_layers = parse_size(key, v);
    } else if (key == "heads") {
      d.heads = parse_size(key, v);
    } else if (key == "d_ff") {
      d.d_ff = parse_size(key, v);
    } else if (key == "dropout") {
      d.dropout = parse_double(key, v);
    } else if (key == "vocab_size") {
      d.vocab_size = parse_size(key, v);
    } else if (key == "max_len") {
      d.max_len = parse_size(key, v);
    } else if (key == "feature_dim") {
      cfg.model.feature_dim = parse_size(key, v);
    } else if (key == "lr_visual") {
      cfg.train.lr_visual = parse_double(key, v);
    } else if (key == "lr_other") {
      cfg.train.lr_other = parse_double(key, v);
    } else if (key == "lr_decay") {
      cfg.train.decay = parse_double(key, v);
    } else if (key == "epochs") {
      cfg.train.epochs = parse_size(key, v);
    } else if (key == "batch_size") {
      cfg.train.batch_size = parse_size(key, v);
    } else if (key == "seed") {
      cfg.train.seed = parse_u64(key, v);
    } else if (key == "beam_size") {
      cfg.generation.beam_size = parse_size(key, v);
    } else if (key == "length_norm") {
      cfg.generation.length_norm = parse_double(key, v);
    } else if (key == "min_freq") {
      cfg.data.min_freq = parse_size(key, v);
    } else if (key == "image_patch") {
      cfg.data.image_patch = parse_size(key, v);
    } else {
      raise(ErrorCategory::kConfig, "unknown config key '" + key + "'");
    }
  }
  cfg.train.validate();
  if (cfg.generation.beam_size == 0) raise(ErrorCategory::kConfig, "beam_size must be positive");
  if (cfg.data.image_patch == 0) raise(ErrorCategory::kConfig, "image_patch must be positive");
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    raise(ErrorCategory::kConfigNotFound, "config file " + path.string() + " not found");
  }
  return from_text(read_file(path));
}

}  // namespace ssmgen
