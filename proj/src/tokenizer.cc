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

#include "ssmgen/tokenizer.h"

#include <algorithm>
#include <map>
#include <sstream>

#include "ssmgen/errors.h"
#include "ssmgen/file_util.h"

namespace ssmgen {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(c);
    } else if (c == '.') {
      flush();
      tokens.emplace_back(".");
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary() {
  for (std::string_view m : kSpecialMarkers) add(std::string(m));
}

void Vocabulary::add(std::string token) {
  token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
  id_to_token_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t min_freq) {
  std::map<std::string, std::size_t> freq;
  for (const std::string& t : texts)
    for (std::string& tok : tokenize(t)) ++freq[std::move(tok)];
  if (freq.empty()) raise(ErrorCategory::kContract, "cannot build a vocabulary from empty text");

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  // freq is alphabetical already; a stable sort on count keeps that for ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (auto& [tok, n] : ranked) {
    if (n >= min_freq && !vocab.token_to_id_.contains(tok)) vocab.add(tok);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() < 4) {
    raise(ErrorCategory::kSchema, path.string() + ": vocabulary lacks the special markers");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (lines[i] != kSpecialMarkers[i]) {
      raise(ErrorCategory::kSchema, path.string() + ": line " + std::to_string(i + 1) +
                                        " must be " + std::string(kSpecialMarkers[i]));
    }
  }
  Vocabulary vocab;
  for (std::size_t i = 4; i < lines.size(); ++i) {
    if (lines[i].empty() || vocab.token_to_id_.contains(lines[i])) {
      raise(ErrorCategory::kSchema,
            path.string() + ": line " + std::to_string(i + 1) + " is empty or a duplicate");
    }
    vocab.add(lines[i]);
  }
  return vocab;
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (const std::string& t : id_to_token_) {
    out += t;
    out += '\n';
  }
  return out;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    raise(ErrorCategory::kVocabulary, "token id " + std::to_string(id) + " outside vocabulary");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

TokenSequence Vocabulary::encode(std::string_view text, std::size_t max_len) const {
  if (max_len < 2) raise(ErrorCategory::kLength, "max_len must leave room for BOS and EOS");
  TokenSequence out{kBosId};
  for (const std::string& tok : tokenize(text)) {
    if (out.size() >= max_len - 1) break;
    out.push_back(id(tok));
  }
  out.push_back(kEosId);
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

}  // namespace ssmgen
