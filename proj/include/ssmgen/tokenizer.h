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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssmgen/model.h"

namespace ssmgen {

// Lowercases, maps every character outside [a-z0-9 .] to a space, splits
// "." into its own token and splits on whitespace.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  // Special entries only.
  Vocabulary();

  // Tokens seen at least min_freq times, most frequent first, ties in
  // alphabetical order. Raises a contract error when the texts hold no tokens.
  static Vocabulary build(const std::vector<std::string>& texts, std::size_t min_freq);

  // One token per line; line i holds id i. The first four lines are the
  // special markers.
  static Vocabulary load(const std::filesystem::path& path);
  std::string to_text() const;

  std::size_t size() const { return id_to_token_.size(); }
  TokenId id(std::string_view token) const;  // kUnkId when unknown
  const std::string& token(TokenId id) const;

  // BOS + ids (UNK for OOV) truncated to max_len - 2 + EOS.
  TokenSequence encode(std::string_view text, std::size_t max_len) const;
  // Drops BOS/EOS/PAD and joins with single spaces.
  std::string decode(std::span<const TokenId> ids) const;

 private:
  void add(std::string token);
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

inline constexpr std::string_view kSpecialMarkers[] = {"<pad>", "<bos>", "<eos>", "<unk>"};

}  // namespace ssmgen
