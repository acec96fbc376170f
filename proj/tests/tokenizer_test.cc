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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ssmgen/errors.h"
#include "ssmgen/file_util.h"
#include "ssmgen/rng.h"
#include "ssmgen/tokenizer.h"

namespace ssmgen {
namespace {

using Tokens = std::vector<std::string>;

std::string join(const Tokens& t) {
  std::string out;
  for (const auto& s : t) out += (out.empty() ? "" : " ") + s;
  return out;
}

TEST(TokenizeTest, Rules) {
  EXPECT_EQ(tokenize("No acute disease."), (Tokens{"no", "acute", "disease", "."}));
  EXPECT_EQ(tokenize("X-ray:  clear"), (Tokens{"x", "ray", "clear"}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("  \t\n"), Tokens{});
  EXPECT_EQ(tokenize("Size 3.5cm..."), (Tokens{"size", "3", ".", "5cm", ".", ".", "."}));
  EXPECT_EQ(tokenize("caf\xc3\xa9 ok"), (Tokens{"caf", "ok"}));
}

TEST(TokenizeTest, IdempotentOnRandomReports) {
  Rng rng(3);
  const std::string alphabet = "abcXYZ019 .,;:-/()\t\nEe";
  for (int i = 0; i < 100; ++i) {
    std::string text;
    const std::size_t n = rng.below(80);
    for (std::size_t k = 0; k < n; ++k) text += alphabet[rng.below(alphabet.size())];
    const Tokens once = tokenize(text);
    EXPECT_EQ(tokenize(join(once)), once) << text;
  }
}

TEST(VocabularyTest, SpecialIdsAreFixed) {
  const Vocabulary v;
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.token(kPadId), "<pad>");
  EXPECT_EQ(v.token(kBosId), "<bos>");
  EXPECT_EQ(v.token(kEosId), "<eos>");
  EXPECT_EQ(v.token(kUnkId), "<unk>");
}

TEST(VocabularyTest, ThresholdBoundary) {
  const std::vector<std::string> texts(3, "heart size normal");
  const Vocabulary v = Vocabulary::build(texts, 3);
  EXPECT_EQ(v.size(), 7u);
  const Vocabulary w = Vocabulary::build({"heart size normal", "heart"}, 3);
  EXPECT_EQ(w.size(), 4u);
}

TEST(VocabularyTest, FrequencyThenAlphabetical) {
  const Vocabulary v = Vocabulary::build({"b a c c", "c a b d"}, 1);
  // c:3, a:2, b:2, d:1
  EXPECT_EQ(v.token(4), "c");
  EXPECT_EQ(v.token(5), "a");
  EXPECT_EQ(v.token(6), "b");
  EXPECT_EQ(v.token(7), "d");
}

TEST(VocabularyTest, EmptyCorpusIsContractError) {
  try {
    Vocabulary::build({"", "  ,;"}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kContract);
  }
}

TEST(VocabularyTest, EncodeDecode) {
  const Vocabulary v = Vocabulary::build({"lungs are clear .", "lungs clear"}, 1);
  EXPECT_EQ(v.encode("", 10), (TokenSequence{kBosId, kEosId}));
  EXPECT_EQ(v.encode("zebra giraffe", 10), (TokenSequence{kBosId, kUnkId, kUnkId, kEosId}));
  const TokenSequence ids = v.encode("Lungs are clear.", 10);
  EXPECT_EQ(ids.size(), 6u);
  EXPECT_EQ(v.decode(ids), "lungs are clear .");
  const TokenSequence cut = v.encode("lungs are clear . lungs", 4);
  EXPECT_EQ(cut.size(), 4u);
  EXPECT_EQ(cut.back(), kEosId);
  EXPECT_EQ(v.decode(cut), "lungs are");
  EXPECT_EQ(v.decode(TokenSequence{kBosId, kEosId}), "");
}

TEST(VocabularyTest, RoundTripOverCorpus) {
  const std::vector<std::string> corpus{"The heart is normal in size.", "No pleural effusion.",
                                        "Mild cardiomegaly; lungs clear."};
  const Vocabulary v = Vocabulary::build(corpus, 1);
  for (const auto& text : corpus) EXPECT_EQ(v.decode(v.encode(text, 60)), join(tokenize(text)));
}

TEST(VocabularyTest, FileRoundTripAndSchema) {
  const auto dir = std::filesystem::temp_directory_path() / "ssmgen_tokenizer_test";
  std::filesystem::create_directories(dir);
  const Vocabulary v = Vocabulary::build({"a b b c c c"}, 1);
  atomic_write(dir / "vocab.txt", v.to_text());
  const Vocabulary back = Vocabulary::load(dir / "vocab.txt");
  EXPECT_EQ(back.to_text(), v.to_text());
  EXPECT_EQ(back.id("c"), 4);

  std::ofstream(dir / "bad.txt") << "<pad>\n<eos>\n<bos>\n<unk>\nx\n";
  EXPECT_THROW(Vocabulary::load(dir / "bad.txt"), Error);
  std::ofstream(dir / "dup.txt") << "<pad>\n<bos>\n<eos>\n<unk>\nx\nx\n";
  EXPECT_THROW(Vocabulary::load(dir / "dup.txt"), Error);
}

}  // namespace
}  // namespace ssmgen
