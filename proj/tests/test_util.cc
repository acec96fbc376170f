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

#include "test_util.h"

#include "ssmgen/ops.h"

namespace ssmgen::testing {

Tensor weighted_probe(const Tensor& y, std::uint64_t seed) {
  Rng rng(seed);
  const Tensor w = random_tensor(y.shape(), rng, -1.0, 1.0, false);
  return sum(mul(y, w));
}

}  // namespace ssmgen::testing

namespace ssmgen::testing {

SyntheticTask make_synthetic_task(std::size_t pairs, std::uint64_t seed) {
  static const char* const kWords[] = {
      "heart",  "size",    "normal", "lungs",   "clear",  "no",      "effusion", "pleural",
      "focal",  "opacity", "mild",   "stable",  "right",  "left",    "lower",    "lobe",
      "is",     "are",     "within", "limits",  "small",  "cardiac", "silhouette", "enlarged",
      "there",  "acute",   "disease", "process", "osseous", "intact", "degenerative", "spine",
      "."};
  constexpr std::size_t kNumWords = sizeof(kWords) / sizeof(kWords[0]);
  Rng rng(seed);
  SyntheticTask task;
  RunConfig& cfg = task.config;
  cfg.model.feature_dim = 16;
  cfg.model.encoder.d = 64;
  cfg.model.encoder.d_state = 8;
  cfg.model.encoder.n_layers = 1;
  cfg.model.decoder.d = 64;
  cfg.model.decoder.n_layers = 2;
  cfg.model.decoder.heads = 4;
  cfg.model.decoder.d_ff = 128;
  cfg.model.decoder.dropout = 0.0;
  cfg.model.decoder.max_len = 16;
  cfg.train.lr_visual = 2e-3;
  cfg.train.lr_other = 2e-3;
  cfg.train.decay = 0.97;
  cfg.train.batch_size = 4;
  cfg.train.epochs = 5;
  cfg.train.seed = seed;
  cfg.data.min_freq = 1;

  for (std::size_t i = 0; i < pairs; ++i) {
    std::string report;
    const std::size_t len = 4 + rng.below(7);
    for (std::size_t k = 0; k < len; ++k) {
      report += (k ? " " : "") + std::string(kWords[rng.below(kNumWords)]);
    }
    task.reports.push_back(report);
  }
  task.vocab = Vocabulary::build(task.reports, 1);
  cfg.model.decoder.vocab_size = task.vocab.size();
  for (std::size_t i = 0; i < pairs; ++i) {
    task.samples.push_back({"r" + std::to_string(i),
                            random_tensor({4, cfg.model.feature_dim}, rng, -1.0, 1.0, false),
                            task.vocab.encode(task.reports[i], cfg.max_len())});
  }
  return task;
}

}  // namespace ssmgen::testing
