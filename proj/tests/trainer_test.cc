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

#include <cmath>
#include <filesystem>
#include <limits>

#include "ssmgen/errors.h"
#include "ssmgen/ops.h"
#include "ssmgen/trainer.h"
#include "test_util.h"

namespace ssmgen {
namespace {

using testing::make_synthetic_task;
using testing::SyntheticTask;

TEST(LearningRateTest, DecaysPerEpoch) {
  const TrainConfig cfg;
  const LearningRates e0 = lr_at_epoch(cfg, 0);
  EXPECT_DOUBLE_EQ(e0.visual, 5e-5);
  EXPECT_DOUBLE_EQ(e0.other, 1e-4);
  const LearningRates e1 = lr_at_epoch(cfg, 1);
  EXPECT_NEAR(e1.visual, 4e-5, 1e-18);
  EXPECT_NEAR(e1.other, 8e-5, 1e-18);
  TrainConfig flat;
  flat.decay = 1.0;
  EXPECT_EQ(lr_at_epoch(flat, 100).other, flat.lr_other);
}

class TrainerTest : public ::testing::Test {
 protected:
  TrainerTest() : task_(make_synthetic_task(16, 7)) {}
  Trainer fresh() const {
    return Trainer(task_.config, ReportModel::create(task_.config.model, task_.config.train.seed));
  }
  SyntheticTask task_;
};

TEST_F(TrainerTest, LossStrictlyDecreasesOverFirstEpochs) {
  Trainer t = fresh();
  double previous_eval = t.evaluate_loss(task_.samples);
  double previous_train = std::numeric_limits<double>::infinity();
  for (int e = 0; e < 5; ++e) {
    const EpochLog log = t.run_epoch(task_.samples, {});
    const double eval = t.evaluate_loss(task_.samples);
    EXPECT_LT(log.train_loss, previous_train) << "epoch " << e;
    EXPECT_LT(eval, previous_eval) << "epoch " << e;
    previous_train = log.train_loss;
    previous_eval = eval;
  }
}

TEST_F(TrainerTest, SameSeedGivesBitIdenticalCurves) {
  Trainer a = fresh(), b = fresh();
  const auto la = a.train(task_.samples, {});
  const auto lb = b.train(task_.samples, {});
  ASSERT_EQ(la.size(), 5u);
  for (std::size_t i = 0; i < la.size(); ++i) EXPECT_EQ(la[i].train_loss, lb[i].train_loss);
}

TEST_F(TrainerTest, DropoutRunsAreDeterministicToo) {
  SyntheticTask task = task_;
  task.config.model.decoder.dropout = 0.1;
  task.config.train.epochs = 2;
  Trainer a(task.config, ReportModel::create(task.config.model, 1));
  Trainer b(task.config, ReportModel::create(task.config.model, 1));
  const auto la = a.train(task.samples, {});
  const auto lb = b.train(task.samples, {});
  EXPECT_EQ(la.back().train_loss, lb.back().train_loss);
}

TEST_F(TrainerTest, ResumeMatchesUninterruptedRun) {
  Trainer straight = fresh();
  straight.run_epoch(task_.samples, {});
  straight.run_epoch(task_.samples, {});
  const auto path = std::filesystem::temp_directory_path() / "ssmgen_resume.ckpt";
  save_checkpoint(path, straight.checkpoint());
  const EpochLog next = straight.run_epoch(task_.samples, {});

  Trainer resumed = Trainer::restore(load_checkpoint(path));
  EXPECT_EQ(resumed.epoch(), 2u);
  const EpochLog again = resumed.run_epoch(task_.samples, {});
  EXPECT_EQ(again.train_loss, next.train_loss);
  EXPECT_EQ(encode_checkpoint(resumed.checkpoint()), encode_checkpoint(straight.checkpoint()));
}

TEST_F(TrainerTest, CheckpointCarriesTrainerState) {
  Trainer t = fresh();
  t.run_epoch(task_.samples, {});
  const Checkpoint c = t.checkpoint();
  EXPECT_NE(c.config_text.find("state.epoch = 1"), std::string::npos);
  EXPECT_EQ(c.optimizer.size(), 2 * c.params.size() + 1);
  EXPECT_EQ(c.optimizer.front().name, "m." + c.params.front().name);
  const Trainer back = Trainer::restore(c);
  EXPECT_EQ(back.optimizer().step, t.optimizer().step);
  EXPECT_EQ(back.optimizer().v, t.optimizer().v);
}

TEST_F(TrainerTest, RestoreRejectsForeignOptimizerState) {
  Trainer t = fresh();
  t.run_epoch(task_.samples, {});
  Checkpoint c = t.checkpoint();
  c.optimizer.pop_back();
  try {
    Trainer::restore(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kShapeMismatch);
  }
}

TEST_F(TrainerTest, NonFiniteLossNamesTheBatch) {
  std::vector<TrainingSample> samples = task_.samples;
  samples[3].features.mutable_data()[0] = std::numeric_limits<double>::quiet_NaN();
  Trainer t = fresh();
  try {
    t.run_epoch(samples, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kNumeric);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 0 batch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("r3"), std::string::npos) << msg;
  }
}

TEST_F(TrainerTest, ValidationKeepsBestCheckpoint) {
  SyntheticTask task = task_;
  task.config.train.epochs = 6;
  Trainer t(task.config, ReportModel::create(task.config.model, 7));
  const std::vector<TrainingSample> val(task.samples.begin(), task.samples.begin() + 4);
  const auto logs = t.train(task.samples, val);
  double best = -1;
  std::size_t best_epoch = 0;
  for (const EpochLog& l : logs) {
    ASSERT_TRUE(l.val_bleu4.has_value());
    if (*l.val_bleu4 > best) {
      best = *l.val_bleu4;
      best_epoch = l.epoch;
    }
  }
  EXPECT_EQ(t.best_bleu4(), best);
  ASSERT_TRUE(t.best().has_value());
  EXPECT_NE(t.best()->config_text.find("state.epoch = " + std::to_string(best_epoch + 1)),
            std::string::npos);
  const Trainer restored = Trainer::restore(*t.best());
  EXPECT_EQ(restored.validation_bleu4(val), best);
}

TEST_F(TrainerTest, LossIsMeanNegativeLogLikelihood) {
  Trainer t = fresh();
  t.run_epoch(task_.samples, {});
  const std::vector<TrainingSample> batch(task_.samples.begin(), task_.samples.begin() + 4);
  // -(1/N) sum_t log p(y_t | y_<t, features) from one-step decoding.
  double log_p = 0;
  std::size_t n = 0;
  for (const TrainingSample& s : batch) {
    const Tensor memory = t.model().memory(s.features);
    for (std::size_t k = 1; k < s.tokens.size(); ++k) {
      const Tensor logits =
          t.model().decoder().decode_logits(memory, std::span(s.tokens).first(k));
      double z = 0;
      for (double l : logits.data()) z += std::exp(l);
      log_p += logits.at(static_cast<std::size_t>(s.tokens[k])) - std::log(z);
      ++n;
    }
  }
  EXPECT_NEAR(t.evaluate_loss(batch), -log_p / n, 1e-6);
}

TEST(ModelGradientTest, FullLossSpotChecks) {
  SyntheticTask task = make_synthetic_task(2, 3);
  task.config.model.encoder.d = 16;
  task.config.model.encoder.d_state = 4;
  task.config.model.decoder.d = 16;
  task.config.model.decoder.d_ff = 32;
  const ReportModel model = ReportModel::create(task.config.model, 3);
  NamedParameters params = model.parameters();
  std::vector<Tensor> inputs;
  for (auto& [_, p] : params) inputs.push_back(p);
  Rng rng(5);
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (int i = 0; i < 20; ++i) {
    const std::size_t k = rng.below(inputs.size());
    picks.emplace_back(k, rng.below(inputs[k].numel()));
  }
  const TrainingSample& s = task.samples[0];
  auto f = [&] {
    const Tensor logits = model.teacher_forced_logits(model.memory(s.features), s.tokens, {});
    return nll_loss(logits, std::span(s.tokens).subspan(1));
  };
  const auto r = testing::check_gradients(f, inputs, 1e-6, 1e-3, picks);
  EXPECT_EQ(r.checked, 20u);
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

TEST(IdTokensTest, DropsSpecialIds) {
  EXPECT_EQ(id_tokens(std::vector<TokenId>{kBosId, 7, kUnkId, 12, kEosId}),
            (std::vector<std::string>{"7", "12"}));
}

}  // namespace
}  // namespace ssmgen
