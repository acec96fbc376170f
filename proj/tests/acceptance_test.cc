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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.h"
#include "ssmgen/beam_search.h"
#include "ssmgen/checkpoint.h"
#include "ssmgen/file_util.h"
#include "ssmgen/metrics.h"
#include "ssmgen/op_counter.h"
#include "ssmgen/ops.h"
#include "ssmgen/profiler.h"
#include "ssmgen/ssm.h"
#include "ssmgen/tokenizer.h"
#include "ssmgen/trainer.h"
#include "test_util.h"

namespace ssmgen {
namespace {

using testing::check_gradients;
using testing::random_tensor;
using testing::weighted_probe;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed check; the first few reasons go into the detail line.
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << " failed:";
    if (++failures <= 3) detail << " " << what << ";";
    pass = false;
  }
  int failures = 0;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Criterion 1 -----------------------------------------------------------------

void scan_oracle(Outcome& o) {
  Rng rng(2024);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s = 1 + rng.below(16), ch = 1 + rng.below(8), n = 1 + rng.below(4);
    const Tensor a = random_tensor({ch, n}, rng, -2.0, -0.05, false);
    const Tensor b = random_tensor({s, n}, rng, -1.0, 1.0, false);
    const Tensor delta = random_tensor({s, ch}, rng, 0.01, 1.0, false);
    const ZohResult z = discretize_zoh(a, b, delta);
    const Tensor c = random_tensor({s, n}, rng, -1.0, 1.0, false);
    const Tensor u = random_tensor({s, ch}, rng, -1.0, 1.0, false);
    const Tensor d = random_tensor({ch}, rng, -1.0, 1.0, false);
    const std::vector<double> want = testing::unrolled_scan(z.a_bar, z.b_bar, c, u, d);
    const Tensor got = selective_scan(z.a_bar, z.b_bar, c, u, d);
    for (std::size_t k = 0; k < want.size(); ++k) {
      worst = std::max(worst, std::abs(got.data()[k] - want[k]));
    }
  }
  o.detail << "200 instances, max_abs_err=" << num(worst);
  o.expect(worst < 1e-10, "error above 1e-10");
}

// Criterion 2 -----------------------------------------------------------------

void zoh_closed_forms(Outcome& o) {
  const ZohScalar zero = discretize_zoh_scalar(0.0, 0.7, 0.3);
  o.expect(zero.a_bar == 1.0, "a=0 gives abar != 1");
  o.expect(zero.b_bar == 0.3 * 0.7, "a=0 gives bbar != delta*b");
  const ZohScalar half = discretize_zoh_scalar(-1.0, 1.0, std::log(2.0));
  o.expect(std::abs(half.a_bar - 0.5) < 1e-12, "abar(-1, ln 2) != 0.5");
  o.expect(std::abs(half.b_bar - 0.5) < 1e-12, "bbar(-1, ln 2) != 0.5");

  // Elementwise tensor path against exp(da) and (exp(da) - 1) / a * b, with
  // one zero-decay row exercising the limit branch.
  Rng rng(5);
  Tensor a = random_tensor({3, 4}, rng, -2.0, -0.1, false);
  a.mutable_data()[0] = 0.0;
  const Tensor b = random_tensor({5, 4}, rng, -1.0, 1.0, false);
  const Tensor delta = random_tensor({5, 3}, rng, 0.01, 0.8, false);
  const ZohResult z = discretize_zoh(a, b, delta);
  double worst = 0;
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const double av = a.at(i, j), dt = delta.at(t, i), bv = b.at(t, j);
        const double want_a = std::exp(dt * av);
        const double want_b = av == 0.0 ? dt * bv : (want_a - 1.0) / av * bv;
        worst = std::max({worst, std::abs(z.a_bar.at(t, i, j) - want_a),
                          std::abs(z.b_bar.at(t, i, j) - want_b)});
      }
  o.expect(worst < 1e-12, "elementwise mismatch " + num(worst));
  o.detail << "limit branch exact, ln2 case |err|=" << num(std::abs(half.a_bar - 0.5))
           << ", elementwise max_err=" << num(worst);
}

// Criterion 3 -----------------------------------------------------------------

void gradient_suite(Outcome& o) {
  double ops_worst = 0;
  std::size_t n_ops = 0;
  auto check = [&](const std::string& name, const std::function<Tensor()>& f,
                   const std::vector<Tensor>& inputs, double h = 1e-6,
                   const std::vector<std::pair<std::size_t, std::size_t>>& picks = {}) {
    const auto r = check_gradients(f, inputs, h, 1e-3, picks);
    ops_worst = std::max(ops_worst, r.max_rel_error);
    ++n_ops;
    o.expect(r.max_rel_error < 1e-4 && r.checked > 0, name + " rel_err=" + num(r.max_rel_error));
  };

  for (const testing::OpCase& c : testing::op_cases()) {
    Rng rng(17);
    std::vector<Tensor> inputs;
    for (const Shape& s : c.shapes) inputs.push_back(random_tensor(s, rng, c.lo, c.hi));
    check(c.name, [&] { return weighted_probe(c.op(inputs)); }, inputs);
  }

  Rng rng(21);
  for (const auto& [lo, hi, h] : {std::tuple{-2.0, -0.2, 1e-6}, std::tuple{-1e-4, -1e-5, 1e-7}}) {
    Tensor a = random_tensor({2, 3}, rng, lo, hi);
    Tensor b = random_tensor({3, 3}, rng);
    Tensor delta = random_tensor({3, 2}, rng, 0.05, 0.6);
    auto f = [&] {
      const ZohResult z = discretize_zoh(a, b, delta);
      return add(weighted_probe(z.a_bar, 1), weighted_probe(z.b_bar, 2));
    };
    check("discretize_zoh", f, {a, b, delta}, h);
  }
  {
    Tensor a_bar = random_tensor({4, 3, 2}, rng, 0.1, 0.9);
    Tensor b_bar = random_tensor({4, 3, 2}, rng);
    Tensor c = random_tensor({4, 2}, rng);
    Tensor u = random_tensor({4, 3}, rng);
    Tensor d = random_tensor({3}, rng);
    check("selective_scan", [&] { return weighted_probe(selective_scan(a_bar, b_bar, c, u, d)); },
          {a_bar, b_bar, c, u, d});
  }
  {
    Tensor x = random_tensor({5, 3}, rng);
    Tensor w = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({3}, rng);
    check("causal_conv1d", [&] { return weighted_probe(causal_conv1d(x, w, b)); }, {x, w, b});
  }
  {
    EncoderConfig cfg;
    cfg.d = 16;
    cfg.d_state = 4;
    cfg.d_conv = 3;
    cfg.n_layers = 1;
    const MambaBlock block = MambaBlock::create(cfg, rng);
    Tensor x = random_tensor({5, 16}, rng);
    NamedParameters params;
    block.collect("b", params);
    std::vector<Tensor> inputs{x};
    for (auto& [_, p] : params) inputs.push_back(p);
    std::vector<std::pair<std::size_t, std::size_t>> picks;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      for (int k = 0; k < 3; ++k) picks.emplace_back(i, rng.below(inputs[i].numel()));
    }
    check("mamba_block", [&] { return weighted_probe(block.forward(x)); }, inputs, 1e-6, picks);
  }

  // Composed encoder-decoder loss, 20 random scalar parameters.
  testing::SyntheticTask task = testing::make_synthetic_task(2, 3);
  task.config.model.encoder.d = 16;
  task.config.model.encoder.d_state = 4;
  task.config.model.decoder.d = 16;
  task.config.model.decoder.d_ff = 32;
  const ReportModel model = ReportModel::create(task.config.model, 3);
  std::vector<Tensor> params;
  for (auto& [_, p] : model.parameters()) params.push_back(p);
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (int i = 0; i < 20; ++i) {
    const std::size_t k = rng.below(params.size());
    picks.emplace_back(k, rng.below(params[k].numel()));
  }
  const TrainingSample& s = task.samples[0];
  const auto full = check_gradients(
      [&] {
        const Tensor logits = model.teacher_forced_logits(model.memory(s.features), s.tokens, {});
        return nll_loss(logits, std::span(s.tokens).subspan(1));
      },
      params, 1e-6, 1e-3, picks);
  o.expect(full.checked == 20 && full.max_rel_error < 1e-3,
           "full model rel_err=" + num(full.max_rel_error));
  o.detail << n_ops << " op checks max_rel_err=" << num(ops_worst) << ", full model " << full.checked
           << " params max_rel_err=" << num(full.max_rel_error);
}

// Criterion 4 -----------------------------------------------------------------

void memorization(Outcome& o) {
  testing::SyntheticTask task = testing::make_synthetic_task(16, 7);
  task.config.train.epochs = 80;
  Trainer trainer(task.config, ReportModel::create(task.config.model, task.config.train.seed));
  trainer.train(task.samples, {});
  const double loss = trainer.evaluate_loss(task.samples);
  std::size_t exact = 0;
  std::vector<TokenizedPair> corpus;
  for (const TrainingSample& s : task.samples) {
    const TokenSequence out = trainer.greedy(s.features);
    exact += out == s.tokens;
    corpus.push_back({id_tokens(out), id_tokens(s.tokens)});
  }
  const double bleu4 = bleu(corpus, 4).back();
  o.expect(task.vocab.size() <= 50, "vocab above 50");
  o.expect(loss < 0.05, "loss " + num(loss));
  o.expect(exact == 16, std::to_string(exact) + "/16 exact");
  o.expect(bleu4 == 1.0, "bleu4 " + num(bleu4));
  o.detail << "d=" << task.config.model.decoder.d << " vocab=" << task.vocab.size()
           << " epochs=80 loss=" << num(loss) << " exact=" << exact << "/16 bleu4=" << bleu4;
}

// Criterion 5 -----------------------------------------------------------------

void beam_oracle(Outcome& o) {
  constexpr std::size_t kSeeds = 200;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    testing::HashedModel m(4, seed);
    const std::string tag = "seed " + std::to_string(seed);
    for (double norm : {0.0, 0.7}) {
      const Hypothesis want = testing::exhaustive_best(m, 3, norm);
      const Hypothesis got = beam_search(m, {64, 3, norm});
      o.expect(got.tokens == want.tokens && std::abs(got.log_prob - want.log_prob) < 1e-12,
               tag + " beam 64 != exhaustive");
      double previous = -INFINITY;
      for (std::size_t b : {1u, 2u, 4u, 64u}) {
        const double score = normalized_score(beam_search(m, {b, 3, norm}), norm);
        o.expect(score >= previous, tag + " score drops at B=" + std::to_string(b));
        previous = score;
      }
    }
    o.expect(beam_search(m, {1, 3, 0.0}).tokens == greedy_decode(m, 3).tokens,
             tag + " beam 1 != greedy");
  }
  o.detail << kSeeds << " toy models (vocab 4, max_len 3), length_norm {0, 0.7}";
}

// Criterion 6 -----------------------------------------------------------------

void complexity(Outcome& o) {
  const EncoderConfig enc;
  const TransformerEncoderConfig tf;
  const EncoderComparison cmp = compare_encoders(enc, tf, kDefaultProfileSeqLen);
  o.expect(enc.d == 512 && tf.d == 512, "operating point is not d=512");
  o.expect(cmp.mamba.params < cmp.transformer.params, "mamba params not below transformer");
  o.expect(cmp.mamba.flops < cmp.transformer.flops, "mamba flops not below transformer");

  const ComponentDescription mamba = describe_mamba_encoder(enc);
  const ComponentDescription transformer = describe_transformer_encoder(tf);
  const auto f = [&](std::uint64_t s) { return static_cast<std::int64_t>(count_flops(mamba, s)); };
  for (const auto& [s1, s2, s3] : {std::tuple{1, 2, 3}, std::tuple{49, 98, 196}, std::tuple{7, 50, 1000}}) {
    // Third point against the line through the first two, in exact integers.
    const std::int64_t residual = (f(s3) - f(s1)) * (s2 - s1) - (f(s2) - f(s1)) * (s3 - s1);
    o.expect(residual == 0, "mamba flops not affine");
  }
  for (std::uint64_t s = 32; s <= 8192; s *= 2) {
    const double ratio = static_cast<double>(count_flops(transformer, 2 * s)) / count_flops(transformer, s);
    o.expect(ratio > 2.0, "transformer ratio " + num(ratio) + " at S=" + std::to_string(s));
  }

  Rng rng(6);
  const MambaEncoder live_mamba = MambaEncoder::create(enc, rng);
  const TransformerEncoderBaseline live_tf = TransformerEncoderBaseline::create(tf, rng);
  const Tensor x = random_tensor({kDefaultProfileSeqLen, enc.d}, rng, -1, 1, false);
  double worst = 0;
  {
    NoGradGuard no_grad;
    ScopedFlopCount scope;
    for (const auto& [desc, run] :
         {std::pair<const ComponentDescription*, std::function<void()>>{&mamba, [&] { live_mamba.encode(x); }},
          {&transformer, [&] { live_tf.encode(x); }}}) {
      const CountValidation v = validate_counts(*desc, kDefaultProfileSeqLen, run);
      o.expect(!v.skipped && v.passed, desc->name + " counter check");
      worst = std::max(worst, std::abs(static_cast<double>(v.measured.total()) - v.analytic.total()) /
                                  v.analytic.total());
    }
  }

  const std::string table = format_comparison_table(cmp);
  o.expect(table.find("594,944") != std::string::npos && table.find("58,216,000") != std::string::npos &&
               table.find("4,728,000") != std::string::npos &&
               table.find("462,422,000") != std::string::npos,
           "reference columns missing");
  std::printf("%s", table.c_str());
  o.detail << "S=98 params " << cmp.mamba.params << " < " << cmp.transformer.params << ", flops "
           << cmp.mamba.flops << " < " << cmp.transformer.flops << ", affine residual 0, counter max_rel="
           << num(worst);
}

// Criterion 7 -----------------------------------------------------------------

void metric_goldens(Outcome& o) {
  constexpr double kTol = 1e-9;
  auto pair = [](const std::string& p, const std::string& r) {
    return TokenizedPair{tokenize(p), tokenize(r)};
  };
  const std::vector<TokenizedPair> identity{pair("the heart is normal in size", "the heart is normal in size"),
                                            pair("no acute disease", "no acute disease")};
  const std::vector<double> b = bleu(identity, 4);
  for (std::size_t n = 0; n < b.size(); ++n) {
    o.expect(std::abs(b[n] - 1.0) < kTol, "identity bleu" + std::to_string(n + 1));
  }
  o.expect(std::abs(rouge_l(identity) - 1.0) < kTol, "identity rouge_l");
  const NgramPrecision p = modified_precision({pair("the the the the the the the", "the cat is on the mat")}, 1);
  o.expect(std::abs(p.value() - 2.0 / 7.0) < kTol, "clipped precision " + num(p.value()));
  const double m = meteor({pair("a b c d", "a b c d")});
  o.expect(std::abs(m - 0.9921875) < kTol, "meteor " + num(m));

  auto labels = [](const char* bits) {
    LabelVector v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = bits[i] == '1';
    return v;
  };
  const CeScores ce = ce_metrics({labels("11100000000000"), labels("00000000000000")},
                                 {labels("11010000000000"), labels("00000000000001")});
  o.expect(std::abs(ce.precision - 2.0 / 3.0) < kTol && std::abs(ce.recall - 0.5) < kTol &&
               std::abs(ce.f1 - 4.0 / 7.0) < kTol,
           "ce contingency");
  o.detail << "bleu1-4=1 rouge_l=1 p1=2/7 meteor=" << m << " ce=(" << ce.precision << ", " << ce.recall
           << ", " << ce.f1 << ")";
}

// Criterion 8 -----------------------------------------------------------------

void persistence(Outcome& o) {
  namespace fs = std::filesystem;
  const testing::SyntheticTask task = testing::make_synthetic_task(8, 9);
  Trainer straight(task.config, ReportModel::create(task.config.model, task.config.train.seed));
  straight.run_epoch(task.samples, {});
  straight.run_epoch(task.samples, {});

  const fs::path a = fs::temp_directory_path() / "ssmgen_accept_a.ckpt";
  const fs::path b = fs::temp_directory_path() / "ssmgen_accept_b.ckpt";
  save_checkpoint(a, straight.checkpoint());
  save_checkpoint(b, load_checkpoint(a));
  const std::string bytes = read_file(a);
  o.expect(bytes == read_file(b), "save/load/save bytes differ");
  o.expect(bytes == encode_checkpoint(straight.checkpoint()), "file differs from encoding");

  Trainer resumed = Trainer::restore(load_checkpoint(b));
  const EpochLog want = straight.run_epoch(task.samples, {});
  const EpochLog got = resumed.run_epoch(task.samples, {});
  o.expect(want.train_loss == got.train_loss, "resumed epoch loss differs");
  o.expect(encode_checkpoint(straight.checkpoint()) == encode_checkpoint(resumed.checkpoint()),
           "resumed state differs");
  o.detail << bytes.size() << "-byte checkpoint round trip identical, resumed epoch loss "
           << num(got.train_loss) << " bit-equal";
  fs::remove(a);
  fs::remove(b);
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 means unbounded
  void (*run)(Outcome&);
};

const Criterion kCriteria[] = {
    {1, "ssm oracle equivalence", 10, scan_oracle},
    {2, "zoh correctness", 0, zoh_closed_forms},
    {3, "gradient suite", 120, gradient_suite},
    {4, "memorization run", 300, memorization},
    {5, "beam search oracle", 0, beam_oracle},
    {6, "complexity claim", 0, complexity},
    {7, "metric goldens", 0, metric_goldens},
    {8, "persistence", 0, persistence},
};

}  // namespace
}  // namespace ssmgen

int main() {
  using namespace ssmgen;
  int failed = 0;
  for (const Criterion& c : kCriteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0) o.expect(secs < c.budget_s, "over the " + num(c.budget_s) + " s budget");
    failed += !o.pass;
    std::printf("%s %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(kCriteria)) - failed, std::size(kCriteria));
  return failed == 0 ? 0 : 1;
}
