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

#include "ssmgen/cli.h"

#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssmgen/beam_search.h"
#include "ssmgen/checkpoint.h"
#include "ssmgen/config.h"
#include "ssmgen/dataset.h"
#include "ssmgen/errors.h"
#include "ssmgen/features.h"
#include "ssmgen/file_util.h"
#include "ssmgen/metrics.h"
#include "ssmgen/profiler.h"
#include "ssmgen/tokenizer.h"
#include "ssmgen/trainer.h"

namespace ssmgen {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> train_texts(const std::vector<DatasetRecord>& records) {
  std::vector<std::string> texts;
  for (const DatasetRecord* r : select_split(records, Split::kTrain)) texts.push_back(r->report);
  if (texts.empty()) raise(ErrorCategory::kSchema, "dataset has no train records");
  return texts;
}

// build-vocab ---------------------------------------------------------------

struct VocabArgs {
  std::string data, out;
  std::size_t min_freq = 3;
};

void cmd_build_vocab(const VocabArgs& a, std::ostream& out) {
  const Vocabulary vocab = Vocabulary::build(train_texts(load_dataset(a.data)), a.min_freq);
  atomic_write(a.out, vocab.to_text());
  out << "vocab_size=" << vocab.size() << "\n";
}

// train ---------------------------------------------------------------------

struct TrainArgs {
  std::string config, data, out, resume;
};

std::vector<TrainingSample> make_samples(const std::vector<const DatasetRecord*>& records,
                                         const Vocabulary& vocab, const RunConfig& cfg) {
  std::vector<TrainingSample> samples;
  for (const DatasetRecord* r : records) {
    samples.push_back({r->id, load_record_features(*r, cfg.data.image_patch),
                       vocab.encode(r->report, cfg.max_len())});
  }
  return samples;
}

std::string log_csv(const std::vector<EpochLog>& logs) {
  std::ostringstream csv;
  csv << "epoch,lr_visual,lr_other,train_loss,val_bleu4,best\n";
  csv.precision(10);
  for (const EpochLog& l : logs) {
    csv << l.epoch << ',' << l.lr.visual << ',' << l.lr.other << ',' << l.train_loss << ',';
    if (l.val_bleu4) csv << *l.val_bleu4;
    csv << ',' << (l.improved ? 1 : 0) << '\n';
  }
  return csv.str();
}

void cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
  const std::vector<DatasetRecord> records = load_dataset(a.data);
  const fs::path dir(a.out);
  fs::create_directories(dir);

  std::optional<Trainer> trainer;
  Vocabulary vocab;
  if (!a.resume.empty()) {
    trainer.emplace(Trainer::restore(load_checkpoint(a.resume)));
    // Only the epoch budget may change on resume.
    if (!a.config.empty()) trainer->set_epochs(cfg.train.epochs);
    cfg = trainer->config();
    vocab = Vocabulary::load(fs::path(a.resume).parent_path() / "vocab.txt");
    if (vocab.size() != cfg.model.decoder.vocab_size) {
      raise(ErrorCategory::kShapeMismatch, "vocabulary size does not match the checkpoint");
    }
  } else {
    vocab = Vocabulary::build(train_texts(records), cfg.data.min_freq);
    if (cfg.model.decoder.vocab_size != 0 && cfg.model.decoder.vocab_size != vocab.size()) {
      err << "note: vocab_size " << cfg.model.decoder.vocab_size << " replaced by "
          << vocab.size() << " from the training data\n";
    }
    cfg.model.decoder.vocab_size = vocab.size();
  }

  std::vector<TrainingSample> train = make_samples(select_split(records, Split::kTrain), vocab, cfg);
  if (train.empty()) raise(ErrorCategory::kSchema, "dataset has no train records");
  const std::vector<TrainingSample> val = make_samples(select_split(records, Split::kVal), vocab, cfg);
  const std::size_t width = train.front().features.dim(1);
  if (!trainer) {
    if (width != cfg.model.feature_dim) {
      err << "note: feature_dim " << cfg.model.feature_dim << " replaced by " << width
          << " from the training data\n";
      cfg.model.feature_dim = width;
    }
    cfg.model.validate();
    trainer.emplace(cfg, ReportModel::create(cfg.model, cfg.train.seed));
  }
  atomic_write(dir / "vocab.txt", vocab.to_text());

  std::vector<EpochLog> logs;
  trainer->train(train, val, [&](const EpochLog& log) {
    logs.push_back(log);
    save_checkpoint(dir / "last.ckpt", trainer->checkpoint());
    if (log.improved) save_checkpoint(dir / "best.ckpt", *trainer->best());
    atomic_write(dir / "train_log.csv", log_csv(logs));
    out << "epoch=" << log.epoch << " loss=" << fixed(log.train_loss);
    if (log.val_bleu4) out << " val_bleu4=" << fixed(*log.val_bleu4);
    out << (log.improved ? " best" : "") << "\n";
  });
  out << "epochs=" << trainer->epoch() << " out=" << dir.string() << "\n";
}

// generate ------------------------------------------------------------------

struct GenerateArgs {
  std::string ckpt, vocab, data, split = "test", out;
  std::vector<std::string> features, images;
  std::optional<std::size_t> beam, max_len;
  std::optional<double> length_norm;
};

void cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const RunConfig cfg = RunConfig::from_text(ckpt.config_text);
  ReportModel model = ReportModel::create(cfg.model, cfg.train.seed);
  restore_parameters(model.parameters(), ckpt.params);
  const fs::path vocab_path =
      a.vocab.empty() ? fs::path(a.ckpt).parent_path() / "vocab.txt" : fs::path(a.vocab);
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  if (vocab.size() != cfg.model.decoder.vocab_size) {
    raise(ErrorCategory::kShapeMismatch, "vocabulary has " + std::to_string(vocab.size()) +
                                             " entries, checkpoint expects " +
                                             std::to_string(cfg.model.decoder.vocab_size));
  }

  BeamSearchOptions opts;
  opts.beam_size = a.beam.value_or(cfg.generation.beam_size);
  const std::size_t max_len = a.max_len.value_or(cfg.max_len());
  if (opts.beam_size == 0) raise(ErrorCategory::kUsage, "--beam must be at least 1");
  if (max_len < 2 || max_len > cfg.max_len()) {
    raise(ErrorCategory::kUsage, "--max-len must be in [2, " + std::to_string(cfg.max_len()) + "]");
  }
  opts.max_len = max_len - 1;
  opts.length_norm = a.length_norm.value_or(cfg.generation.length_norm);

  auto generate = [&](const Tensor& raw) {
    NoGradGuard no_grad;
    ModelStepper stepper(model, model.memory(raw));
    return vocab.decode(beam_search(stepper, opts).tokens);
  };

  const bool single = !a.features.empty() || !a.images.empty();
  if (single == !a.data.empty()) {
    raise(ErrorCategory::kUsage, "give either --features/--image or --data");
  }
  if (single) {
    DatasetRecord r;
    for (const auto& f : a.features) r.feature_paths.emplace_back(f);
    for (const auto& f : a.images) r.image_paths.emplace_back(f);
    out << generate(load_record_features(r, cfg.data.image_patch)) << "\n";
    return;
  }
  if (a.out.empty()) raise(ErrorCategory::kUsage, "--data needs --out");
  const std::vector<DatasetRecord> records = load_dataset(a.data);
  std::string lines;
  std::size_t n = 0;
  for (const DatasetRecord* r : select_split(records, parse_split(a.split))) {
    nlohmann::json j{{"id", r->id}, {"report", generate(load_record_features(*r, cfg.data.image_patch))}};
    lines += j.dump() + "\n";
    ++n;
  }
  atomic_write(a.out, lines);
  out << "generated=" << n << " out=" << a.out << "\n";
}

// evaluate ------------------------------------------------------------------

struct EvaluateArgs {
  std::string pred, ref, labels_pred, labels_ref, out;
};

std::vector<LabelVector> align_labels(const std::vector<std::pair<std::string, LabelVector>>& labels,
                                      const std::vector<std::string>& ids, const std::string& what) {
  const bool by_id = !labels.empty() && !labels.front().first.empty();
  std::vector<LabelVector> out;
  if (!by_id) {
    if (labels.size() != ids.size()) {
      raise(ErrorCategory::kSchema, what + " has " + std::to_string(labels.size()) +
                                        " lines for " + std::to_string(ids.size()) + " reports");
    }
    for (const auto& [_, l] : labels) out.push_back(l);
    return out;
  }
  std::map<std::string, LabelVector> index(labels.begin(), labels.end());
  for (const std::string& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) raise(ErrorCategory::kSchema, what + " has no labels for '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto refs = load_reports(a.ref);
  const auto preds = load_reports(a.pred);
  if (refs.empty()) raise(ErrorCategory::kSchema, a.ref + ": no reports");
  std::map<std::string, std::string> pred_by_id(preds.begin(), preds.end());
  std::vector<TokenizedPair> corpus;
  std::vector<std::string> ids;
  for (const auto& [id, text] : refs) {
    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) raise(ErrorCategory::kSchema, a.pred + ": no prediction for '" + id + "'");
    corpus.push_back({tokenize(it->second), tokenize(text)});
    ids.push_back(id);
  }
  if (a.labels_pred.empty() != a.labels_ref.empty()) {
    raise(ErrorCategory::kUsage, "--labels-pred and --labels-ref go together");
  }
  std::vector<LabelVector> lp, lr;
  if (!a.labels_pred.empty()) {
    lp = align_labels(load_labels(a.labels_pred), ids, a.labels_pred);
    lr = align_labels(load_labels(a.labels_ref), ids, a.labels_ref);
  }
  const MetricReport report =
      evaluate_corpus(corpus, lp.empty() ? nullptr : &lp, lr.empty() ? nullptr : &lr);

  std::vector<std::pair<std::string, double>> rows;
  for (std::size_t n = 0; n < report.bleu.size(); ++n) {
    rows.emplace_back("bleu" + std::to_string(n + 1), report.bleu[n]);
  }
  rows.emplace_back("meteor_exact", report.meteor);
  rows.emplace_back("rouge_l", report.rouge_l);
  if (report.ce_micro) {
    rows.emplace_back("ce_precision", report.ce_micro->precision);
    rows.emplace_back("ce_recall", report.ce_micro->recall);
    rows.emplace_back("ce_f1", report.ce_micro->f1);
    rows.emplace_back("ce_macro_precision", report.ce_macro->precision);
    rows.emplace_back("ce_macro_recall", report.ce_macro->recall);
    rows.emplace_back("ce_macro_f1", report.ce_macro->f1);
  }
  nlohmann::json j;
  j["reports"] = corpus.size();
  for (const auto& [k, v] : rows) {
    out << k << "=" << fixed(v) << "\n";
    j[k] = v;
  }
  if (!a.out.empty()) atomic_write(a.out, j.dump(2) + "\n");
}

// profile -------------------------------------------------------------------

struct ProfileArgs {
  std::string config, csv;
  std::size_t seq_len = kDefaultProfileSeqLen;
  bool validate = false;
};

void cmd_profile(const ProfileArgs& a, std::ostream& out) {
  const RunConfig cfg = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
  if (a.seq_len == 0) raise(ErrorCategory::kUsage, "--seq-len must be positive");
  const EncoderConfig& enc = cfg.model.encoder;
  TransformerEncoderConfig tf;
  tf.d = enc.d;
  tf.heads = cfg.model.decoder.heads;
  tf.d_ff = cfg.model.decoder.d_ff;

  const EncoderComparison cmp = compare_encoders(enc, tf, a.seq_len);
  out << format_comparison_table(cmp);
  if (!a.csv.empty()) atomic_write(a.csv, format_comparison_csv(cmp));

  if (a.validate) {
    Rng rng(cfg.train.seed);
    const MambaEncoder mamba = MambaEncoder::create(enc, rng);
    const TransformerEncoderBaseline baseline = TransformerEncoderBaseline::create(tf, rng);
    std::vector<double> x(a.seq_len * enc.d);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const Tensor input = Tensor::from_data({a.seq_len, enc.d}, x);
    NoGradGuard no_grad;
    ScopedFlopCount scope;
    const CountValidation vm = validate_counts(describe_mamba_encoder(enc), a.seq_len,
                                               [&] { mamba.encode(input); });
    const CountValidation vt = validate_counts(describe_transformer_encoder(tf), a.seq_len,
                                               [&] { baseline.encode(input); });
    for (const auto& [name, v] : {std::pair{"mamba_encoder", &vm}, std::pair{"transformer_encoder", &vt}}) {
      out << "validate " << name << ": measured=" << v->measured.total()
          << " analytic=" << v->analytic.total() << (v->passed ? " ok" : " FAILED") << "\n";
    }
    require_valid(vm);
    require_valid(vt);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radiology report generation with a selective state-space encoder", "ssmgen"};
  app.require_subcommand(1);

  VocabArgs vocab_args;
  auto* vocab_cmd = app.add_subcommand("build-vocab", "Build a vocabulary from the train split");
  vocab_cmd->add_option("--data", vocab_args.data, "Dataset JSONL")->required();
  vocab_cmd->add_option("--out", vocab_args.out, "Vocabulary file to write")->required();
  vocab_cmd->add_option("--min-freq", vocab_args.min_freq, "Minimum token frequency");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", train_args.config, "Run configuration (key = value)");
  train_cmd->add_option("--data", train_args.data, "Dataset JSONL")->required();
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--resume", train_args.resume, "Checkpoint to continue from");

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "Generate reports with beam search");
  gen_cmd->add_option("--ckpt", gen_args.ckpt, "Checkpoint")->required();
  gen_cmd->add_option("--vocab", gen_args.vocab, "Vocabulary (default: next to the checkpoint)");
  gen_cmd->add_option("--features", gen_args.features, "Feature files, concatenated along S");
  gen_cmd->add_option("--image", gen_args.images, "PGM images, pooled and concatenated");
  gen_cmd->add_option("--data", gen_args.data, "Dataset JSONL for batch generation");
  gen_cmd->add_option("--split", gen_args.split, "Split to generate for with --data");
  gen_cmd->add_option("--out", gen_args.out, "Predictions JSONL to write with --data");
  gen_cmd->add_option("--beam", gen_args.beam, "Beam size");
  gen_cmd->add_option("--max-len", gen_args.max_len, "Maximum length including BOS and EOS");
  gen_cmd->add_option("--length-norm", gen_args.length_norm, "Length normalization exponent");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against references");
  eval_cmd->add_option("--pred", eval_args.pred, "Predictions JSONL")->required();
  eval_cmd->add_option("--ref", eval_args.ref, "References JSONL")->required();
  eval_cmd->add_option("--labels-pred", eval_args.labels_pred, "Labels of the predictions");
  eval_cmd->add_option("--labels-ref", eval_args.labels_ref, "Labels of the references");
  eval_cmd->add_option("--out", eval_args.out, "JSON report to write");

  ProfileArgs prof_args;
  auto* prof_cmd = app.add_subcommand("profile", "Compare encoder parameter and FLOP counts");
  prof_cmd->add_option("--config", prof_args.config, "Run configuration");
  prof_cmd->add_option("--seq-len", prof_args.seq_len, "Sequence length S");
  prof_cmd->add_option("--csv", prof_args.csv, "CSV file to write");
  prof_cmd->add_flag("--validate", prof_args.validate, "Check analytic counts against the op counter");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp& e) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      raise(ErrorCategory::kUsage, e.what());
    }
    if (*vocab_cmd) cmd_build_vocab(vocab_args, out);
    if (*train_cmd) cmd_train(train_args, out, err);
    if (*gen_cmd) cmd_generate(gen_args, out);
    if (*eval_cmd) cmd_evaluate(eval_args, out);
    if (*prof_cmd) cmd_profile(prof_args, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << category_name(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << category_name(ErrorCategory::kIo) << ": " << e.what() << "\n";
    return exit_code(ErrorCategory::kIo);
  }
}

}  // namespace ssmgen
