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

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssmgen/decoder.h"
#include "ssmgen/layers.h"
#include "ssmgen/op_counter.h"
#include "ssmgen/ssm.h"

namespace ssmgen {

// Per-class FLOPs as a polynomial in the sequence length S, degree <= 2.
struct FlopPolynomial {
  std::array<std::array<std::uint64_t, 3>, kNumFlopClasses> coeff{};  // [class][power]

  void add(FlopClass c, int power, std::uint64_t value) {
    coeff[static_cast<std::size_t>(c)][static_cast<std::size_t>(power)] += value;
  }
  FlopCounts at(std::uint64_t s) const;
};

struct LayerDescription {
  std::string name;
  std::vector<std::pair<std::string, Shape>> params;
  FlopPolynomial flops;
};

struct ComponentDescription {
  std::string name;
  std::vector<LayerDescription> layers;
};

struct TransformerEncoderConfig {
  std::size_t d = 512;
  std::size_t n_layers = 3;
  std::size_t heads = 8;
  std::size_t d_ff = 2048;
};

ComponentDescription describe_linear(std::size_t in, std::size_t out, bool bias);
ComponentDescription describe_mamba_encoder(const EncoderConfig& cfg);
ComponentDescription describe_transformer_encoder(const TransformerEncoderConfig& cfg);

std::uint64_t count_params(const ComponentDescription& desc);
FlopCounts count_flops_by_class(const ComponentDescription& desc, std::uint64_t s);
std::uint64_t count_flops(const ComponentDescription& desc, std::uint64_t s);

// Pre-norm self-attention encoder with the same sublayers as the decoder,
// no final norm. Built only to enumerate parameters and validate counts.
class TransformerEncoderBaseline {
 public:
  struct Layer {
    LayerNorm attn_norm, ffn_norm;
    MultiHeadAttention attn;
    FeedForward ffn;
  };

  static TransformerEncoderBaseline create(const TransformerEncoderConfig& cfg, Rng& rng);
  const TransformerEncoderConfig& config() const { return cfg_; }
  Tensor encode(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParameters& out) const;

 private:
  TransformerEncoderConfig cfg_;
  std::vector<Layer> layers_;
};

inline constexpr double kCountTolerance = 0.02;

struct CountValidation {
  bool skipped = false;
  bool passed = false;
  std::string notice;
  FlopCounts analytic;
  FlopCounts measured;
  std::vector<std::string> deltas;  // one line per class outside tolerance
};

// Runs forward under the global op counter as currently enabled and compares
// each class and the total against the analytic count. A disabled counter
// yields a skipped report with measured zeros.
CountValidation validate_counts(const ComponentDescription& desc, std::uint64_t s,
                                const std::function<void()>& forward,
                                double tolerance = kCountTolerance);
// Raises kValidation listing the deltas when the report failed.
void require_valid(const CountValidation& v);

struct ComplexityReport {
  std::string component;
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
  std::uint64_t s = 0;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> reported;  // params, flops
};

// Published reference counts, shown beside the computed ones.
inline constexpr std::uint64_t kReportedMambaParams = 594'944;
inline constexpr std::uint64_t kReportedMambaFlops = 58'216'000;
inline constexpr std::uint64_t kReportedTransformerParams = 4'728'000;
inline constexpr std::uint64_t kReportedTransformerFlops = 462'422'000;
inline constexpr std::uint64_t kDefaultProfileSeqLen = 98;

struct EncoderComparison {
  ComplexityReport mamba;
  ComplexityReport transformer;
  double param_ratio() const;
  double flop_ratio() const;
  bool mamba_cheaper() const {
    return mamba.params < transformer.params && mamba.flops < transformer.flops;
  }
};

EncoderComparison compare_encoders(const EncoderConfig& mamba, const TransformerEncoderConfig& tf,
                                   std::uint64_t s);

std::string format_comparison_table(const EncoderComparison& cmp);
std::string format_comparison_csv(const EncoderComparison& cmp);

}  // namespace ssmgen
