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

#include "ssmgen/profiler.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ssmgen/errors.h"
#include "ssmgen/ops.h"

namespace ssmgen {

namespace {

using FC = FlopClass;

std::uint64_t numel(const Shape& s) {
  std::uint64_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

// Linear over S rows: matmul plus bias broadcast.
void linear_flops(FlopPolynomial& f, std::uint64_t in, std::uint64_t out, bool bias) {
  f.add(FC::kMultiplyAdd, 1, 2 * in * out);
  if (bias) f.add(FC::kElementwise, 1, out);
}

void linear_params(LayerDescription& layer, const std::string& name, std::size_t in,
                   std::size_t out, bool bias) {
  layer.params.emplace_back(name + ".weight", Shape{in, out});
  if (bias) layer.params.emplace_back(name + ".bias", Shape{out});
}

void layer_norm_flops(FlopPolynomial& f, std::uint64_t d) {
  f.add(FC::kElementwise, 1, flop_cost::kLayerNormElementwise * d);
  f.add(FC::kTranscendental, 1, flop_cost::kLayerNormRowTranscendental);
}

void layer_norm_params(LayerDescription& layer, const std::string& name, std::size_t d) {
  layer.params.emplace_back(name + ".gain", Shape{d});
  layer.params.emplace_back(name + ".bias", Shape{d});
}

std::string with_commas(std::uint64_t v) {
  std::string s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

}  // namespace

FlopCounts FlopPolynomial::at(std::uint64_t s) const {
  FlopCounts out;
  for (std::size_t c = 0; c < kNumFlopClasses; ++c) {
    out.by_class[c] = coeff[c][0] + coeff[c][1] * s + coeff[c][2] * s * s;
  }
  return out;
}

ComponentDescription describe_linear(std::size_t in, std::size_t out, bool bias) {
  LayerDescription layer{"linear", {}, {}};
  linear_params(layer, "linear", in, out, bias);
  linear_flops(layer.flops, in, out, bias);
  return {"linear", {layer}};
}

ComponentDescription describe_mamba_encoder(const EncoderConfig& cfg) {
  cfg.validate();
  const std::uint64_t d = cfg.d, di = cfg.d_inner(), n = cfg.d_state, k = cfg.d_conv,
                      r = cfg.dt_rank();
  ComponentDescription desc{"mamba_encoder", {}};
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "encoder.layers." + std::to_string(l);
    LayerDescription layer{p, {}, {}};
    layer_norm_params(layer, p + ".norm", d);
    linear_params(layer, p + ".in_proj", d, 2 * di, false);
    layer.params.emplace_back(p + ".conv.weight", Shape{di, k});
    layer.params.emplace_back(p + ".conv.bias", Shape{di});
    layer.params.emplace_back(p + ".ssm.a_log", Shape{di, n});
    layer.params.emplace_back(p + ".ssm.d_skip", Shape{di});
    linear_params(layer, p + ".ssm.x_proj", di, r + 2 * n, false);
    linear_params(layer, p + ".ssm.dt_proj", r, di, true);
    linear_params(layer, p + ".out_proj", di, d, false);

    FlopPolynomial& f = layer.flops;
    layer_norm_flops(f, d);
    linear_flops(f, d, 2 * di, false);
    f.add(FC::kMultiplyAdd, 1, 2 * k * di);  // causal conv
    f.add(FC::kElementwise, 1, di);
    f.add(FC::kTranscendental, 1, di);  // silu
    linear_flops(f, di, r + 2 * n, false);
    linear_flops(f, r, di, true);
    f.add(FC::kTranscendental, 1, di);  // softplus
    f.add(FC::kTranscendental, 0, di * n);  // A = -exp(A_log)
    f.add(FC::kElementwise, 0, di * n);
    f.add(FC::kElementwise, 1, flop_cost::kZohElementwise * di * n);
    f.add(FC::kTranscendental, 1, flop_cost::kZohTranscendental * di * n);
    f.add(FC::kMultiplyAdd, 1, flop_cost::kScanMultiplyAdd * di * n);
    f.add(FC::kElementwise, 1, flop_cost::kScanSkipElementwise * di);
    f.add(FC::kTranscendental, 1, di);  // silu(gate)
    f.add(FC::kElementwise, 1, di);     // gating product
    linear_flops(f, di, d, false);
    f.add(FC::kElementwise, 1, d);  // residual
    desc.layers.push_back(std::move(layer));
  }
  return desc;
}

ComponentDescription describe_transformer_encoder(const TransformerEncoderConfig& cfg) {
  const std::uint64_t d = cfg.d, h = cfg.heads, ff = cfg.d_ff;
  ComponentDescription desc{"transformer_encoder", {}};
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "transformer.layers." + std::to_string(l);
    LayerDescription layer{p, {}, {}};
    layer_norm_params(layer, p + ".attn_norm", d);
    for (const char* proj : {"query", "key", "value", "output"}) {
      linear_params(layer, p + ".attn." + proj, d, d, true);
    }
    layer_norm_params(layer, p + ".ffn_norm", d);
    linear_params(layer, p + ".ffn.fc1", d, ff, true);
    linear_params(layer, p + ".ffn.fc2", ff, d, true);

    FlopPolynomial& f = layer.flops;
    layer_norm_flops(f, d);
    for (int i = 0; i < 4; ++i) linear_flops(f, d, d, true);
    // Scores and mixing: each 2 * S^2 * d across heads.
    f.add(FC::kMultiplyAdd, 2, 4 * d);
    f.add(FC::kElementwise, 2, h);  // 1/sqrt(dk) scaling
    f.add(FC::kElementwise, 2, flop_cost::kSoftmaxElementwise * h);
    f.add(FC::kTranscendental, 2, flop_cost::kSoftmaxTranscendental * h);
    f.add(FC::kElementwise, 1, d);  // residual
    layer_norm_flops(f, d);
    linear_flops(f, d, ff, true);
    f.add(FC::kElementwise, 1, ff);  // relu
    linear_flops(f, ff, d, true);
    f.add(FC::kElementwise, 1, d);  // residual
    desc.layers.push_back(std::move(layer));
  }
  return desc;
}

std::uint64_t count_params(const ComponentDescription& desc) {
  std::uint64_t total = 0;
  for (const LayerDescription& layer : desc.layers) {
    for (const auto& [_, shape] : layer.params) total += numel(shape);
  }
  return total;
}

FlopCounts count_flops_by_class(const ComponentDescription& desc, std::uint64_t s) {
  if (s == 0) raise(ErrorCategory::kContract, "count_flops: sequence length must be positive");
  FlopCounts total;
  for (const LayerDescription& layer : desc.layers) {
    const FlopCounts c = layer.flops.at(s);
    for (std::size_t k = 0; k < kNumFlopClasses; ++k) total.by_class[k] += c.by_class[k];
  }
  return total;
}

std::uint64_t count_flops(const ComponentDescription& desc, std::uint64_t s) {
  return count_flops_by_class(desc, s).total();
}

TransformerEncoderBaseline TransformerEncoderBaseline::create(const TransformerEncoderConfig& cfg,
                                                              Rng& rng) {
  if (cfg.d == 0 || cfg.heads == 0 || cfg.d % cfg.heads != 0 || cfg.d_ff == 0) {
    raise(ErrorCategory::kConfig, "transformer baseline: width must be a positive multiple of heads");
  }
  TransformerEncoderBaseline t;
  t.cfg_ = cfg;
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    t.layers_.push_back(Layer{LayerNorm::create(cfg.d), LayerNorm::create(cfg.d),
                              MultiHeadAttention::create(cfg.d, cfg.heads, rng),
                              FeedForward::create(cfg.d, cfg.d_ff, rng)});
  }
  return t;
}

Tensor TransformerEncoderBaseline::encode(const Tensor& x) const {
  Tensor h = x;
  for (const Layer& layer : layers_) {
    const Tensor a = layer.attn_norm(h);
    h = add(h, layer.attn.forward(a, a, false, 0.0, {}));
    h = add(h, layer.ffn.forward(layer.ffn_norm(h)));
  }
  return h;
}

void TransformerEncoderBaseline::collect(const std::string& prefix, NamedParameters& out) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = prefix + ".layers." + std::to_string(l);
    layers_[l].attn_norm.collect(p + ".attn_norm", out);
    layers_[l].attn.collect(p + ".attn", out);
    layers_[l].ffn_norm.collect(p + ".ffn_norm", out);
    layers_[l].ffn.collect(p + ".ffn", out);
  }
}

CountValidation validate_counts(const ComponentDescription& desc, std::uint64_t s,
                                const std::function<void()>& forward, double tolerance) {
  CountValidation v;
  v.analytic = count_flops_by_class(desc, s);
  OpCounter& counter = OpCounter::global();
  if (!counter.enabled()) {
    v.skipped = true;
    v.notice = "op counter disabled; measured count is 0 and validation was skipped";
    return v;
  }
  counter.reset();
  forward();
  v.measured = counter.snapshot();

  auto check = [&](const std::string& label, std::uint64_t analytic, std::uint64_t measured) {
    const double diff = std::fabs(static_cast<double>(measured) - static_cast<double>(analytic));
    const double rel = analytic == 0 ? (measured == 0 ? 0.0 : 1.0) : diff / analytic;
    if (rel > tolerance) {
      std::ostringstream line;
      line << label << ": analytic " << analytic << " measured " << measured << " ("
           << rel * 100.0 << "%)";
      v.deltas.push_back(line.str());
    }
  };
  for (std::size_t c = 0; c < kNumFlopClasses; ++c) {
    check(flop_class_name(static_cast<FlopClass>(c)), v.analytic.by_class[c],
          v.measured.by_class[c]);
  }
  check("total", v.analytic.total(), v.measured.total());
  v.passed = v.deltas.empty();
  return v;
}

void require_valid(const CountValidation& v) {
  if (v.skipped || v.passed) return;
  std::string msg = "FLOP counts diverge beyond tolerance";
  for (const std::string& d : v.deltas) msg += "; " + d;
  raise(ErrorCategory::kValidation, msg);
}

double EncoderComparison::param_ratio() const {
  return static_cast<double>(mamba.params) / static_cast<double>(transformer.params);
}

double EncoderComparison::flop_ratio() const {
  return static_cast<double>(mamba.flops) / static_cast<double>(transformer.flops);
}

EncoderComparison compare_encoders(const EncoderConfig& mamba, const TransformerEncoderConfig& tf,
                                   std::uint64_t s) {
  const ComponentDescription m = describe_mamba_encoder(mamba);
  const ComponentDescription t = describe_transformer_encoder(tf);
  EncoderComparison cmp;
  cmp.mamba = {"mamba_encoder", count_params(m), count_flops(m, s), s,
               std::make_pair(kReportedMambaParams, kReportedMambaFlops)};
  cmp.transformer = {"transformer_encoder", count_params(t), count_flops(t, s), s,
                     std::make_pair(kReportedTransformerParams, kReportedTransformerFlops)};
  return cmp;
}

std::string format_comparison_table(const EncoderComparison& cmp) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %14s %16s %6s %16s %16s\n", "component", "params",
                "flops", "S", "ref_params", "ref_flops");
  out << line;
  for (const ComplexityReport* r : {&cmp.mamba, &cmp.transformer}) {
    std::snprintf(line, sizeof line, "%-22s %14s %16s %6llu %16s %16s\n", r->component.c_str(),
                  with_commas(r->params).c_str(), with_commas(r->flops).c_str(),
                  static_cast<unsigned long long>(r->s),
                  r->reported ? with_commas(r->reported->first).c_str() : "-",
                  r->reported ? with_commas(r->reported->second).c_str() : "-");
    out << line;
  }
  const double reported_param_ratio =
      static_cast<double>(kReportedMambaParams) / static_cast<double>(kReportedTransformerParams);
  const double reported_flop_ratio =
      static_cast<double>(kReportedMambaFlops) / static_cast<double>(kReportedTransformerFlops);
  std::snprintf(line, sizeof line, "%-22s %14.3f %16.3f %6s %16.3f %16.3f\n", "ratio",
                cmp.param_ratio(), cmp.flop_ratio(), "", reported_param_ratio, reported_flop_ratio);
  out << line;
  return out.str();
}

std::string format_comparison_csv(const EncoderComparison& cmp) {
  std::ostringstream out;
  out << "component,params,flops,S,paper_ref_params,paper_ref_flops\n";
  for (const ComplexityReport* r : {&cmp.mamba, &cmp.transformer}) {
    out << r->component << ',' << r->params << ',' << r->flops << ',' << r->s << ',';
    if (r->reported) out << r->reported->first << ',' << r->reported->second;
    else out << ',';
    out << '\n';
  }
  return out.str();
}

}  // namespace ssmgen
