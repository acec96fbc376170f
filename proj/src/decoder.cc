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

#include "ssmgen/decoder.h"

#include <cmath>

#include "ssmgen/errors.h"
#include "ssmgen/ops.h"

namespace ssmgen {

namespace {
Rng& dropout_rng(const ForwardContext& ctx) {
  if (!ctx.rng) raise(ErrorCategory::kContract, "training forward needs a dropout generator");
  return *ctx.rng;
}

Tensor maybe_dropout(const Tensor& x, double p, const ForwardContext& ctx) {
  if (!ctx.training || p <= 0.0) return x;
  return dropout(x, p, true, dropout_rng(ctx));
}
}  // namespace

void DecoderConfig::validate() const {
  if (d == 0 || heads == 0 || d_ff == 0 || max_len == 0) {
    raise(ErrorCategory::kConfig, "decoder sizes must be positive");
  }
  if (d % heads != 0) {
    raise(ErrorCategory::kConfig, "decoder width " + std::to_string(d) +
                                      " not divisible by " + std::to_string(heads) + " heads");
  }
  if (n_layers < 1) raise(ErrorCategory::kConfig, "decoder needs at least one layer");
  if (vocab_size <= static_cast<std::size_t>(kNumSpecialTokens) - 1) {
    raise(ErrorCategory::kConfig, "decoder vocabulary must hold the special tokens");
  }
  if (dropout < 0.0 || dropout >= 1.0) raise(ErrorCategory::kConfig, "dropout must be in [0,1)");
}

MultiHeadAttention MultiHeadAttention::create(std::size_t d, std::size_t heads, Rng& rng) {
  return MultiHeadAttention{Linear::create(d, d, true, rng), Linear::create(d, d, true, rng),
                            Linear::create(d, d, true, rng), Linear::create(d, d, true, rng),
                            heads};
}

Tensor MultiHeadAttention::attend(const Tensor& q, const Tensor& k, const Tensor& v, bool causal,
                                  double dropout_p, const ForwardContext& ctx,
                                  std::vector<Tensor>* weights) const {
  const std::size_t d = q.dim(1);
  const std::size_t dk = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<Tensor> parts;
  parts.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Tensor qh = slice_cols(q, h * dk, (h + 1) * dk);
    const Tensor kh = slice_cols(k, h * dk, (h + 1) * dk);
    const Tensor vh = slice_cols(v, h * dk, (h + 1) * dk);
    const Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    const Tensor w = causal ? causal_softmax(scores) : softmax(scores, 1);
    if (weights) weights->push_back(w);
    parts.push_back(matmul(maybe_dropout(w, dropout_p, ctx), vh));
  }
  return output(heads == 1 ? parts[0] : concat_cols(parts));
}

Tensor MultiHeadAttention::forward(const Tensor& query_in, const Tensor& kv_in, bool causal,
                                   double dropout_p, const ForwardContext& ctx,
                                   std::vector<Tensor>* weights) const {
  return attend(query(query_in), key(kv_in), value(kv_in), causal, dropout_p, ctx, weights);
}

void MultiHeadAttention::collect(const std::string& prefix, NamedParameters& out) const {
  query.collect(prefix + ".query", out);
  key.collect(prefix + ".key", out);
  value.collect(prefix + ".value", out);
  output.collect(prefix + ".output", out);
}

FeedForward FeedForward::create(std::size_t d, std::size_t d_ff, Rng& rng) {
  return FeedForward{Linear::create(d, d_ff, true, rng), Linear::create(d_ff, d, true, rng)};
}

Tensor FeedForward::relu_hidden(const Tensor& x) const { return relu(fc1(x)); }

void FeedForward::collect(const std::string& prefix, NamedParameters& out) const {
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
}

void DecoderLayer::collect(const std::string& prefix, NamedParameters& out) const {
  self_norm.collect(prefix + ".self_norm", out);
  self_attn.collect(prefix + ".self_attn", out);
  cross_norm.collect(prefix + ".cross_norm", out);
  cross_attn.collect(prefix + ".cross_attn", out);
  ffn_norm.collect(prefix + ".ffn_norm", out);
  ffn.collect(prefix + ".ffn", out);
}

Tensor sinusoidal_positions(std::size_t start, std::size_t length, std::size_t d) {
  std::vector<double> pe(length * d);
  for (std::size_t t = 0; t < length; ++t) {
    const double pos = static_cast<double>(start + t);
    for (std::size_t i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      pe[t * d + i] = std::sin(pos * freq);
      if (i + 1 < d) pe[t * d + i + 1] = std::cos(pos * freq);
    }
  }
  return Tensor::from_data({length, d}, std::move(pe));
}

Decoder Decoder::create(const DecoderConfig& cfg, Rng& rng) {
  cfg.validate();
  Decoder dec;
  dec.cfg_ = cfg;
  // Variance 1/d so the sqrt(d) scaling yields unit-variance embeddings.
  dec.embedding_ =
      uniform_parameter({cfg.vocab_size, cfg.d}, std::sqrt(3.0 / static_cast<double>(cfg.d)), rng);
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    DecoderLayer layer{LayerNorm::create(cfg.d),
                       LayerNorm::create(cfg.d),
                       LayerNorm::create(cfg.d),
                       MultiHeadAttention::create(cfg.d, cfg.heads, rng),
                       MultiHeadAttention::create(cfg.d, cfg.heads, rng),
                       FeedForward::create(cfg.d, cfg.d_ff, rng)};
    dec.layers_.push_back(std::move(layer));
  }
  dec.final_norm_ = LayerNorm::create(cfg.d);
  dec.output_ = Linear::create(cfg.d, cfg.vocab_size, true, rng);
  return dec;
}

Tensor Decoder::embed_tokens(std::span<const TokenId> tokens, const ForwardContext& ctx,
                             std::size_t start_pos) const {
  if (start_pos + tokens.size() > cfg_.max_len) {
    raise(ErrorCategory::kLength, "sequence of " + std::to_string(start_pos + tokens.size()) +
                                      " tokens exceeds max_len " + std::to_string(cfg_.max_len));
  }
  const Tensor emb = scale(embedding(embedding_, tokens), std::sqrt(static_cast<double>(cfg_.d)));
  const Tensor x = add(emb, sinusoidal_positions(start_pos, tokens.size(), cfg_.d));
  return maybe_dropout(x, cfg_.dropout, ctx);
}

Tensor Decoder::forward(const Tensor& y_emb, const Tensor& memory, const ForwardContext& ctx,
                        AttentionTrace* trace) const {
  const double p = cfg_.dropout;
  Tensor x = y_emb;
  for (const DecoderLayer& layer : layers_) {
    const Tensor hs = layer.self_norm(x);
    x = add(x, maybe_dropout(layer.self_attn.forward(hs, hs, true, p, ctx,
                                                     trace ? &trace->self_weights : nullptr),
                             p, ctx));
    const Tensor hc = layer.cross_norm(x);
    x = add(x, maybe_dropout(layer.cross_attn.forward(hc, memory, false, p, ctx,
                                                      trace ? &trace->cross_weights : nullptr),
                             p, ctx));
    x = add(x, maybe_dropout(layer.ffn.forward(layer.ffn_norm(x)), p, ctx));
  }
  return final_norm_(x);
}

Tensor Decoder::project(const Tensor& hidden) const { return output_(hidden); }

Tensor Decoder::logits(const Tensor& memory, std::span<const TokenId> input,
                       const ForwardContext& ctx) const {
  return project(forward(embed_tokens(input, ctx), memory, ctx));
}

Tensor Decoder::decode_logits(const Tensor& memory, std::span<const TokenId> prefix) const {
  if (prefix.empty() || prefix.front() != kBosId) {
    raise(ErrorCategory::kContract, "decode prefix must begin with BOS");
  }
  if (prefix.size() > cfg_.max_len) {
    raise(ErrorCategory::kLength, "prefix of " + std::to_string(prefix.size()) +
                                      " tokens exceeds max_len " + std::to_string(cfg_.max_len));
  }
  NoGradGuard no_grad;
  const Tensor all = logits(memory, prefix, ForwardContext{});
  const std::size_t v = cfg_.vocab_size;
  const auto last = all.data().subspan((prefix.size() - 1) * v, v);
  return Tensor::from_data({v}, {last.begin(), last.end()});
}

Decoder::State Decoder::start(const Tensor& memory) const {
  NoGradGuard no_grad;
  State state;
  for (const DecoderLayer& layer : layers_) {
    State::LayerCache cache;
    cache.cross_k = layer.cross_attn.key(memory);
    cache.cross_v = layer.cross_attn.value(memory);
    state.layers.push_back(std::move(cache));
  }
  return state;
}

Tensor Decoder::step(State& state, TokenId token) const {
  NoGradGuard no_grad;
  const ForwardContext eval;
  const TokenId ids[1] = {token};
  Tensor x = embed_tokens(ids, eval, state.position);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DecoderLayer& layer = layers_[l];
    State::LayerCache& cache = state.layers[l];
    const Tensor hs = layer.self_norm(x);
    const Tensor k = layer.self_attn.key(hs);
    const Tensor v = layer.self_attn.value(hs);
    cache.self_k = cache.self_k.defined() ? concat_rows({cache.self_k, k}) : k;
    cache.self_v = cache.self_v.defined() ? concat_rows({cache.self_v, v}) : v;
    x = add(x, layer.self_attn.attend(layer.self_attn.query(hs), cache.self_k, cache.self_v, true,
                                      0.0, eval));
    const Tensor hc = layer.cross_norm(x);
    x = add(x, layer.cross_attn.attend(layer.cross_attn.query(hc), cache.cross_k, cache.cross_v,
                                       false, 0.0, eval));
    x = add(x, layer.ffn.forward(layer.ffn_norm(x)));
  }
  ++state.position;
  const Tensor out = project(final_norm_(x));
  return reshape(out, {cfg_.vocab_size});
}

void Decoder::collect(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".embedding", embedding_);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].collect(prefix + ".layers." + std::to_string(l), out);
  }
  final_norm_.collect(prefix + ".final_norm", out);
  output_.collect(prefix + ".output", out);
}

}  // namespace ssmgen
