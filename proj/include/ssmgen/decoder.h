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
#include <span>
#include <vector>

#include "ssmgen/layers.h"
#include "ssmgen/tensor.h"
#include "ssmgen/token_ids.h"

namespace ssmgen {

struct DecoderConfig {
  std::size_t d = 512;
  std::size_t n_layers = 3;
  std::size_t heads = 8;
  std::size_t d_ff = 2048;
  double dropout = 0.1;
  std::size_t vocab_size = 0;
  std::size_t max_len = 60;

  void validate() const;
};

// Attention weights captured during a forward pass, layer-major then head.
struct AttentionTrace {
  std::vector<Tensor> self_weights;
  std::vector<Tensor> cross_weights;
};

struct MultiHeadAttention {
  Linear query, key, value, output;
  std::size_t heads = 1;

  static MultiHeadAttention create(std::size_t d, std::size_t heads, Rng& rng);

  // Scaled dot-product attention of q [T,d] over keys/values [L,d] that were
  // already projected. With causal set, row i sees keys j <= i + (L - T).
  Tensor attend(const Tensor& q, const Tensor& k, const Tensor& v, bool causal, double dropout,
                const ForwardContext& ctx, std::vector<Tensor>* weights = nullptr) const;

  Tensor forward(const Tensor& query_in, const Tensor& kv_in, bool causal, double dropout,
                 const ForwardContext& ctx, std::vector<Tensor>* weights = nullptr) const;

  void collect(const std::string& prefix, NamedParameters& out) const;
};

struct FeedForward {
  Linear fc1, fc2;

  static FeedForward create(std::size_t d, std::size_t d_ff, Rng& rng);
  Tensor forward(const Tensor& x) const { return fc2(relu_hidden(x)); }
  Tensor relu_hidden(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParameters& out) const;
};

// Pre-norm layer: masked self-attention, cross-attention over memory, then
// the position-wise feed-forward, each wrapped as x + dropout(f(norm(x))).
struct DecoderLayer {
  LayerNorm self_norm, cross_norm, ffn_norm;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ffn;

  void collect(const std::string& prefix, NamedParameters& out) const;
};

// Sinusoidal encoding rows for positions [start, start + length).
Tensor sinusoidal_positions(std::size_t start, std::size_t length, std::size_t d);

class Decoder {
 public:
  // Incremental decoding state for one hypothesis. Cheap to copy: tensors
  // are shared handles.
  struct State {
    struct LayerCache {
      Tensor self_k, self_v;    // [t, d], grows by one row per step
      Tensor cross_k, cross_v;  // [S, d], fixed for the session
    };
    std::vector<LayerCache> layers;
    std::size_t position = 0;
  };

  Decoder() = default;
  static Decoder create(const DecoderConfig& cfg, Rng& rng);

  const DecoderConfig& config() const { return cfg_; }
  const std::vector<DecoderLayer>& layers() const { return layers_; }
  const Tensor& token_embedding() const { return embedding_; }
  std::vector<DecoderLayer>& mutable_layers() { return layers_; }

  // sqrt(d) * E[token] + PE(start_pos + t), followed by dropout in training.
  Tensor embed_tokens(std::span<const TokenId> tokens, const ForwardContext& ctx,
                      std::size_t start_pos = 0) const;
  // Hidden states [T,d] after the final norm.
  Tensor forward(const Tensor& y_emb, const Tensor& memory, const ForwardContext& ctx,
                 AttentionTrace* trace = nullptr) const;
  Tensor project(const Tensor& hidden) const;  // [T, vocab]

  // Logits [T, vocab] for teacher-forced input tokens.
  Tensor logits(const Tensor& memory, std::span<const TokenId> input,
                const ForwardContext& ctx) const;

  // Eval-mode next-token logits [vocab] given a BOS-initial prefix.
  Tensor decode_logits(const Tensor& memory, std::span<const TokenId> prefix) const;

  State start(const Tensor& memory) const;
  // Feeds one token and returns next-token logits [vocab]. Eval mode.
  Tensor step(State& state, TokenId token) const;

  void collect(const std::string& prefix, NamedParameters& out) const;

 private:
  DecoderConfig cfg_;
  Tensor embedding_;  // [vocab, d]
  std::vector<DecoderLayer> layers_;
  LayerNorm final_norm_;
  Linear output_;  // d -> vocab
};

}  // namespace ssmgen
