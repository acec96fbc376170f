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

namespace ssmgen {

struct EncoderConfig {
  std::size_t d = 512;
  std::size_t d_state = 16;
  std::size_t d_conv = 4;
  std::size_t expand = 2;
  std::size_t n_layers = 1;

  std::size_t d_inner() const { return expand * d; }
  std::size_t dt_rank() const { return d / 16; }
  // Raises a config error on non-positive sizes or d not divisible by 16.
  // n_layers == 0 is accepted (identity encoder).
  void validate() const;
};

// Selective SSM parameters for d_inner channels with d_state states each.
// A is diagonal per (channel, state) and stored as a_log with A = -exp(a_log),
// so every entry of A is strictly negative.
struct SsmParams {
  Tensor a_log;    // [d_inner, d_state]
  Tensor d_skip;   // [d_inner]
  Linear x_proj;   // d_inner -> dt_rank + 2 * d_state, no bias
  Linear dt_proj;  // dt_rank -> d_inner, with bias
  std::size_t dt_rank = 0;
  std::size_t d_state = 0;

  static SsmParams create(std::size_t d_inner, std::size_t d_state, std::size_t dt_rank, Rng& rng);
  Tensor a_matrix() const;  // -exp(a_log)
  void collect(const std::string& prefix, NamedParameters& out) const;
};

struct SsmProjection {
  Tensor b;      // [S, d_state]
  Tensor c;      // [S, d_state]
  Tensor delta;  // [S, d_inner], strictly positive
};

// Per-timestep input-dependent parameters: (dt_raw, B, C) = x_proj(u_t) and
// delta = softplus(dt_proj(dt_raw)).
SsmProjection project_ssm_params(const Tensor& u, const SsmParams& params);

// Zero-order hold for one diagonal entry: abar = exp(delta * a) and
// bbar = (exp(delta * a) - 1) / a * b. When |delta * a| < kZohLimitThreshold
// the removable singularity is replaced by its limit bbar = delta * b.
inline constexpr double kZohLimitThreshold = 1e-8;

struct ZohScalar {
  double a_bar;
  double b_bar;
};
ZohScalar discretize_zoh_scalar(double a, double b, double delta);

struct ZohResult {
  Tensor a_bar;  // [S, d_inner, d_state]
  Tensor b_bar;  // [S, d_inner, d_state]
};

// a: [d_inner, d_state], b: [S, d_state], delta: [S, d_inner].
ZohResult discretize_zoh(const Tensor& a, const Tensor& b, const Tensor& delta);

// h_t = abar_t * h_{t-1} + bbar_t * u_t, v_t = C_t h_t + d_skip * u_t, h_0 = 0.
// a_bar, b_bar: [S, d_inner, d_state]; c: [S, d_state]; u: [S, d_inner];
// d_skip: [d_inner]. Returns v: [S, d_inner].
Tensor selective_scan(const Tensor& a_bar, const Tensor& b_bar, const Tensor& c, const Tensor& u,
                      const Tensor& d_skip);

// Depthwise causal convolution: y[t,c] = bias[c] + sum_k w[c,k] x[t-K+1+k, c],
// zero-padded on the left. x: [S, C], weight: [C, K], bias: [C].
Tensor causal_conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias);

// One pre-normalized selective-SSM block with a gated output and residual:
//   (stream, gate) = in_proj(norm(x))
//   u = silu(conv(stream));  v = ssm(u)
//   out = x + out_proj(v * silu(gate))
struct MambaBlock {
  LayerNorm norm;
  Linear in_proj;      // d -> 2 * d_inner, no bias
  Tensor conv_weight;  // [d_inner, d_conv]
  Tensor conv_bias;    // [d_inner]
  SsmParams ssm;
  Linear out_proj;     // d_inner -> d, no bias

  // Streaming state carried between single-token steps.
  struct State {
    std::vector<double> conv_window;  // last d_conv - 1 stream rows, [d_conv-1, d_inner]
    std::vector<double> h;            // [d_inner, d_state]
  };

  static MambaBlock create(const EncoderConfig& cfg, Rng& rng);

  std::size_t d_model() const { return in_proj.in_features(); }
  std::size_t d_inner() const { return out_proj.in_features(); }
  std::size_t d_conv() const { return conv_weight.dim(1); }

  Tensor forward(const Tensor& x) const;

  State initial_state() const;
  // Processes one token row x_t [d] and returns the block output row.
  std::vector<double> step(State& state, std::span<const double> x_t) const;

  void collect(const std::string& prefix, NamedParameters& out) const;
};

class MambaEncoder {
 public:
  MambaEncoder() = default;
  static MambaEncoder create(const EncoderConfig& cfg, Rng& rng);

  const EncoderConfig& config() const { return cfg_; }
  const std::vector<MambaBlock>& blocks() const { return blocks_; }

  // features: [S, d] -> memory [S, d].
  Tensor encode(const Tensor& features) const;
  void collect(const std::string& prefix, NamedParameters& out) const;

 private:
  EncoderConfig cfg_;
  std::vector<MambaBlock> blocks_;
};

inline Tensor encode(const Tensor& features, const MambaEncoder& encoder) {
  return encoder.encode(features);
}

}  // namespace ssmgen
