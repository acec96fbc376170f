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

#include "ssmgen/ssm.h"

#include <cmath>

#include "autograd.h"
#include "ssmgen/errors.h"
#include "ssmgen/ops.h"

namespace ssmgen {

using detail::count;
using detail::make_result;
using detail::Node;
using detail::parent_grad;

namespace {

// g(x) = expm1(x) / x and its derivative, with the limit branch below the
// threshold.
double zoh_gain(double x) {
  return std::abs(x) < kZohLimitThreshold ? 1.0 : std::expm1(x) / x;
}

double zoh_gain_derivative(double x) {
  if (std::abs(x) < 1e-3) {
    return 0.5 + x * (1.0 / 3.0 + x * (1.0 / 8.0 + x * (1.0 / 30.0 + x / 144.0)));
  }
  return (x * std::exp(x) - std::expm1(x)) / (x * x);
}

void check_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    raise(ErrorCategory::kDimension, std::string(what) + ": expected " +
                                         shape_string(expected) + ", got " +
                                         shape_string(t.shape()));
  }
}

}  // namespace

void EncoderConfig::validate() const {
  if (d == 0 || d_state == 0 || d_conv == 0 || expand == 0) {
    raise(ErrorCategory::kConfig, "encoder sizes must be positive");
  }
  if (d % 16 != 0) {
    raise(ErrorCategory::kConfig, "encoder width " + std::to_string(d) + " not divisible by 16");
  }
}

ZohScalar discretize_zoh_scalar(double a, double b, double delta) {
  const double x = delta * a;
  const double a_bar = std::exp(x);
  const double b_bar = std::abs(x) < kZohLimitThreshold ? delta * b : std::expm1(x) / a * b;
  return {a_bar, b_bar};
}

ZohResult discretize_zoh(const Tensor& a, const Tensor& b, const Tensor& delta) {
  if (a.rank() != 2 || b.rank() != 2 || delta.rank() != 2) {
    raise(ErrorCategory::kDimension, "discretize_zoh: expected rank-2 inputs, got " +
                                         shape_string(a.shape()) + ", " +
                                         shape_string(b.shape()) + ", " +
                                         shape_string(delta.shape()));
  }
  const std::size_t channels = a.dim(0), states = a.dim(1), steps = delta.dim(0);
  check_shape(b, {steps, states}, "discretize_zoh B");
  check_shape(delta, {steps, channels}, "discretize_zoh delta");

  auto av = a.data();
  auto bv = b.data();
  auto dv = delta.data();
  const std::size_t n = steps * channels * states;
  std::vector<double> a_bar(n), b_bar(n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < channels; ++i) {
      const double dt = dv[t * channels + i];
      for (std::size_t j = 0; j < states; ++j) {
        const ZohScalar z = discretize_zoh_scalar(av[i * states + j], bv[t * states + j], dt);
        a_bar[(t * channels + i) * states + j] = z.a_bar;
        b_bar[(t * channels + i) * states + j] = z.b_bar;
      }
    }
  }
  // Decay: delta*a and exp. Input: minus one, divide, times b.
  count(FlopClass::kElementwise, 1 * n);
  count(FlopClass::kTranscendental, flop_cost::kZohTranscendental * n);
  count(FlopClass::kElementwise, (flop_cost::kZohElementwise - 1) * n);

  const Shape out_shape{steps, channels, states};
  Tensor decay = make_result(out_shape, std::move(a_bar), {a, delta},
                             [steps, channels, states](Node& self) {
                               const auto& av = self.parents[0]->data;
                               const auto& dv = self.parents[1]->data;
                               auto* ga = parent_grad(self, 0);
                               auto* gd = parent_grad(self, 1);
                               for (std::size_t t = 0; t < steps; ++t)
                                 for (std::size_t i = 0; i < channels; ++i) {
                                   const double dt = dv[t * channels + i];
                                   double acc = 0.0;
                                   for (std::size_t j = 0; j < states; ++j) {
                                     const std::size_t k = (t * channels + i) * states + j;
                                     const double g = self.grad[k] * self.data[k];
                                     if (ga) (*ga)[i * states + j] += g * dt;
                                     acc += g * av[i * states + j];
                                   }
                                   if (gd) (*gd)[t * channels + i] += acc;
                                 }
                             });
  Tensor input = make_result(
      out_shape, std::move(b_bar), {a, b, delta}, [steps, channels, states](Node& self) {
        const auto& av = self.parents[0]->data;
        const auto& bv = self.parents[1]->data;
        const auto& dv = self.parents[2]->data;
        auto* ga = parent_grad(self, 0);
        auto* gb = parent_grad(self, 1);
        auto* gd = parent_grad(self, 2);
        for (std::size_t t = 0; t < steps; ++t)
          for (std::size_t i = 0; i < channels; ++i) {
            const double dt = dv[t * channels + i];
            double acc = 0.0;
            for (std::size_t j = 0; j < states; ++j) {
              const std::size_t k = (t * channels + i) * states + j;
              const double g = self.grad[k];
              const double a_ij = av[i * states + j];
              const double b_tj = bv[t * states + j];
              const double x = dt * a_ij;
              const double gain = zoh_gain(x);
              const double dgain = zoh_gain_derivative(x);
              if (ga) (*ga)[i * states + j] += g * b_tj * dt * dt * dgain;
              if (gb) (*gb)[t * states + j] += g * dt * gain;
              acc += g * b_tj * (gain + x * dgain);
            }
            if (gd) (*gd)[t * channels + i] += acc;
          }
      });
  return {decay, input};
}

Tensor selective_scan(const Tensor& a_bar, const Tensor& b_bar, const Tensor& c, const Tensor& u,
                      const Tensor& d_skip) {
  if (a_bar.rank() != 3) {
    raise(ErrorCategory::kDimension,
          "selective_scan: abar must be [S,d_inner,d_state], got " + shape_string(a_bar.shape()));
  }
  const std::size_t steps = a_bar.dim(0), channels = a_bar.dim(1), states = a_bar.dim(2);
  check_shape(b_bar, a_bar.shape(), "selective_scan bbar");
  check_shape(c, {steps, states}, "selective_scan C");
  check_shape(u, {steps, channels}, "selective_scan u");
  check_shape(d_skip, {channels}, "selective_scan d_skip");

  auto ab = a_bar.data();
  auto bb = b_bar.data();
  auto cv = c.data();
  auto uv = u.data();
  auto dv = d_skip.data();
  std::vector<double> hs(steps * channels * states);
  std::vector<double> h(channels * states, 0.0);
  std::vector<double> out(steps * channels);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < channels; ++i) {
      const double ut = uv[t * channels + i];
      double acc = 0.0;
      for (std::size_t j = 0; j < states; ++j) {
        const std::size_t k = (t * channels + i) * states + j;
        double& hij = h[i * states + j];
        hij = ab[k] * hij + bb[k] * ut;
        hs[k] = hij;
        acc += cv[t * states + j] * hij;
      }
      out[t * channels + i] = acc + dv[i] * ut;
    }
  }
  count(FlopClass::kMultiplyAdd, flop_cost::kScanMultiplyAdd * steps * channels * states);
  count(FlopClass::kElementwise, flop_cost::kScanSkipElementwise * steps * channels);

  return make_result(
      {steps, channels}, std::move(out), {a_bar, b_bar, c, u, d_skip},
      [steps, channels, states, hs = std::move(hs)](Node& self) {
        const auto& ab = self.parents[0]->data;
        const auto& bb = self.parents[1]->data;
        const auto& cv = self.parents[2]->data;
        const auto& uv = self.parents[3]->data;
        const auto& dv = self.parents[4]->data;
        auto* g_ab = parent_grad(self, 0);
        auto* g_bb = parent_grad(self, 1);
        auto* g_c = parent_grad(self, 2);
        auto* g_u = parent_grad(self, 3);
        auto* g_d = parent_grad(self, 4);
        // carry = dL/dh_t flowing back from step t+1.
        std::vector<double> carry(channels * states, 0.0);
        for (std::size_t t = steps; t-- > 0;) {
          for (std::size_t i = 0; i < channels; ++i) {
            const double gv = self.grad[t * channels + i];
            const double ut = uv[t * channels + i];
            double gu = gv * dv[i];
            if (g_d) (*g_d)[i] += gv * ut;
            for (std::size_t j = 0; j < states; ++j) {
              const std::size_t k = (t * channels + i) * states + j;
              const double gh = gv * cv[t * states + j] + carry[i * states + j];
              if (g_c) (*g_c)[t * states + j] += gv * hs[k];
              const double h_prev = t > 0 ? hs[k - channels * states] : 0.0;
              if (g_ab) (*g_ab)[k] += gh * h_prev;
              if (g_bb) (*g_bb)[k] += gh * ut;
              gu += gh * bb[k];
              carry[i * states + j] = gh * ab[k];
            }
            if (g_u) (*g_u)[t * channels + i] += gu;
          }
        }
      });
}

Tensor causal_conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 2 || weight.rank() != 2) {
    raise(ErrorCategory::kDimension, "causal_conv1d: expected [S,C] and [C,K], got " +
                                         shape_string(x.shape()) + " and " +
                                         shape_string(weight.shape()));
  }
  const std::size_t steps = x.dim(0), channels = x.dim(1), width = weight.dim(1);
  check_shape(weight, {channels, width}, "causal_conv1d weight");
  check_shape(bias, {channels}, "causal_conv1d bias");
  auto xv = x.data();
  auto wv = weight.data();
  auto bv = bias.data();
  std::vector<double> out(steps * channels);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      double acc = bv[c];
      for (std::size_t k = 0; k < width; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) -
                                   static_cast<std::ptrdiff_t>(width - 1);
        if (src >= 0) acc += wv[c * width + k] * xv[src * channels + c];
      }
      out[t * channels + c] = acc;
    }
  }
  count(FlopClass::kMultiplyAdd, 2 * width * steps * channels);
  count(FlopClass::kElementwise, steps * channels);
  return make_result({steps, channels}, std::move(out), {x, weight, bias},
                     [steps, channels, width](Node& self) {
                       const auto& xv = self.parents[0]->data;
                       const auto& wv = self.parents[1]->data;
                       auto* gx = parent_grad(self, 0);
                       auto* gw = parent_grad(self, 1);
                       auto* gb = parent_grad(self, 2);
                       for (std::size_t t = 0; t < steps; ++t)
                         for (std::size_t c = 0; c < channels; ++c) {
                           const double g = self.grad[t * channels + c];
                           if (gb) (*gb)[c] += g;
                           for (std::size_t k = 0; k < width; ++k) {
                             const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) -
                                                        static_cast<std::ptrdiff_t>(width - 1);
                             if (src < 0) continue;
                             if (gw) (*gw)[c * width + k] += g * xv[src * channels + c];
                             if (gx) (*gx)[src * channels + c] += g * wv[c * width + k];
                           }
                         }
                     });
}

SsmParams SsmParams::create(std::size_t d_inner, std::size_t d_state, std::size_t dt_rank,
                            Rng& rng) {
  SsmParams p;
  p.dt_rank = dt_rank;
  p.d_state = d_state;
  // A[:, j] = -(j + 1).
  std::vector<double> a_log(d_inner * d_state);
  for (std::size_t i = 0; i < d_inner; ++i)
    for (std::size_t j = 0; j < d_state; ++j)
      a_log[i * d_state + j] = std::log(static_cast<double>(j + 1));
  p.a_log = parameter_from({d_inner, d_state}, std::move(a_log));
  p.d_skip = constant_parameter({d_inner}, 1.0);
  p.x_proj = Linear::create(d_inner, dt_rank + 2 * d_state, false, rng);
  p.dt_proj = Linear::create(dt_rank, d_inner, true, rng);
  // The bias is the inverse softplus of a log-uniform delta in [1e-3, 1e-1].
  std::vector<double> bias(d_inner);
  for (double& b : bias) {
    const double dt = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
    b = dt + std::log(-std::expm1(-dt));
  }
  p.dt_proj.bias = parameter_from({d_inner}, std::move(bias));
  return p;
}

Tensor SsmParams::a_matrix() const { return neg(exp(a_log)); }

void SsmParams::collect(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".a_log", a_log);
  out.emplace_back(prefix + ".d_skip", d_skip);
  x_proj.collect(prefix + ".x_proj", out);
  dt_proj.collect(prefix + ".dt_proj", out);
}

SsmProjection project_ssm_params(const Tensor& u, const SsmParams& params) {
  const Tensor x_dbl = params.x_proj(u);
  const std::size_t r = params.dt_rank, n = params.d_state;
  const Tensor dt_raw = slice_cols(x_dbl, 0, r);
  return {slice_cols(x_dbl, r, r + n), slice_cols(x_dbl, r + n, r + 2 * n),
          softplus(params.dt_proj(dt_raw))};
}

MambaBlock MambaBlock::create(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t di = cfg.d_inner();
  MambaBlock b;
  b.norm = LayerNorm::create(cfg.d);
  b.in_proj = Linear::create(cfg.d, 2 * di, false, rng);
  const double conv_bound = 1.0 / std::sqrt(static_cast<double>(cfg.d_conv));
  b.conv_weight = uniform_parameter({di, cfg.d_conv}, conv_bound, rng);
  b.conv_bias = uniform_parameter({di}, conv_bound, rng);
  b.ssm = SsmParams::create(di, cfg.d_state, cfg.dt_rank(), rng);
  b.out_proj = Linear::create(di, cfg.d, false, rng);
  return b;
}

Tensor MambaBlock::forward(const Tensor& x) const {
  const std::size_t di = d_inner();
  const Tensor xz = in_proj(norm(x));
  const Tensor stream = slice_cols(xz, 0, di);
  const Tensor gate = slice_cols(xz, di, 2 * di);
  const Tensor u = silu(causal_conv1d(stream, conv_weight, conv_bias));
  const SsmProjection proj = project_ssm_params(u, ssm);
  const ZohResult zoh = discretize_zoh(ssm.a_matrix(), proj.b, proj.delta);
  const Tensor v = selective_scan(zoh.a_bar, zoh.b_bar, proj.c, u, ssm.d_skip);
  return add(x, out_proj(mul(v, silu(gate))));
}

MambaBlock::State MambaBlock::initial_state() const {
  return State{std::vector<double>((d_conv() - 1) * d_inner(), 0.0),
               std::vector<double>(d_inner() * ssm.d_state, 0.0)};
}

std::vector<double> MambaBlock::step(State& state, std::span<const double> x_t) const {
  NoGradGuard no_grad;
  const std::size_t d = d_model(), di = d_inner(), width = d_conv(), n = ssm.d_state;
  if (x_t.size() != d) {
    raise(ErrorCategory::kDimension, "MambaBlock::step: row of width " +
                                         std::to_string(x_t.size()) + ", expected " +
                                         std::to_string(d));
  }
  const Tensor x = Tensor::from_data({1, d}, {x_t.begin(), x_t.end()});
  const Tensor xz = in_proj(norm(x));
  auto xzv = xz.data();

  // Convolution over the carried window plus the new stream row.
  std::vector<double> conv(di);
  auto wv = conv_weight.data();
  auto bv = conv_bias.data();
  for (std::size_t c = 0; c < di; ++c) {
    double acc = bv[c];
    for (std::size_t k = 0; k + 1 < width; ++k) acc += wv[c * width + k] * state.conv_window[k * di + c];
    acc += wv[c * width + width - 1] * xzv[c];
    conv[c] = acc;
  }
  if (width > 1) {
    std::copy(state.conv_window.begin() + di, state.conv_window.end(), state.conv_window.begin());
    std::copy_n(xzv.begin(), di, state.conv_window.end() - di);
  }
  const Tensor u = silu(Tensor::from_data({1, di}, conv));
  const SsmProjection proj = project_ssm_params(u, ssm);
  const Tensor a = ssm.a_matrix();

  auto uv = u.data();
  auto av = a.data();
  auto bt = proj.b.data();
  auto ct = proj.c.data();
  auto dt = proj.delta.data();
  auto dskip = ssm.d_skip.data();
  std::vector<double> v(di);
  for (std::size_t i = 0; i < di; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const ZohScalar z = discretize_zoh_scalar(av[i * n + j], bt[j], dt[i]);
      double& h = state.h[i * n + j];
      h = z.a_bar * h + z.b_bar * uv[i];
      acc += ct[j] * h;
    }
    v[i] = acc + dskip[i] * uv[i];
  }
  const Tensor gate = silu(Tensor::from_data({1, di}, {xzv.begin() + di, xzv.end()}));
  const Tensor out = add(x, out_proj(mul(Tensor::from_data({1, di}, v), gate)));
  return out.to_vector();
}

void MambaBlock::collect(const std::string& prefix, NamedParameters& out) const {
  norm.collect(prefix + ".norm", out);
  in_proj.collect(prefix + ".in_proj", out);
  out.emplace_back(prefix + ".conv.weight", conv_weight);
  out.emplace_back(prefix + ".conv.bias", conv_bias);
  ssm.collect(prefix + ".ssm", out);
  out_proj.collect(prefix + ".out_proj", out);
}

MambaEncoder MambaEncoder::create(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  MambaEncoder enc;
  enc.cfg_ = cfg;
  for (std::size_t l = 0; l < cfg.n_layers; ++l) enc.blocks_.push_back(MambaBlock::create(cfg, rng));
  return enc;
}

Tensor MambaEncoder::encode(const Tensor& features) const {
  if (features.rank() != 2 || features.dim(1) != cfg_.d) {
    raise(ErrorCategory::kConfig, "encoder expects features of width " + std::to_string(cfg_.d) +
                                      ", got " + shape_string(features.shape()));
  }
  Tensor x = features;
  for (const MambaBlock& block : blocks_) x = block.forward(x);
  return x;
}

void MambaEncoder::collect(const std::string& prefix, NamedParameters& out) const {
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    blocks_[l].collect(prefix + ".layers." + std::to_string(l), out);
  }
}

}  // namespace ssmgen
