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

#include "ssmgen/ops.h"

#include <algorithm>
#include <cmath>

#include "autograd.h"
#include "ssmgen/errors.h"
#include "ssmgen/rng.h"

namespace ssmgen {

using detail::count;
using detail::make_result;
using detail::Node;
using detail::parent_grad;

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    raise(ErrorCategory::kDimension, std::string(op) + ": expected rank " + std::to_string(rank) +
                                         ", got " + shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    raise(ErrorCategory::kDimension, std::string(op) + ": shape mismatch " +
                                         shape_string(a.shape()) + " vs " +
                                         shape_string(b.shape()));
  }
}

const std::vector<double>& in(Node& self, std::size_t i) { return self.parents[i]->data; }

// Elementwise unary op with derivative expressed through input x and output y.
template <typename F, typename DF>
Tensor unary(const Tensor& x, FlopClass cls, F f, DF df) {
  auto xd = x.data();
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) out[i] = f(xd[i]);
  count(cls, xd.size());
  return make_result(x.shape(), std::move(out), {x}, [df](Node& self) {
    auto* gx = parent_grad(self, 0);
    if (!gx) return;
    const auto& xv = in(self, 0);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      (*gx)[i] += self.grad[i] * df(xv[i], self.data[i]);
    }
  });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    raise(ErrorCategory::kDimension, "matmul: inner dimensions disagree, " +
                                         shape_string(a.shape()) + " x " +
                                         shape_string(b.shape()));
  }
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ad[i * k + p];
      const double* brow = bd.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  count(FlopClass::kMultiplyAdd, 2 * m * n * k);
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& av = in(self, 0);
    const auto& bv = in(self, 1);
    const auto& g = self.grad;
    if (auto* ga = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
          (*ga)[i * k + p] += acc;
        }
      }
    }
    if (auto* gb = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av_ip = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += av_ip * g[i * n + j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  auto ad = a.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = ad[i * n + j];
  return make_result({n, m}, std::move(out), {a}, [m, n](Node& self) {
    if (auto* ga = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += self.grad[j * m + i];
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
  count(FlopClass::kElementwise, out.size());
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto* g = parent_grad(self, p))
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] - bd[i];
  count(FlopClass::kElementwise, out.size());
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    if (auto* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  count(FlopClass::kElementwise, out.size());
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& av = in(self, 0);
    const auto& bv = in(self, 1);
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * bv[i];
    if (auto* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * av[i];
  });
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
  require_rank(bias, 1, "add_row");
  if (x.rank() == 0 || x.shape().back() != bias.dim(0)) {
    raise(ErrorCategory::kDimension, "add_row: shape mismatch " + shape_string(x.shape()) +
                                         " vs " + shape_string(bias.shape()));
  }
  const std::size_t n = bias.dim(0);
  auto xd = x.data();
  auto bd = bias.data();
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] + bd[i % n];
  count(FlopClass::kElementwise, out.size());
  return make_result(x.shape(), std::move(out), {x, bias}, [n](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    if (auto* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i % n] += self.grad[i];
  });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, FlopClass::kElementwise, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor exp(const Tensor& x) {
  return unary(
      x, FlopClass::kTranscendental, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, FlopClass::kElementwise, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, FlopClass::kTranscendental, [](double v) { return stable_sigmoid(v); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor silu(const Tensor& x) {
  return unary(
      x, FlopClass::kTranscendental, [](double v) { return v * stable_sigmoid(v); },
      [](double v, double) {
        const double s = stable_sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
      });
}

Tensor softplus(const Tensor& x) {
  return unary(
      x, FlopClass::kTranscendental,
      [](double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
      [](double v, double) { return stable_sigmoid(v); });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const Shape& s = x.shape();
  if (axis >= s.size()) {
    raise(ErrorCategory::kDimension,
          "softmax: axis " + std::to_string(axis) + " invalid for " + shape_string(s));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t n = s[axis];
  auto xd = x.data();
  std::vector<double> out(xd.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < inner; ++r) {
      const std::size_t base = o * n * inner + r;
      double mx = xd[base];
      for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xd[base + j * inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double e = std::exp(xd[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < n; ++j) out[base + j * inner] /= total;
    }
  }
  count(FlopClass::kElementwise, flop_cost::kSoftmaxElementwise * xd.size());
  count(FlopClass::kTranscendental, flop_cost::kSoftmaxTranscendental * xd.size());
  return make_result(s, std::move(out), {x}, [outer, inner, n](Node& self) {
    auto* gx = parent_grad(self, 0);
    if (!gx) return;
    const auto& y = self.data;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t r = 0; r < inner; ++r) {
        const std::size_t base = o * n * inner + r;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += self.grad[base + j * inner] * y[base + j * inner];
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t idx = base + j * inner;
          (*gx)[idx] += y[idx] * (self.grad[idx] - dot);
        }
      }
    }
  });
}

Tensor causal_softmax(const Tensor& scores) {
  require_rank(scores, 2, "causal_softmax");
  const std::size_t rows = scores.dim(0), cols = scores.dim(1);
  if (cols < rows) {
    raise(ErrorCategory::kDimension,
          "causal_softmax: needs cols >= rows, got " + shape_string(scores.shape()));
  }
  const std::size_t offset = cols - rows;
  auto xd = scores.data();
  std::vector<double> out(xd.size(), 0.0);
  std::uint64_t visible_total = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t visible = i + offset + 1;
    visible_total += visible;
    const double* x = xd.data() + i * cols;
    double* y = out.data() + i * cols;
    double mx = x[0];
    for (std::size_t j = 1; j < visible; ++j) mx = std::max(mx, x[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < visible; ++j) {
      y[j] = std::exp(x[j] - mx);
      total += y[j];
    }
    for (std::size_t j = 0; j < visible; ++j) y[j] /= total;
  }
  count(FlopClass::kElementwise, flop_cost::kSoftmaxElementwise * visible_total);
  count(FlopClass::kTranscendental, flop_cost::kSoftmaxTranscendental * visible_total);
  return make_result(scores.shape(), std::move(out), {scores}, [rows, cols, offset](Node& self) {
    auto* gx = parent_grad(self, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t visible = i + offset + 1;
      const double* y = self.data.data() + i * cols;
      const double* g = self.grad.data() + i * cols;
      double dot = 0.0;
      for (std::size_t j = 0; j < visible; ++j) dot += g[j] * y[j];
      for (std::size_t j = 0; j < visible; ++j) (*gx)[i * cols + j] += y[j] * (g[j] - dot);
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  require_rank(gain, 1, "layer_norm");
  require_rank(bias, 1, "layer_norm");
  if (x.rank() == 0 || x.shape().back() != gain.dim(0) || bias.dim(0) != gain.dim(0)) {
    raise(ErrorCategory::kDimension, "layer_norm: shape mismatch " + shape_string(x.shape()) +
                                         " vs gain " + shape_string(gain.shape()));
  }
  const std::size_t d = gain.dim(0);
  const std::size_t rows = x.numel() / d;
  auto xd = x.data();
  auto gd = gain.data();
  auto bd = bias.data();
  std::vector<double> out(xd.size());
  std::vector<double> xhat(xd.size());
  std::vector<double> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xd.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xr[j] - mu) * rstd[r];
      xhat[r * d + j] = h;
      out[r * d + j] = h * gd[j] + bd[j];
    }
  }
  count(FlopClass::kElementwise, flop_cost::kLayerNormElementwise * xd.size());
  count(FlopClass::kTranscendental, flop_cost::kLayerNormRowTranscendental * rows);
  return make_result(
      x.shape(), std::move(out), {x, gain, bias},
      [d, rows, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
        const auto& gv = in(self, 1);
        auto* gx = parent_grad(self, 0);
        auto* gg = parent_grad(self, 1);
        auto* gb = parent_grad(self, 2);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* g = self.grad.data() + r * d;
          const double* h = xhat.data() + r * d;
          if (gg)
            for (std::size_t j = 0; j < d; ++j) (*gg)[j] += g[j] * h[j];
          if (gb)
            for (std::size_t j = 0; j < d; ++j) (*gb)[j] += g[j];
          if (gx) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              const double dh = g[j] * gv[j];
              mean_dh += dh;
              mean_dh_h += dh * h[j];
            }
            mean_dh /= static_cast<double>(d);
            mean_dh_h /= static_cast<double>(d);
            for (std::size_t j = 0; j < d; ++j) {
              const double dh = g[j] * gv[j];
              (*gx)[r * d + j] += rstd[r] * (dh - mean_dh - h[j] * mean_dh_h);
            }
          }
        }
      });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  count(FlopClass::kElementwise, x.numel());
  return make_result({}, {total}, {x}, [](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (double& v : *g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  return scale(sum(x), 1.0 / n);
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    raise(ErrorCategory::kDimension,
          "reshape: " + shape_string(x.shape()) + " cannot become " + shape_string(shape));
  }
  return make_result(std::move(shape), x.to_vector(), {x}, [](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_rows");
  const std::size_t n = x.dim(1);
  if (begin > end || end > x.dim(0)) {
    raise(ErrorCategory::kDimension, "slice_rows: [" + std::to_string(begin) + "," +
                                         std::to_string(end) + ") out of " +
                                         shape_string(x.shape()));
  }
  auto xd = x.data();
  std::vector<double> out(xd.begin() + begin * n, xd.begin() + end * n);
  return make_result({end - begin, n}, std::move(out), {x}, [begin, n](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[begin * n + i] += self.grad[i];
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_cols");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (begin > end || end > n) {
    raise(ErrorCategory::kDimension, "slice_cols: [" + std::to_string(begin) + "," +
                                         std::to_string(end) + ") out of " +
                                         shape_string(x.shape()));
  }
  const std::size_t w = end - begin;
  auto xd = x.data();
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(xd.begin() + i * n + begin, w, out.begin() + i * w);
  return make_result({m, w}, std::move(out), {x}, [m, n, w, begin](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j) (*g)[i * n + begin + j] += self.grad[i * w + j];
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) raise(ErrorCategory::kContract, "concat_rows: no inputs");
  const std::size_t n = parts[0].dim(1);
  std::size_t rows = 0;
  std::vector<double> out;
  for (const Tensor& p : parts) {
    require_rank(p, 2, "concat_rows");
    if (p.dim(1) != n) {
      raise(ErrorCategory::kDimension, "concat_rows: width mismatch " +
                                           shape_string(parts[0].shape()) + " vs " +
                                           shape_string(p.shape()));
    }
    rows += p.dim(0);
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return make_result({rows, n}, std::move(out), parts, [](Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < self.parents.size(); ++p) {
      const std::size_t len = self.parents[p]->data.size();
      if (auto* g = parent_grad(self, p))
        for (std::size_t i = 0; i < len; ++i) (*g)[i] += self.grad[offset + i];
      offset += len;
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) raise(ErrorCategory::kContract, "concat_cols: no inputs");
  const std::size_t m = parts[0].dim(0);
  std::size_t cols = 0;
  for (const Tensor& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != m) {
      raise(ErrorCategory::kDimension, "concat_cols: height mismatch " +
                                           shape_string(parts[0].shape()) + " vs " +
                                           shape_string(p.shape()));
    }
    cols += p.dim(1);
  }
  std::vector<double> out(m * cols);
  std::size_t col = 0;
  for (const Tensor& p : parts) {
    const std::size_t w = p.dim(1);
    auto pd = p.data();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(pd.begin() + i * w, w, out.begin() + i * cols + col);
    col += w;
  }
  return make_result({m, cols}, std::move(out), parts, [m, cols](Node& self) {
    std::size_t c0 = 0;
    for (std::size_t p = 0; p < self.parents.size(); ++p) {
      const std::size_t w = self.parents[p]->shape[1];
      if (auto* g = parent_grad(self, p))
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j) (*g)[i * w + j] += self.grad[i * cols + c0 + j];
      c0 += w;
    }
  });
}

Tensor embedding(const Tensor& weight, std::span<const int> ids) {
  require_rank(weight, 2, "embedding");
  const std::size_t vocab = weight.dim(0), d = weight.dim(1);
  auto wd = weight.data();
  std::vector<double> out(ids.size() * d);
  std::vector<int> kept(ids.begin(), ids.end());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || static_cast<std::size_t>(ids[t]) >= vocab) {
      raise(ErrorCategory::kVocabulary, "token id " + std::to_string(ids[t]) +
                                            " outside vocabulary of " + std::to_string(vocab));
    }
    std::copy_n(wd.begin() + ids[t] * d, d, out.begin() + t * d);
  }
  return make_result({ids.size(), d}, std::move(out), {weight}, [d, kept](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t t = 0; t < kept.size(); ++t)
        for (std::size_t j = 0; j < d; ++j) (*g)[kept[t] * d + j] += self.grad[t * d + j];
  });
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0) raise(ErrorCategory::kContract, "dropout rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - p);
  auto xd = x.data();
  std::vector<double> mask(xd.size());
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) {
    mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
    out[i] = xd[i] * mask[i];
  }
  count(FlopClass::kElementwise, xd.size());
  return make_result(x.shape(), std::move(out), {x}, [mask = std::move(mask)](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * mask[i];
  });
}

Tensor weighted_nll(const Tensor& logits, std::span<const int> targets,
                    std::span<const double> weights) {
  require_rank(logits, 2, "weighted_nll");
  const std::size_t rows = logits.dim(0), vocab = logits.dim(1);
  if (targets.size() != rows || weights.size() != rows) {
    raise(ErrorCategory::kDimension, "weighted_nll: " + std::to_string(targets.size()) +
                                         " targets / " + std::to_string(weights.size()) +
                                         " weights for logits " + shape_string(logits.shape()));
  }
  auto xd = logits.data();
  std::vector<double> probs(xd.size());
  double total = 0.0;
  for (std::size_t t = 0; t < rows; ++t) {
    if (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= vocab) {
      raise(ErrorCategory::kVocabulary, "target id " + std::to_string(targets[t]) +
                                            " outside vocabulary of " + std::to_string(vocab));
    }
    const double* x = xd.data() + t * vocab;
    double mx = x[0];
    for (std::size_t v = 1; v < vocab; ++v) mx = std::max(mx, x[v]);
    double z = 0.0;
    for (std::size_t v = 0; v < vocab; ++v) {
      probs[t * vocab + v] = std::exp(x[v] - mx);
      z += probs[t * vocab + v];
    }
    for (std::size_t v = 0; v < vocab; ++v) probs[t * vocab + v] /= z;
    const double log_z = mx + std::log(z);
    if (weights[t] != 0.0) total += weights[t] * (log_z - x[targets[t]]);
  }
  count(FlopClass::kElementwise, 3 * xd.size());
  count(FlopClass::kTranscendental, xd.size());
  std::vector<int> tgt(targets.begin(), targets.end());
  std::vector<double> w(weights.begin(), weights.end());
  return make_result({}, {total}, {logits},
                     [rows, vocab, probs = std::move(probs), tgt = std::move(tgt),
                      w = std::move(w)](Node& self) {
                       auto* g = parent_grad(self, 0);
                       if (!g) return;
                       const double up = self.grad[0];
                       for (std::size_t t = 0; t < rows; ++t) {
                         if (w[t] == 0.0) continue;
                         for (std::size_t v = 0; v < vocab; ++v) {
                           const double onehot = static_cast<int>(v) == tgt[t] ? 1.0 : 0.0;
                           (*g)[t * vocab + v] += up * w[t] * (probs[t * vocab + v] - onehot);
                         }
                       }
                     });
}

}  // namespace ssmgen
