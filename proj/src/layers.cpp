//  Copyright 2026 The Typhoon Joint Authors. All Rights Reserved.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.


#include "typhoon/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "typhoon/errors.hpp"

namespace typhoon {

namespace {

Tensor as_rows(const Tensor& x) {
  return x.rank() == 1 ? ops::reshape(x, {1, x.dim(0)}) : x;
}

Tensor gate(const Tensor& x, const Tensor& h, const Tensor& wx,
            const Tensor& wh, const Tensor& b) {
  return ops::add(ops::add(ops::matmul(x, wx), ops::matmul(h, wh)), b);
}

// Views a [len x ch] or [batch x len x ch] tensor as (batch, len, ch).
struct SeqDims {
  std::size_t batch, len, ch;
};

SeqDims seq_dims(const Tensor& x, const char* op) {
  if (x.rank() == 2) return {1, x.dim(0), x.dim(1)};
  if (x.rank() == 3) return {x.dim(0), x.dim(1), x.dim(2)};
  throw ShapeError(std::string(op) + " needs [len x ch] or [batch x len x ch], got " +
                   shape_string(x.shape()));
}

Shape seq_shape(const Tensor& like, std::size_t len, std::size_t ch) {
  if (like.rank() == 2) return {len, ch};
  return {like.dim(0), len, ch};
}

}  // namespace

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::zeros(std::move(shape), true);
  for (double& v : t.mutable_data()) v = rng.uniform(-limit, limit);
  return t;
}

// --- LSTM -------------------------------------------------------------------

LstmParams LstmParams::init(std::size_t input_dim, std::size_t units, Rng& rng) {
  LstmParams p;
  p.input_dim = input_dim;
  p.units = units;
  for (Tensor* w : {&p.x_i, &p.x_f, &p.x_o, &p.x_g}) {
    *w = glorot_uniform({input_dim, units}, input_dim, units, rng);
  }
  for (Tensor* w : {&p.h_i, &p.h_f, &p.h_o, &p.h_g}) {
    *w = glorot_uniform({units, units}, units, units, rng);
  }
  p.b_i = Tensor::zeros({units}, true);
  p.b_f = Tensor::full({units}, 1.0, true);
  p.b_o = Tensor::zeros({units}, true);
  p.b_g = Tensor::zeros({units}, true);
  return p;
}

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t units) {
  LstmParams p;
  p.input_dim = input_dim;
  p.units = units;
  for (Tensor* w : {&p.x_i, &p.x_f, &p.x_o, &p.x_g}) {
    *w = Tensor::zeros({input_dim, units}, true);
  }
  for (Tensor* w : {&p.h_i, &p.h_f, &p.h_o, &p.h_g}) {
    *w = Tensor::zeros({units, units}, true);
  }
  for (Tensor* b : {&p.b_i, &p.b_f, &p.b_o, &p.b_g}) {
    *b = Tensor::zeros({units}, true);
  }
  return p;
}

void LstmParams::append_to(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".x_i", x_i});
  out.push_back({prefix + ".x_f", x_f});
  out.push_back({prefix + ".x_o", x_o});
  out.push_back({prefix + ".x_g", x_g});
  out.push_back({prefix + ".h_i", h_i});
  out.push_back({prefix + ".h_f", h_f});
  out.push_back({prefix + ".h_o", h_o});
  out.push_back({prefix + ".h_g", h_g});
  out.push_back({prefix + ".b_i", b_i});
  out.push_back({prefix + ".b_f", b_f});
  out.push_back({prefix + ".b_o", b_o});
  out.push_back({prefix + ".b_g", b_g});
}

LstmState lstm_cell_step(const LstmParams& p, const Tensor& x,
                         const Tensor& h_prev, const Tensor& m_prev) {
  const bool single = x.rank() == 1;
  const Tensor xr = as_rows(x);
  const Tensor hr = as_rows(h_prev);
  const Tensor mr = as_rows(m_prev);
  if (xr.dim(1) != p.input_dim || hr.dim(1) != p.units || mr.dim(1) != p.units ||
      hr.dim(0) != xr.dim(0) || mr.dim(0) != xr.dim(0)) {
    throw ShapeError("lstm_cell_step: x " + shape_string(x.shape()) + ", h " +
                     shape_string(h_prev.shape()) + ", m " +
                     shape_string(m_prev.shape()) + " do not fit d=" +
                     std::to_string(p.input_dim) +
                     ", u=" + std::to_string(p.units));
  }
  const Tensor i = ops::sigmoid(gate(xr, hr, p.x_i, p.h_i, p.b_i));
  const Tensor f = ops::sigmoid(gate(xr, hr, p.x_f, p.h_f, p.b_f));
  const Tensor o = ops::sigmoid(gate(xr, hr, p.x_o, p.h_o, p.b_o));
  const Tensor g = ops::tanh(gate(xr, hr, p.x_g, p.h_g, p.b_g));
  const Tensor m = ops::add(ops::mul(f, mr), ops::mul(i, g));
  const Tensor h = ops::mul(o, ops::tanh(m));
  if (single) {
    return {ops::reshape(h, {p.units}), ops::reshape(m, {p.units})};
  }
  return {h, m};
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;

ConstRowMap view(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstRowMap(t.data().data(), static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

RowMap grad_view(const Tensor& t, std::size_t rows, std::size_t cols) {
  return RowMap(t.mutable_grad().data(), static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
}

}  // namespace

Tensor lstm_sequence(const LstmParams& p, std::span<const Tensor> steps, bool reverse) {
  if (steps.empty()) throw ContractError("lstm_sequence: empty sequence");
  const std::size_t s = steps.size();
  const std::size_t n = steps.front().dim(0);
  const std::size_t d = p.input_dim, u = p.units;
  for (const Tensor& x : steps) {
    if (x.rank() != 2 || x.dim(0) != n || x.dim(1) != d) {
      throw ShapeError("lstm_sequence: step " + shape_string(x.shape()) +
                       " does not fit [" + std::to_string(n) + " x " +
                       std::to_string(d) + "]");
    }
  }
  const auto N = static_cast<Eigen::Index>(n);
  const auto U = static_cast<Eigen::Index>(u);
  const std::array<const Tensor*, 4> xw = {&p.x_i, &p.x_f, &p.x_o, &p.x_g};
  const std::array<const Tensor*, 4> hw = {&p.h_i, &p.h_f, &p.h_o, &p.h_g};
  const std::array<const Tensor*, 4> bw = {&p.b_i, &p.b_f, &p.b_o, &p.b_g};
  RowMat wx(d, 4 * u), wh(u, 4 * u);
  Eigen::RowVectorXd bias(4 * u);
  for (std::size_t q = 0; q < 4; ++q) {
    const auto c0 = static_cast<Eigen::Index>(q * u);
    wx.middleCols(c0, U) = view(*xw[q], d, u);
    wh.middleCols(c0, U) = view(*hw[q], u, u);
    bias.segment(c0, U) = view(*bw[q], 1, u);
  }
  // Step t of the processing order reads input order[t].
  std::vector<std::size_t> order(s);
  for (std::size_t t = 0; t < s; ++t) order[t] = reverse ? s - 1 - t : t;
  RowMat x(s * n, d);
  for (std::size_t t = 0; t < s; ++t) {
    x.middleRows(static_cast<Eigen::Index>(t * n), N) = view(steps[order[t]], n, d);
  }
  const RowMat zx = x * wx;

  // Caches per step: gate activations [n x 4u], previous h and m, tanh(m).
  std::vector<RowMat> gates(s), h_prev(s), m_prev(s), tanh_m(s);
  RowMat h = RowMat::Zero(N, U), m = RowMat::Zero(N, U);
  for (std::size_t t = 0; t < s; ++t) {
    RowMat z = zx.middleRows(static_cast<Eigen::Index>(t * n), N);
    z.noalias() += h * wh;
    z.rowwise() += bias;
    auto za = z.array();
    za.leftCols(3 * U) = 1.0 / (1.0 + (-za.leftCols(3 * U)).exp());
    za.rightCols(U) = za.rightCols(U).tanh();
    h_prev[t] = h;
    m_prev[t] = m;
    m = (za.middleCols(U, U) * m.array() + za.leftCols(U) * za.rightCols(U)).matrix();
    tanh_m[t] = m.array().tanh().matrix();
    h = (za.middleCols(2 * U, U) * tanh_m[t].array()).matrix();
    gates[t] = std::move(z);
  }
  Tensor out = Tensor::from({n, u}, std::vector<double>(h.data(), h.data() + h.size()));

  bool record = active_tape() != nullptr;
  if (record) {
    bool any = false;
    for (const Tensor* t : xw) any = any || t->requires_grad();
    for (const Tensor* t : hw) any = any || t->requires_grad();
    for (const Tensor* t : bw) any = any || t->requires_grad();
    for (const Tensor& t : steps) any = any || t.requires_grad();
    record = any;
  }
  if (record) {
    out.set_requires_grad(true);
    std::vector<Tensor> inputs(steps.begin(), steps.end());
    for (const auto* group : {&xw, &hw, &bw}) {
      for (const Tensor* t : *group) inputs.push_back(*t);
    }
    std::vector<Tensor> step_list(steps.begin(), steps.end());
    active_tape()->record(
        out, inputs,
        [out, p, step_list, order, x = std::move(x), wx = std::move(wx), wh = std::move(wh),
         gates = std::move(gates), h_prev = std::move(h_prev), m_prev = std::move(m_prev),
         tanh_m = std::move(tanh_m), s, n, d, u]() {
          const auto N = static_cast<Eigen::Index>(n);
          const auto U = static_cast<Eigen::Index>(u);
          RowMat dh = ConstRowMap(out.grad().data(), N, U);
          RowMat dm = RowMat::Zero(N, U);
          RowMat dz_all(s * n, 4 * u);
          RowMat dwh = RowMat::Zero(u, 4 * u);
          for (std::size_t t = s; t-- > 0;) {
            const auto g = gates[t].array();
            const auto i = g.leftCols(U), f = g.middleCols(U, U), o = g.middleCols(2 * U, U),
                       c = g.rightCols(U);
            const auto tm = tanh_m[t].array();
            dm.array() += dh.array() * o * (1.0 - tm * tm);
            auto dz = dz_all.middleRows(static_cast<Eigen::Index>(t * n), N).array();
            dz.leftCols(U) = dm.array() * c * i * (1.0 - i);
            dz.middleCols(U, U) = dm.array() * m_prev[t].array() * f * (1.0 - f);
            dz.middleCols(2 * U, U) = dh.array() * tm * o * (1.0 - o);
            dz.rightCols(U) = dm.array() * i * (1.0 - c * c);
            dm.array() *= f;
            const auto dz_t = dz_all.middleRows(static_cast<Eigen::Index>(t * n), N);
            dwh.noalias() += h_prev[t].transpose() * dz_t;
            dh.noalias() = dz_t * wh.transpose();
          }
          const std::array<const Tensor*, 4> xw = {&p.x_i, &p.x_f, &p.x_o, &p.x_g};
          const std::array<const Tensor*, 4> hw = {&p.h_i, &p.h_f, &p.h_o, &p.h_g};
          const std::array<const Tensor*, 4> bw = {&p.b_i, &p.b_f, &p.b_o, &p.b_g};
          const bool need_wx = std::any_of(xw.begin(), xw.end(),
                                           [](const Tensor* t) { return t->requires_grad(); });
          RowMat dwx;
          if (need_wx) dwx.noalias() = x.transpose() * dz_all;
          const Eigen::RowVectorXd db = dz_all.colwise().sum();
          for (std::size_t q = 0; q < 4; ++q) {
            const auto c0 = static_cast<Eigen::Index>(q * u);
            if (xw[q]->requires_grad()) grad_view(*xw[q], d, u) += dwx.middleCols(c0, U);
            if (hw[q]->requires_grad()) grad_view(*hw[q], u, u) += dwh.middleCols(c0, U);
            if (bw[q]->requires_grad()) grad_view(*bw[q], 1, u) += db.segment(c0, U);
          }
          const bool need_x = std::any_of(step_list.begin(), step_list.end(),
                                          [](const Tensor& t) { return t.requires_grad(); });
          if (need_x) {
            const RowMat dx = dz_all * wx.transpose();
            for (std::size_t t = 0; t < s; ++t) {
              const Tensor& xt = step_list[order[t]];
              if (!xt.requires_grad()) continue;
              grad_view(xt, n, d) += dx.middleRows(static_cast<Eigen::Index>(t * n), N);
            }
          }
        });
  }
  return out;
}

Tensor bilstm_forward(const LstmParams& fwd, const LstmParams& bwd,
                      std::span<const Tensor> steps) {
  if (steps.empty()) throw ContractError("bilstm_forward: empty sequence");
  if (fwd.units != bwd.units || fwd.input_dim != bwd.input_dim) {
    throw ShapeError("bilstm_forward: direction parameter shapes differ");
  }
  return ops::concat({lstm_sequence(fwd, steps, false), lstm_sequence(bwd, steps, true)}, 1);
}

Tensor bilstm_forward(const LstmParams& fwd, const LstmParams& bwd,
                      const Tensor& seq) {
  if (seq.rank() != 2) {
    throw ShapeError("bilstm_forward expects [s x d], got " +
                     shape_string(seq.shape()));
  }
  const std::size_t s = seq.dim(0);
  std::vector<Tensor> steps;
  steps.reserve(s);
  for (std::size_t t = 0; t < s; ++t) {
    const std::size_t row[] = {t};
    steps.push_back(ops::gather_rows(seq, row));
  }
  const Tensor out = bilstm_forward(fwd, bwd, steps);
  return ops::reshape(out, {2 * fwd.units});
}

// --- dense ------------------------------------------------------------------

DenseParams DenseParams::init(std::size_t in, std::size_t out, Rng& rng) {
  return {glorot_uniform({in, out}, in, out, rng), Tensor::zeros({out}, true)};
}

void DenseParams::append_to(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".w", w});
  out.push_back({prefix + ".b", b});
}

Tensor dense_forward(const Tensor& w, const Tensor& b, const Tensor& x,
                     Activation activation) {
  if (w.rank() != 2 || b.rank() != 1 || b.dim(0) != w.dim(1)) {
    throw ShapeError("dense_forward: weight " + shape_string(w.shape()) +
                     " and bias " + shape_string(b.shape()) + " disagree");
  }
  const Tensor rows = as_rows(x);
  if (rows.dim(1) != w.dim(0)) {
    throw ShapeError("dense_forward: input " + shape_string(x.shape()) +
                     " does not match weight " + shape_string(w.shape()));
  }
  Tensor z = ops::add(ops::matmul(rows, w), b);
  switch (activation) {
    case Activation::none: break;
    case Activation::relu: z = ops::relu(z); break;
    case Activation::sigmoid: z = ops::sigmoid(z); break;
  }
  return x.rank() == 1 ? ops::reshape(z, {w.dim(1)}) : z;
}

// --- conv / pool --------------------------------------------------------------

Conv1dParams Conv1dParams::init(std::size_t in_channels,
                                std::size_t out_channels,
                                std::size_t kernel_size, Rng& rng) {
  Conv1dParams p;
  p.kernel_size = kernel_size;
  p.kernels = glorot_uniform({out_channels, in_channels, kernel_size},
                             in_channels * kernel_size,
                             out_channels * kernel_size, rng);
  p.bias = Tensor::zeros({out_channels}, true);
  return p;
}

void Conv1dParams::append_to(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".kernels", kernels});
  out.push_back({prefix + ".bias", bias});
}

Tensor conv1d_forward(const Conv1dParams& p, const Tensor& x) {
  if (p.kernel_size % 2 == 0) {
    throw ContractError("conv1d: kernel size must be odd for same padding, got " +
                        std::to_string(p.kernel_size));
  }
  if (p.kernels.rank() != 3 || p.kernels.dim(2) != p.kernel_size ||
      p.bias.size() != p.kernels.dim(0)) {
    throw ShapeError("conv1d: malformed parameters " +
                     shape_string(p.kernels.shape()));
  }
  const SeqDims s = seq_dims(x, "conv1d");
  const std::size_t cin = p.in_channels(), cout = p.out_channels();
  const std::size_t k = p.kernel_size;
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  if (s.ch != cin) {
    throw ShapeError("conv1d: input " + shape_string(x.shape()) + " has " +
                     std::to_string(s.ch) + " channels, kernel expects " +
                     std::to_string(cin));
  }
  Tensor out = Tensor::zeros(seq_shape(x, s.len, cout));
  auto o = out.mutable_data();
  auto in = x.data();
  auto w = p.kernels.data();
  auto bias = p.bias.data();
  const auto len = static_cast<std::ptrdiff_t>(s.len);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::ptrdiff_t t = 0; t < len; ++t) {
      double* orow = &o[(b * s.len + static_cast<std::size_t>(t)) * cout];
      for (std::size_t c = 0; c < cout; ++c) orow[c] = bias[c];
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t pos = t + static_cast<std::ptrdiff_t>(j) - half;
        if (pos < 0 || pos >= len) continue;
        const double* irow = &in[(b * s.len + static_cast<std::size_t>(pos)) * cin];
        for (std::size_t c = 0; c < cout; ++c) {
          double acc = 0.0;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            acc += irow[ci] * w[(c * cin + ci) * k + j];
          }
          orow[c] += acc;
        }
      }
    }
  }
  const Tensor kernels = p.kernels;
  const Tensor bias_t = p.bias;
  if (needs_record({&x, &kernels, &bias_t})) {
    out.set_requires_grad(true);
    active_tape()->record(
        out, {x, kernels, bias_t},
        [x, kernels, bias_t, out, s, cin, cout, k, half]() mutable {
          auto g = out.grad();
          auto in = x.data();
          auto w = kernels.data();
          const bool gx_on = x.requires_grad();
          const bool gw_on = kernels.requires_grad();
          std::span<double> gx = gx_on ? x.mutable_grad() : std::span<double>{};
          std::span<double> gw =
              gw_on ? kernels.mutable_grad() : std::span<double>{};
          const auto len = static_cast<std::ptrdiff_t>(s.len);
          for (std::size_t b = 0; b < s.batch; ++b) {
            for (std::ptrdiff_t t = 0; t < len; ++t) {
              const double* grow = &g[(b * s.len + static_cast<std::size_t>(t)) * cout];
              for (std::size_t j = 0; j < k; ++j) {
                const std::ptrdiff_t pos = t + static_cast<std::ptrdiff_t>(j) - half;
                if (pos < 0 || pos >= len) continue;
                const std::size_t base = (b * s.len + static_cast<std::size_t>(pos)) * cin;
                for (std::size_t c = 0; c < cout; ++c) {
                  for (std::size_t ci = 0; ci < cin; ++ci) {
                    if (gx_on) gx[base + ci] += grow[c] * w[(c * cin + ci) * k + j];
                    if (gw_on) gw[(c * cin + ci) * k + j] += grow[c] * in[base + ci];
                  }
                }
              }
            }
          }
          if (bias_t.requires_grad()) {
            auto gb = bias_t.mutable_grad();
            for (std::size_t r = 0; r < s.batch * s.len; ++r) {
              for (std::size_t c = 0; c < cout; ++c) gb[c] += g[r * cout + c];
            }
          }
        });
  }
  return out;
}

Tensor maxpool1d_forward(const Tensor& x, std::size_t pool) {
  if (pool < 1) throw ContractError("maxpool1d: pool window must be >= 1");
  const SeqDims s = seq_dims(x, "maxpool1d");
  const std::size_t out_len = (s.len + pool - 1) / pool;
  Tensor out = Tensor::zeros(seq_shape(x, out_len, s.ch));
  auto o = out.mutable_data();
  auto in = x.data();
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t w = 0; w < out_len; ++w) {
      const std::size_t start = w * pool;
      const std::size_t stop = std::min(start + pool, s.len);
      for (std::size_t c = 0; c < s.ch; ++c) {
        std::size_t best = (b * s.len + start) * s.ch + c;
        for (std::size_t t = start + 1; t < stop; ++t) {
          const std::size_t idx = (b * s.len + t) * s.ch + c;
          if (in[idx] > in[best]) best = idx;
        }
        const std::size_t oi = (b * out_len + w) * s.ch + c;
        o[oi] = in[best];
        argmax[oi] = best;
      }
    }
  }
  if (needs_record({&x})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {x}, [x, out, argmax = std::move(argmax)]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[argmax[i]] += g[i];
    });
  }
  return out;
}

Tensor dropout_forward(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ContractError("dropout rate must lie in [0, 1), got " +
                        std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask = Tensor::zeros(x.shape());
  for (double& v : mask.mutable_data()) {
    v = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return ops::mul(x, mask);
}

Tensor softmax(const Tensor& z) {
  for (double v : z.data()) {
    if (!std::isfinite(v)) throw ContractError("softmax: non-finite input");
  }
  const std::size_t k = z.shape().back();
  const std::size_t rows = z.size() / k;
  Tensor out = Tensor::zeros(z.shape());
  auto o = out.mutable_data();
  auto in = z.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* zr = &in[r * k];
    double* yr = &o[r * k];
    const double top = *std::max_element(zr, zr + k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      yr[j] = std::exp(zr[j] - top);
      total += yr[j];
    }
    for (std::size_t j = 0; j < k; ++j) yr[j] /= total;
  }
  if (needs_record({&z})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {z}, [z, out, rows, k]() mutable {
      auto g = out.grad();
      auto y = out.data();
      auto gz = z.mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < k; ++j) dot += g[r * k + j] * y[r * k + j];
        for (std::size_t j = 0; j < k; ++j) {
          gz[r * k + j] += y[r * k + j] * (g[r * k + j] - dot);
        }
      }
    });
  }
  return out;
}

}  // namespace typhoon
