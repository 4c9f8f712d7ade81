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


#include "typhoon/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "typhoon/errors.hpp"

namespace typhoon {

namespace {

thread_local Tape* g_active_tape = nullptr;

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

ConstMap as_matrix(std::span<const double> data, std::size_t rows,
                   std::size_t cols) {
  return ConstMap(data.data(), static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(cols));
}

MutMap as_matrix(std::span<double> data, std::size_t rows, std::size_t cols) {
  return MutMap(data.data(), static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
}

// Splits a shape around `axis` into (outer, extent, inner) counts.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

// --- Tensor -----------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " +
                                 shape_string(shape));
  }
  auto impl = std::make_shared<Impl>();
  impl->data.assign(shape_size(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " +
                                 shape_string(shape));
  }
  if (shape_size(shape) != data.size()) {
    throw ShapeError("shape " + shape_string(shape) + " does not hold " +
                     std::to_string(data.size()) + " values");
  }
  auto impl = std::make_shared<Impl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::vector(std::vector<double> data, bool requires_grad) {
  Shape shape{data.size()};
  return from(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return impl_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     shape_string(s));
  }
  return s[axis];
}

std::size_t Tensor::size() const { return defined() ? impl_->data.size() : 0; }

std::span<const double> Tensor::data() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return impl_->data;
}

std::span<double> Tensor::mutable_data() {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return impl_->data;
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on non-scalar tensor " + shape_string(shape()));
  }
  return impl_->data[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) throw ShapeError("at(row, col) needs a rank-2 tensor");
  return impl_->data[row * impl_->shape[1] + col];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

void Tensor::set_requires_grad(bool value) {
  if (!impl_) throw ContractError("use of an undefined tensor");
  impl_->requires_grad = value;
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  return mutable_grad();
}

std::span<double> Tensor::mutable_grad() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  return from(shape(), std::vector<double>(data().begin(), data().end()));
}

// --- Tape -------------------------------------------------------------------

void Tape::record(const Tensor& output, std::vector<Tensor> inputs,
                  std::function<void()> backward) {
  if (consumed_) {
    throw ContractError("recording onto a tape that was already replayed");
  }
  nodes_.push_back({output, std::move(inputs), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) {
    throw ContractError("backward called twice on the same tape; reset() it");
  }
  if (loss.size() != 1) {
    throw ContractError("backward needs a scalar loss, got " +
                        shape_string(loss.shape()));
  }
  const bool on_tape =
      std::any_of(nodes_.begin(), nodes_.end(), [&](const Node& n) {
        return n.output.same_storage(loss);
      });
  if (!on_tape) {
    throw ContractError("loss was not produced on this tape");
  }
  consumed_ = true;
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output.has_grad()) it->backward();
  }
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) {
  g_active_tape = nullptr;
}
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

bool needs_record(std::initializer_list<const Tensor*> inputs) {
  if (!g_active_tape) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

// --- ops --------------------------------------------------------------------

namespace ops {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch: " + shape_string(a.shape()) +
                     " x " + shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::zeros({m, n});
  as_matrix(out.mutable_data(), m, n).noalias() =
      as_matrix(a.data(), m, k) * as_matrix(b.data(), k, n);
  if (needs_record({&a, &b})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {a, b}, [a, b, out, m, k, n]() mutable {
      auto g = as_matrix(out.grad(), m, n);
      if (a.requires_grad()) {
        as_matrix(a.mutable_grad(), m, k).noalias() +=
            g * as_matrix(b.data(), k, n).transpose();
      }
      if (b.requires_grad()) {
        as_matrix(b.mutable_grad(), k, n).noalias() +=
            as_matrix(a.data(), m, k).transpose() * g;
      }
    });
  }
  return out;
}

Tensor elementwise(Binary op, const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool row_broadcast = !same && b.rank() == 1 && a.rank() >= 1 &&
                             a.shape().back() == b.dim(0);
  if (!same && !row_broadcast) {
    throw ShapeError("elementwise shape mismatch: " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  }
  const std::size_t n = a.size();
  const std::size_t period = b.size();
  Tensor out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double bv = y[i % period];
    switch (op) {
      case Binary::add: o[i] = x[i] + bv; break;
      case Binary::sub: o[i] = x[i] - bv; break;
      case Binary::mul: o[i] = x[i] * bv; break;
    }
  }
  if (needs_record({&a, &b})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {a, b}, [op, a, b, out, n, period]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        auto y = b.data();
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] += op == Binary::mul ? g[i] * y[i % period] : g[i];
        }
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        auto x = a.data();
        for (std::size_t i = 0; i < n; ++i) {
          switch (op) {
            case Binary::add: gb[i % period] += g[i]; break;
            case Binary::sub: gb[i % period] -= g[i]; break;
            case Binary::mul: gb[i % period] += g[i] * x[i]; break;
          }
        }
      }
    });
  }
  return out;
}

Tensor elementwise(Unary op, const Tensor& a) {
  const std::size_t n = a.size();
  Tensor out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  auto x = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    switch (op) {
      case Unary::sigmoid:
        // Split by sign so exp never overflows.
        o[i] = x[i] >= 0 ? 1.0 / (1.0 + std::exp(-x[i]))
                         : std::exp(x[i]) / (1.0 + std::exp(x[i]));
        break;
      case Unary::tanh: o[i] = std::tanh(x[i]); break;
      case Unary::relu: o[i] = x[i] > 0 ? x[i] : 0.0; break;
    }
  }
  if (needs_record({&a})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {a}, [op, a, out, n]() mutable {
      auto g = out.grad();
      auto y = out.data();
      auto x = a.data();
      auto ga = a.mutable_grad();
      for (std::size_t i = 0; i < n; ++i) {
        switch (op) {
          case Unary::sigmoid: ga[i] += g[i] * y[i] * (1.0 - y[i]); break;
          case Unary::tanh: ga[i] += g[i] * (1.0 - y[i] * y[i]); break;
          case Unary::relu: ga[i] += x[i] > 0 ? g[i] : 0.0; break;
        }
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  auto x = a.data();
  for (std::size_t i = 0; i < x.size(); ++i) o[i] = x[i] * factor;
  if (needs_record({&a})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {a}, [a, out, factor]() mutable {
      auto g = out.grad();
      auto ga = a.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
    });
  }
  return out;
}

Tensor reduce(Reduce op, const Tensor& a) {
  const std::size_t n = a.size();
  double total = 0.0;
  for (double v : a.data()) total += v;
  const double factor = op == Reduce::mean ? 1.0 / static_cast<double>(n) : 1.0;
  Tensor out = Tensor::scalar(total * factor);
  if (needs_record({&a})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {a}, [a, out, factor]() mutable {
      const double g = out.grad()[0] * factor;
      for (double& v : a.mutable_grad()) v += g;
    });
  }
  return out;
}

Tensor reduce(Reduce op, const Tensor& a, std::size_t axis) {
  if (axis >= a.rank()) {
    throw ShapeError("reduce axis " + std::to_string(axis) +
                     " out of range for " + shape_string(a.shape()));
  }
  const AxisSplit s = split_at(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (out_shape.empty()) out_shape = {1};
  const double factor =
      op == Reduce::mean ? 1.0 / static_cast<double>(s.extent) : 1.0;
  Tensor out = Tensor::zeros(out_shape);
  auto o = out.mutable_data();
  auto x = a.data();
  for (std::size_t p = 0; p < s.outer; ++p) {
    for (std::size_t e = 0; e < s.extent; ++e) {
      for (std::size_t q = 0; q < s.inner; ++q) {
        o[p * s.inner + q] += x[(p * s.extent + e) * s.inner + q];
      }
    }
  }
  for (double& v : o) v *= factor;
  if (needs_record({&a})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {a}, [a, out, s, factor]() mutable {
      auto g = out.grad();
      auto ga = a.mutable_grad();
      for (std::size_t p = 0; p < s.outer; ++p) {
        for (std::size_t e = 0; e < s.extent; ++e) {
          for (std::size_t q = 0; q < s.inner; ++q) {
            ga[(p * s.extent + e) * s.inner + q] += g[p * s.inner + q] * factor;
          }
        }
      }
    });
  }
  return out;
}

Tensor concat(std::span<const Tensor> tensors, std::size_t axis) {
  std::vector<Tensor> parts;
  for (const Tensor& t : tensors) {
    if (t.defined()) parts.push_back(t);
  }
  if (parts.empty()) throw ShapeError("concat of no tensors");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) {
    throw ShapeError("concat axis " + std::to_string(axis) +
                     " out of range for " + shape_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& t : parts) {
    const Shape& s = t.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) ok = false;
    }
    if (!ok) {
      throw ShapeError("concat mismatch on non-axis dimensions: " +
                       shape_string(first) + " vs " + shape_string(s));
    }
    out_shape[axis] += s[axis];
  }
  if (parts.size() == 1) return parts.front();

  const AxisSplit total = split_at(out_shape, axis);
  Tensor out = Tensor::zeros(out_shape);
  auto o = out.mutable_data();
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Tensor& t : parts) {
    offsets.push_back(offset);
    const std::size_t extent = t.dim(axis);
    auto x = t.data();
    for (std::size_t p = 0; p < total.outer; ++p) {
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(p * extent * total.inner),
                  extent * total.inner,
                  o.begin() + static_cast<std::ptrdiff_t>(
                                  (p * total.extent + offset) * total.inner));
    }
    offset += extent;
  }
  bool any_grad = false;
  for (const Tensor& t : parts) any_grad = any_grad || t.requires_grad();
  if (any_grad && active_tape()) {
    out.set_requires_grad(true);
    active_tape()->record(out, parts, [parts, out, offsets, total, axis]() mutable {
      auto g = out.grad();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!parts[i].requires_grad()) continue;
        const std::size_t extent = parts[i].dim(axis);
        auto gp = parts[i].mutable_grad();
        for (std::size_t p = 0; p < total.outer; ++p) {
          for (std::size_t j = 0; j < extent * total.inner; ++j) {
            gp[p * extent * total.inner + j] +=
                g[(p * total.extent + offsets[i]) * total.inner + j];
          }
        }
      }
    });
  }
  return out;
}

Tensor concat(std::initializer_list<Tensor> tensors, std::size_t axis) {
  std::vector<Tensor> v(tensors);
  return concat(std::span<const Tensor>(v), axis);
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw ShapeError("cannot reshape " + shape_string(a.shape()) + " to " +
                     shape_string(shape));
  }
  Tensor out = Tensor::from(std::move(shape),
                            std::vector<double>(a.data().begin(), a.data().end()));
  if (needs_record({&a})) {
    out.set_requires_grad(true);
    active_tape()->record(out, {a}, [a, out]() mutable {
      auto g = out.grad();
      auto ga = a.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> rows,
                   const std::vector<bool>& frozen) {
  if (table.rank() != 2) {
    throw ShapeError("gather_rows needs a rank-2 table, got " +
                     shape_string(table.shape()));
  }
  if (rows.empty()) throw ShapeError("gather_rows with no rows");
  const std::size_t n_rows = table.dim(0), width = table.dim(1);
  Tensor out = Tensor::zeros({rows.size(), width});
  auto o = out.mutable_data();
  auto t = table.data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n_rows) {
      throw ShapeError("gather_rows index " + std::to_string(rows[r]) +
                       " out of range for " + shape_string(table.shape()));
    }
    std::copy_n(t.begin() + static_cast<std::ptrdiff_t>(rows[r] * width), width,
                o.begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  if (needs_record({&table})) {
    out.set_requires_grad(true);
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    std::vector<bool> mask = frozen;
    active_tape()->record(
        out, {table},
        [table, out, idx = std::move(idx), mask = std::move(mask), width]() mutable {
          auto g = out.grad();
          auto gt = table.mutable_grad();
          for (std::size_t r = 0; r < idx.size(); ++r) {
            if (idx[r] < mask.size() && mask[idx[r]]) continue;
            for (std::size_t c = 0; c < width; ++c) {
              gt[idx[r] * width + c] += g[r * width + c];
            }
          }
        });
  }
  return out;
}

Tensor mix_rows(const Tensor& x, std::span<const std::size_t> a,
                std::span<const std::size_t> b, std::span<const double> u) {
  if (x.rank() != 2) throw ShapeError("mix_rows needs a rank-2 input");
  if (a.size() != b.size() || a.size() != u.size() || a.empty()) {
    throw ShapeError("mix_rows index/weight lists must be equal and non-empty");
  }
  const std::size_t n_rows = x.dim(0), width = x.dim(1);
  Tensor out = Tensor::zeros({a.size(), width});
  auto o = out.mutable_data();
  auto v = x.data();
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r] >= n_rows || b[r] >= n_rows) {
      throw ShapeError("mix_rows index out of range");
    }
    for (std::size_t c = 0; c < width; ++c) {
      const double xa = v[a[r] * width + c];
      o[r * width + c] = xa + u[r] * (v[b[r] * width + c] - xa);
    }
  }
  if (needs_record({&x})) {
    out.set_requires_grad(true);
    std::vector<std::size_t> ia(a.begin(), a.end()), ib(b.begin(), b.end());
    std::vector<double> w(u.begin(), u.end());
    active_tape()->record(out, {x}, [x, out, ia, ib, w, width]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t r = 0; r < ia.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
          gx[ia[r] * width + c] += (1.0 - w[r]) * g[r * width + c];
          gx[ib[r] * width + c] += w[r] * g[r * width + c];
        }
      }
    });
  }
  return out;
}

}  // namespace ops

// --- gradient checking --------------------------------------------------------

double gradient_check(const std::function<Tensor()>& f,
                      std::span<const Tensor> params, double eps) {
  if (!(eps > 0.0 && eps <= 1e-2)) {
    throw ContractError("gradient_check eps must lie in (0, 1e-2]");
  }
  std::vector<Tensor> ps(params.begin(), params.end());
  for (Tensor& p : ps) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor out = f();
    if (out.size() != 1) {
      throw ContractError("gradient_check: f must return a scalar, got " +
                          shape_string(out.shape()));
    }
    tape.backward(out);
  }
  auto eval = [&]() {
    NoGradScope no_grad;
    return f().item();
  };
  double worst = 0.0;
  for (Tensor& p : ps) {
    std::vector<double> analytic(p.grad().begin(), p.grad().end());
    auto values = p.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = eval();
      values[i] = saved - eps;
      const double down = eval();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err =
          std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double gradient_check(const std::function<Tensor(const Tensor&)>& f,
                      const Tensor& x, double eps) {
  Tensor input = x;
  const Tensor params[] = {input};
  return gradient_check([&]() { return f(input); }, params, eps);
}

}  // namespace typhoon
