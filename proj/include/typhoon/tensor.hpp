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


#pragma once

// Dense f64 tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a shared handle: copies alias the same storage. Operations
// record a backward rule on the thread's active Tape whenever one of their
// inputs requires a gradient. Backward walks the tape once in reverse order
// and accumulates into every reachable tensor that requires a gradient.
//
//   Tape tape;
//   TapeScope scope(tape);
//   Tensor loss = ops::sum(ops::mul(w, w));
//   tape.backward(loss);      // w.grad() == 2w
//
// Gradients accumulate across backward calls on fresh tapes until the owner
// calls zero_grad(); a tape itself can only be replayed once.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace typhoon {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data,
                     bool requires_grad = false);
  static Tensor vector(std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  /// Mutable access for parameter initialization and optimizer updates. Never
  /// call this on a tensor whose value a live tape still depends on.
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  /// Gradient view; zeros if nothing has been accumulated yet.
  std::span<const double> grad() const;
  // Shallow const: a handle shares its gradient buffer with every copy.
  std::span<double> mutable_grad() const;
  void zero_grad();

  /// Copy of the values without gradient tracking.
  Tensor detach() const;
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Impl> impl_;
};

/// Ordered record of operations for one forward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Appends a node. `backward` reads output.grad() and accumulates into the
  /// gradients of the inputs that require them.
  void record(const Tensor& output, std::vector<Tensor> inputs,
              std::function<void()> backward);

  /// Seeds d(loss)/d(loss) = 1 and runs every node once, newest first. Throws
  /// ContractError for a non-scalar loss, a loss not produced on this tape, or
  /// a second call before reset().
  void backward(const Tensor& loss);

  void reset();
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    Tensor output;
    std::vector<Tensor> inputs;
    std::function<void()> backward;
  };
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

/// Makes `tape` the active tape of the calling thread for its lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// Suspends recording (evaluation passes, finite differences).
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

/// True when an op with these inputs must record a backward node.
bool needs_record(std::initializer_list<const Tensor*> inputs);

namespace ops {

enum class Unary { sigmoid, tanh, relu };
enum class Binary { add, sub, mul };
enum class Reduce { sum, mean };

Tensor matmul(const Tensor& a, const Tensor& b);

/// Binary ops accept equal shapes, or a rank-1 `b` broadcast over the rows
/// of `a` when b's length equals a's trailing dimension.
Tensor elementwise(Binary op, const Tensor& a, const Tensor& b);
Tensor elementwise(Unary op, const Tensor& a);

inline Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise(Binary::add, a, b);
}
inline Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise(Binary::sub, a, b);
}
inline Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise(Binary::mul, a, b);
}
inline Tensor sigmoid(const Tensor& a) {
  return elementwise(Unary::sigmoid, a);
}
inline Tensor tanh(const Tensor& a) { return elementwise(Unary::tanh, a); }
inline Tensor relu(const Tensor& a) { return elementwise(Unary::relu, a); }

Tensor scale(const Tensor& a, double factor);

/// Full reduction to a scalar.
Tensor reduce(Reduce op, const Tensor& a);
/// Reduction over one axis; that axis is removed from the shape.
Tensor reduce(Reduce op, const Tensor& a, std::size_t axis);
inline Tensor sum(const Tensor& a) { return reduce(Reduce::sum, a); }
inline Tensor mean(const Tensor& a) { return reduce(Reduce::mean, a); }

Tensor concat(std::span<const Tensor> tensors, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> tensors, std::size_t axis);

Tensor reshape(const Tensor& a, Shape shape);

/// Rows of a rank-2 `table` selected by `rows`; out-of-range rows are a
/// ShapeError. Gradient is scatter-added back, skipping rows flagged in
/// `frozen` (which may be empty).
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> rows,
                   const std::vector<bool>& frozen = {});

/// out[r] = x[a[r]] + u[r] * (x[b[r]] - x[a[r]]) for a rank-2 x.
Tensor mix_rows(const Tensor& x, std::span<const std::size_t> a,
                std::span<const std::size_t> b, std::span<const double> u);

}  // namespace ops

/// Runs f under a fresh tape, backpropagates, and compares the analytic
/// gradients of every tensor in `params` against central differences.
/// Returns max |analytic - numeric| / max(1, |analytic|).
double gradient_check(const std::function<Tensor()>& f,
                      std::span<const Tensor> params, double eps = 1e-5);

/// Single-input form: f is evaluated at x and at x +/- eps per coordinate.
double gradient_check(const std::function<Tensor(const Tensor&)>& f,
                      const Tensor& x, double eps = 1e-5);

}  // namespace typhoon
