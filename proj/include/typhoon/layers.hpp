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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "typhoon/random.hpp"
#include "typhoon/tensor.hpp"

namespace typhoon {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};
using ParamList = std::vector<NamedTensor>;

/// Glorot-uniform matrix: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng);

/// Weights of one LSTM direction. Input matrices are [input_dim x units],
/// recurrent matrices [units x units], biases [units].
struct LstmParams {
  Tensor x_i, x_f, x_o, x_g;
  Tensor h_i, h_f, h_o, h_g;
  Tensor b_i, b_f, b_o, b_g;
  std::size_t input_dim = 0;
  std::size_t units = 0;

  /// Glorot weights, zero biases except the forget bias, which starts at 1.
  static LstmParams init(std::size_t input_dim, std::size_t units, Rng& rng);
  static LstmParams zeros(std::size_t input_dim, std::size_t units);

  void append_to(ParamList& out, const std::string& prefix) const;
};

struct LstmState {
  Tensor h;
  Tensor m;
};

/// One step of the gated recurrence:
///   i = sig(x.Wxi + h.Whi + bi)   f = sig(x.Wxf + h.Whf + bf)
///   o = sig(x.Wxo + h.Who + bo)   g = tanh(x.Wxg + h.Whg + bg)
///   m' = f*m + i*g                h' = o*tanh(m')
/// Inputs are row batches ([n x d], [n x u]); rank-1 inputs are one row.
LstmState lstm_cell_step(const LstmParams& p, const Tensor& x,
                         const Tensor& h_prev, const Tensor& m_prev);

/// One LSTM direction over steps[t] ([n x d]) from a zero state; returns the
/// final hidden state [n x u]. Recorded as a single tape node; matches
/// chaining lstm_cell_step. `reverse` walks the steps last to first.
Tensor lstm_sequence(const LstmParams& p, std::span<const Tensor> steps, bool reverse);

/// Bidirectional pass over one sequence [s x d]; returns
/// [h_forward(s) . h_backward(1)] of length 2u.
Tensor bilstm_forward(const LstmParams& fwd, const LstmParams& bwd,
                      const Tensor& seq);

/// Batched form: steps[t] holds row t of every sequence as [n x d]. Returns
/// [n x 2u].
Tensor bilstm_forward(const LstmParams& fwd, const LstmParams& bwd,
                      std::span<const Tensor> steps);

enum class Activation { none, relu, sigmoid };

struct DenseParams {
  Tensor w;  // [in x out]
  Tensor b;  // [out]

  static DenseParams init(std::size_t in, std::size_t out, Rng& rng);
  void append_to(ParamList& out, const std::string& prefix) const;
};

/// activation(x.w + b) for x of shape [n x in] (or [in]).
Tensor dense_forward(const Tensor& w, const Tensor& b, const Tensor& x,
                     Activation activation);
inline Tensor dense_forward(const DenseParams& p, const Tensor& x,
                            Activation activation) {
  return dense_forward(p.w, p.b, x, activation);
}

struct Conv1dParams {
  Tensor kernels;  // [out_channels x in_channels x kernel_size]
  Tensor bias;     // [out_channels]
  std::size_t kernel_size = 0;

  static Conv1dParams init(std::size_t in_channels, std::size_t out_channels,
                           std::size_t kernel_size, Rng& rng);
  std::size_t in_channels() const { return kernels.dim(1); }
  std::size_t out_channels() const { return kernels.dim(0); }
  void append_to(ParamList& out, const std::string& prefix) const;
};

/// Zero-padded ("same") cross-correlation along the length axis plus bias.
/// x is [len x in] or [batch x len x in]; length is preserved. Throws
/// ContractError for an even kernel size.
Tensor conv1d_forward(const Conv1dParams& p, const Tensor& x);

/// Non-overlapping max over windows of `pool` along the length axis of
/// [len x ch] or [batch x len x ch]. A partial final window is pooled as is.
/// Ties route the gradient to the first maximal position.
Tensor maxpool1d_forward(const Tensor& x, std::size_t pool);

/// Inverted dropout: with training on, each element is zeroed with
/// probability `rate` and survivors are scaled by 1/(1-rate).
Tensor dropout_forward(const Tensor& x, double rate, bool training, Rng& rng);

/// Softmax over the last axis with max-shift; rejects non-finite input.
Tensor softmax(const Tensor& z);

}  // namespace typhoon
