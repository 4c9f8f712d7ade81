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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "typhoon/layers.hpp"

namespace typhoon {

/// Intensity categories in increasing order; the order fixes tie-breaking
/// and confusion-matrix axes.
enum class Category : std::size_t { TD = 0, TS = 1, TY = 2, ST = 3 };
inline constexpr std::size_t kNumCategories = 4;
inline constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "TD", "TS", "TY", "ST"};

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view text);

enum class HeadKind { cnn, dnn, rnn };
std::string_view head_kind_name(HeadKind kind);
HeadKind parse_head_kind(std::string_view text);

/// Hyperparameters of the convolutional head.
struct CnnShape {
  std::size_t channels1 = 32;
  std::size_t channels2 = 16;
  std::size_t kernel = 3;
  std::size_t pool = 2;
  double dropout1 = 0.30;
  double dropout2 = 0.20;
};

inline constexpr std::size_t kDnnHidden1 = 64;
inline constexpr std::size_t kDnnHidden2 = 32;
inline constexpr std::size_t kRnnUnits = 32;

/// Classifier over a combined feature vector. Only the members of the
/// selected kind are populated.
///   cnn: conv(1->32,k3,relu) pool dropout .30 conv(32->16,k3,relu) pool
///        dropout .20 flatten dense(->k) softmax
///   dnn: dense 64 relu, dense 32 relu, dense k softmax
///   rnn: tanh recurrence (32 units) over the vector as a scalar sequence,
///        dense k softmax
struct ClassifierHead {
  HeadKind kind = HeadKind::cnn;
  std::size_t input_len = 0;
  std::size_t k = kNumCategories;

  CnnShape cnn;
  Conv1dParams conv1, conv2;

  DenseParams hidden1, hidden2;

  Tensor rnn_wx, rnn_wh, rnn_b;

  DenseParams output;

  std::size_t flat_len() const;
  void append_to(ParamList& out, const std::string& prefix = "f2") const;
};

/// Throws ContractError for input_len or k of zero.
ClassifierHead build_head(HeadKind kind, std::size_t input_len, std::size_t k,
                          std::uint64_t seed);

/// x is [input_len] -> [k], or [n x input_len] -> [n x k].
Tensor classify_forward(const ClassifierHead& head, const Tensor& x,
                        bool training, Rng& rng);

/// Index of the largest entry, lowest index on ties. Throws ContractError
/// for non-finite entries.
std::size_t argmax_index(std::span<const double> probs);
Category predict_category(std::span<const double> probs);

}  // namespace typhoon
