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


#include "typhoon/classifier.hpp"

#include <cmath>
#include <string>

#include "typhoon/errors.hpp"

namespace typhoon {

std::string_view category_name(Category c) {
  return kCategoryNames.at(static_cast<std::size_t>(c));
}

std::optional<Category> parse_category(std::string_view text) {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (kCategoryNames[i] == text) return static_cast<Category>(i);
  }
  return std::nullopt;
}

std::string_view head_kind_name(HeadKind kind) {
  switch (kind) {
    case HeadKind::cnn: return "cnn";
    case HeadKind::dnn: return "dnn";
    case HeadKind::rnn: return "rnn";
  }
  return "cnn";
}

HeadKind parse_head_kind(std::string_view text) {
  if (text == "cnn") return HeadKind::cnn;
  if (text == "dnn") return HeadKind::dnn;
  if (text == "rnn") return HeadKind::rnn;
  throw ContractError("unknown classifier kind '" + std::string(text) +
                      "' (expected cnn, dnn or rnn)");
}

std::size_t ClassifierHead::flat_len() const {
  const std::size_t l1 = (input_len + cnn.pool - 1) / cnn.pool;
  const std::size_t l2 = (l1 + cnn.pool - 1) / cnn.pool;
  return l2 * cnn.channels2;
}

void ClassifierHead::append_to(ParamList& out, const std::string& prefix) const {
  switch (kind) {
    case HeadKind::cnn:
      conv1.append_to(out, prefix + ".conv1");
      conv2.append_to(out, prefix + ".conv2");
      break;
    case HeadKind::dnn:
      hidden1.append_to(out, prefix + ".hidden1");
      hidden2.append_to(out, prefix + ".hidden2");
      break;
    case HeadKind::rnn:
      out.push_back({prefix + ".rnn.wx", rnn_wx});
      out.push_back({prefix + ".rnn.wh", rnn_wh});
      out.push_back({prefix + ".rnn.b", rnn_b});
      break;
  }
  output.append_to(out, prefix + ".output");
}

ClassifierHead build_head(HeadKind kind, std::size_t input_len, std::size_t k,
                          std::uint64_t seed) {
  if (input_len < 1) throw ContractError("build_head: input_len must be >= 1");
  if (k < 1) throw ContractError("build_head: k must be >= 1");
  Rng rng(seed);
  ClassifierHead head;
  head.kind = kind;
  head.input_len = input_len;
  head.k = k;
  switch (kind) {
    case HeadKind::cnn:
      head.conv1 = Conv1dParams::init(1, head.cnn.channels1, head.cnn.kernel, rng);
      head.conv2 = Conv1dParams::init(head.cnn.channels1, head.cnn.channels2,
                                      head.cnn.kernel, rng);
      head.output = DenseParams::init(head.flat_len(), k, rng);
      break;
    case HeadKind::dnn:
      head.hidden1 = DenseParams::init(input_len, kDnnHidden1, rng);
      head.hidden2 = DenseParams::init(kDnnHidden1, kDnnHidden2, rng);
      head.output = DenseParams::init(kDnnHidden2, k, rng);
      break;
    case HeadKind::rnn:
      head.rnn_wx = glorot_uniform({1, kRnnUnits}, 1, kRnnUnits, rng);
      head.rnn_wh = glorot_uniform({kRnnUnits, kRnnUnits}, kRnnUnits, kRnnUnits, rng);
      head.rnn_b = Tensor::zeros({kRnnUnits}, true);
      head.output = DenseParams::init(kRnnUnits, k, rng);
      break;
  }
  return head;
}

Tensor classify_forward(const ClassifierHead& head, const Tensor& x,
                        bool training, Rng& rng) {
  const bool single = x.rank() == 1;
  const Tensor rows = single ? ops::reshape(x, {1, x.dim(0)}) : x;
  if (rows.rank() != 2 || rows.dim(1) != head.input_len) {
    throw ShapeError("classify_forward: input " + shape_string(x.shape()) +
                     " does not match head input length " +
                     std::to_string(head.input_len));
  }
  const std::size_t n = rows.dim(0);
  Tensor logits;
  switch (head.kind) {
    case HeadKind::cnn: {
      Tensor h = ops::reshape(rows, {n, head.input_len, 1});
      h = ops::relu(conv1d_forward(head.conv1, h));
      h = maxpool1d_forward(h, head.cnn.pool);
      h = dropout_forward(h, head.cnn.dropout1, training, rng);
      h = ops::relu(conv1d_forward(head.conv2, h));
      h = maxpool1d_forward(h, head.cnn.pool);
      h = dropout_forward(h, head.cnn.dropout2, training, rng);
      h = ops::reshape(h, {n, head.flat_len()});
      logits = dense_forward(head.output, h, Activation::none);
      break;
    }
    case HeadKind::dnn: {
      Tensor h = dense_forward(head.hidden1, rows, Activation::relu);
      h = dense_forward(head.hidden2, h, Activation::relu);
      logits = dense_forward(head.output, h, Activation::none);
      break;
    }
    case HeadKind::rnn: {
      Tensor h = Tensor::zeros({n, kRnnUnits});
      for (std::size_t t = 0; t < head.input_len; ++t) {
        std::vector<double> pick(head.input_len, 0.0);
        pick[t] = 1.0;
        const Tensor xt = ops::matmul(rows, Tensor::from({head.input_len, 1}, pick));
        h = ops::tanh(ops::add(
            ops::add(ops::matmul(xt, head.rnn_wx), ops::matmul(h, head.rnn_wh)),
            head.rnn_b));
      }
      logits = dense_forward(head.output, h, Activation::none);
      break;
    }
  }
  const Tensor probs = softmax(logits);
  return single ? ops::reshape(probs, {head.k}) : probs;
}

std::size_t argmax_index(std::span<const double> probs) {
  if (probs.empty()) throw ContractError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i])) throw ContractError("non-finite probability");
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

Category predict_category(std::span<const double> probs) {
  if (probs.size() != kNumCategories) {
    throw ShapeError("predict_category expects " + std::to_string(kNumCategories) +
                     " probabilities");
  }
  return static_cast<Category>(argmax_index(probs));
}

}  // namespace typhoon
