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
#include <json.hpp>
#include <span>
#include <vector>

#include "typhoon/layers.hpp"

namespace typhoon {

/// Tweet-level sentiment model: embedding rows -> BiLSTM -> dropout ->
/// dense(2u -> 2) -> softmax. Column 0 is P(negative), column 1 P(positive).
struct SentimentModel {
  static constexpr std::size_t kDefaultUnits = 64;
  static constexpr double kDefaultDropout = 0.25;

  LstmParams forward;
  LstmParams backward;
  DenseParams head;
  std::size_t units = kDefaultUnits;
  double dropout_rate = kDefaultDropout;

  static SentimentModel build(std::size_t input_dim, Rng& rng,
                              std::size_t units = kDefaultUnits,
                              double dropout_rate = kDefaultDropout);
  std::size_t input_dim() const { return forward.input_dim; }
  void append_to(ParamList& out, const std::string& prefix = "f1") const;
};

/// One tweet matrix M [s x d] -> probabilities [2].
Tensor sentiment_forward(const SentimentModel& model, const Tensor& m,
                         bool training, Rng& rng);

/// Batched form: steps[t] is [n x d] (token t of n tweets) -> [n x 2].
Tensor sentiment_forward(const SentimentModel& model,
                         std::span<const Tensor> steps, bool training, Rng& rng);

/// Per-step embedding rows for a batch of equal-length id sequences. The
/// table gradient skips rows flagged in `frozen`.
std::vector<Tensor> embed_steps(const Tensor& table,
                                const std::vector<bool>& frozen,
                                std::span<const std::vector<std::size_t>> seqs);

/// Tweet count and population variances of the two sentiment series.
/// `count` is a double because oversampled instances interpolate it.
struct StatFeatures {
  double count = 0.0;
  double v_neg = 0.0;
  double v_pos = 0.0;
};

/// c = number of pairs; v = (1/c) sum (S_i - mu)^2 per series. An empty list
/// gives (0, 0, 0). Throws ContractError if a pair does not sum to 1 (1e-9).
StatFeatures batch_statistics(std::span<const std::array<double, 2>> sentiments);

/// Differentiable per-segment population variance of each column of `x`
/// [n x k]. Segment b spans rows [offsets[b], offsets[b+1]); empty segments
/// give zero rows. Returns [segments x k].
Tensor segment_variance(const Tensor& x, std::span<const std::size_t> offsets);

/// One-hot argmax rows (ties to column 0), without gradient.
Tensor hard_labels(const Tensor& probs);

/// Min-max scaling of environmental columns and log-count scaling, fitted on
/// the training split.
class FeatureNormalizer {
 public:
  FeatureNormalizer() = default;

  /// env_rows[i] is one instance's m environmental values.
  void fit(const std::vector<std::vector<double>>& env_rows,
           std::span<const double> counts);

  bool fitted() const { return fitted_; }
  std::size_t env_dim() const { return min_.size(); }
  /// (x - min) / (max - min); columns constant on the training split map to 0.
  std::vector<double> normalize_env(std::span<const double> env) const;
  /// log(1 + c) / max over the training split of log(1 + c); 0 if that max is 0.
  double scale_count(double count) const;

  nlohmann::json to_json() const;
  static FeatureNormalizer from_json(const nlohmann::json& j);

  /// Direct construction for known ranges.
  static FeatureNormalizer from_ranges(std::vector<double> min,
                                       std::vector<double> max,
                                       double max_log_count);

 private:
  std::vector<double> min_;
  std::vector<double> max_;
  double max_log_count_ = 0.0;
  bool fitted_ = false;
};

/// [normalized env (m); scaled count; v_neg; v_pos], length m + 3.
std::vector<double> combine_features(std::span<const double> env,
                                     const StatFeatures& stats,
                                     const FeatureNormalizer& norm);

}  // namespace typhoon
