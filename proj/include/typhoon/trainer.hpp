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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "typhoon/classifier.hpp"
#include "typhoon/embeddings.hpp"
#include "typhoon/features.hpp"

namespace typhoon {

enum class TrainMode { joint, standalone_env_only, feature_extractor_only };
std::string_view mode_name(TrainMode mode);
TrainMode parse_mode(std::string_view text);

struct JointConfig {
  double lambda_f1 = 1.0;
  double lambda_f2 = 1.0;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::joint;
  /// Global gradient-norm clip; 0 disables it.
  double clip_norm = 5.0;
  /// Labelled sentiment tweets drawn per batch: min(batch tweet count, cap).
  std::size_t sentiment_cap = 256;
  /// Statistics from one-hot sentiment labels instead of probabilities.
  bool hard_labels = false;
  bool train_embeddings = true;

  /// Throws ContractError on negative weights, zero epochs or batch size,
  /// or invalid optimizer settings.
  void validate() const;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

/// One bias-corrected ADAM update of every tensor in `params` from its
/// accumulated gradient. The state is sized on the first call; later calls
/// with different shapes throw ShapeError.
void adam_step(const ParamList& params, AdamState& state, const JointConfig& cfg);

/// Rescales all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping. max_norm <= 0 leaves gradients alone.
double clip_grad_norm(const ParamList& params, double max_norm);

/// -(1/n) sum log p[i, target_i] with p clamped to [1e-12, 1 - 1e-12].
/// probs is [k] (one target) or [n x k]. Throws ContractError for a target
/// out of range.
Tensor cross_entropy(const Tensor& probs, std::span<const std::size_t> targets);

/// lambda_f1 * l_f1 + lambda_f2 * l_f2. Throws ContractError for non-scalar,
/// non-finite or negative losses.
Tensor joint_loss(const Tensor& l_f1, const Tensor& l_f2, const JointConfig& cfg);

/// A training or evaluation instance: one observation with its tweets as
/// padded token-id sequences. Oversampled instances have no tweets; their
/// env and count are interpolated and their statistics follow the parents.
struct Example {
  std::string storm_id;
  std::int64_t timestamp = 0;
  std::vector<double> env;
  std::size_t label = 0;
  std::vector<std::vector<std::size_t>> tweets;
  double count = 0.0;
  bool synthetic = false;
  std::size_t parent_a = 0, parent_b = 0;  // indices into the same list
  double u = 0.0;
};

/// A tweet from the labelled sentiment corpus; label 0 negative, 1 positive.
struct LabeledTweet {
  std::vector<std::size_t> ids;
  std::size_t label = 0;
};

/// F1 (embeddings + sentiment model) and F2 (classifier head) with the
/// feature normalizer they share.
struct JointModel {
  TrainMode mode = TrainMode::joint;
  EmbeddingTable embeddings;
  SentimentModel f1;
  ClassifierHead f2;
  FeatureNormalizer norm;
  bool hard_labels = false;

  bool uses_tweets() const { return mode != TrainMode::standalone_env_only; }
  /// Parameters updated by the optimizer.
  ParamList trainable(bool train_embeddings) const;
  /// Every tensor needed to restore the model.
  ParamList all_tensors() const;
};

/// Width of F2's input for a mode and environmental feature count.
std::size_t feature_len(TrainMode mode, std::size_t env_dim);
/// Column names of F2's input.
std::vector<std::string> feature_names(TrainMode mode);

JointModel build_joint_model(TrainMode mode, EmbeddingTable embeddings,
                             HeadKind head, std::size_t env_dim,
                             std::uint64_t seed,
                             std::size_t units = SentimentModel::kDefaultUnits);

/// Fits the normalizer on the non-synthetic examples.
void fit_normalizer(JointModel& model, std::span<const Example> examples);

/// F2 input row for given statistics.
std::vector<double> feature_row(const JointModel& model, const Example& ex,
                                const StatFeatures& stats);

/// Statistics for each example with dropout off and no gradient. Synthetic
/// examples interpolate the statistics of their parents.
std::vector<StatFeatures> compute_stats(const JointModel& model,
                                        std::span<const Example> examples);

/// Mean positive-sentiment probability per example (0 for empty or
/// synthetic slots).
std::vector<double> slot_mean_positive(const JointModel& model,
                                       std::span<const Example> examples);

/// F2 input matrix for the examples.
std::vector<std::vector<double>> compute_features(const JointModel& model,
                                                  std::span<const Example> examples);

/// Class probabilities for each feature row (dropout off).
std::vector<std::vector<double>> predict_proba(
    const JointModel& model, const std::vector<std::vector<double>>& features);

std::vector<std::size_t> predict_labels(const JointModel& model,
                                        std::span<const Example> examples);

/// Appends SMOTE instances so every class reaches the majority count.
/// Neighbours are searched over the current F2 input vectors.
std::vector<Example> oversample(const JointModel& model,
                                std::vector<Example> train, std::size_t k,
                                std::uint64_t seed);

struct StepResult {
  double l_f1 = 0.0;
  double l_f2 = 0.0;
  double l_joint = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double l_f1 = 0.0, l_f2 = 0.0, l_joint = 0.0;
  double train_acc = 0.0, test_acc = 0.0;
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  void write_csv(const std::filesystem::path& path) const;
};

/// Differentiable losses of one batch, built on the active tape.
struct BatchLoss {
  Tensor l_f1, l_f2, l_joint;
  Tensor probs;  // F2 output [b x k]
  std::vector<std::size_t> labels;
  /// (training row, [v_neg, v_pos]) for every real example in the batch.
  std::vector<std::pair<std::size_t, std::array<double, 2>>> real_stats;
};

/// Owns the optimizer state for one training run.
class JointTrainer {
 public:
  /// `train` may contain synthetic examples whose parents index into it.
  JointTrainer(JointModel& model, const JointConfig& cfg, std::vector<Example> train,
               std::vector<LabeledTweet> sentiment);

  /// One forward/backward/update over the given training rows and labelled
  /// sentiment rows. Throws ContractError for an empty batch.
  StepResult step(std::span<const std::size_t> batch,
                  std::span<const std::size_t> sentiment_rows);

  /// Forward pass only: both losses for the batch without touching
  /// gradients, optimizer state or the statistics cache.
  BatchLoss batch_loss(std::span<const std::size_t> batch,
                       std::span<const std::size_t> sentiment_rows, bool training);

  /// Runs cfg.epochs epochs, evaluating on `test` after each one.
  TrainingReport fit(std::span<const Example> test,
                     const std::function<void(const EpochRecord&)>& on_epoch = {});

  const std::vector<Example>& train_set() const { return train_; }
  const AdamState& adam() const { return adam_; }

 private:
  JointModel& model_;
  JointConfig cfg_;
  std::vector<Example> train_;
  std::vector<LabeledTweet> sentiment_;
  std::vector<StatFeatures> stat_cache_;
  AdamState adam_;
  Rng shuffle_rng_;
  Rng sample_rng_;
  Rng dropout_rng_;
};

/// Convenience wrapper: builds a trainer and runs fit.
TrainingReport fit(JointModel& model, const JointConfig& cfg,
                   std::vector<Example> train, std::span<const Example> test,
                   std::vector<LabeledTweet> sentiment);

double accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> pred);

}  // namespace typhoon
