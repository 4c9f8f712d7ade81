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

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "typhoon/embeddings.hpp"
#include "typhoon/eval.hpp"
#include "typhoon/synth.hpp"
#include "typhoon/trainer.hpp"

namespace typhoon {

/// Everything a run needs. Only `seed` and `output_dir` are required in the
/// JSON form; every other key has a default. Unset input paths point at the
/// outputs of the upstream stage inside output_dir.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  // Inputs of preprocess; default to output_dir/synth/*.
  std::filesystem::path besttrack;
  std::filesystem::path tweets;
  std::filesystem::path sentiment;
  std::filesystem::path semantic_vectors;
  // Stage directories read by later stages; default to output_dir/<stage>.
  std::filesystem::path preprocess_dir;
  std::filesystem::path embed_dir;
  std::filesystem::path model_dir;

  SynthSpec synth;
  SkipgramConfig skipgram;
  JointConfig joint;
  HeadKind head = HeadKind::cnn;
  std::size_t lstm_units = SentimentModel::kDefaultUnits;
  std::int64_t slot_length = 6 * 3600;
  bool smote = true;
  std::size_t smote_k = 5;
  double split_ratio = 0.8;
  bool stratified = true;
  std::size_t importance_repeats = 5;

  nlohmann::json to_json() const;
  /// Throws ContractError listing every missing required key, or naming an
  /// unknown key or a value of the wrong type.
  static RunConfig from_json(const nlohmann::json& j);

  std::filesystem::path stage_dir(std::string_view stage) const;
  std::filesystem::path besttrack_path() const;
  std::filesystem::path tweets_path() const;
  std::filesystem::path sentiment_path() const;
  std::filesystem::path semantic_path() const;
  std::filesystem::path preprocess_path() const;
  std::filesystem::path embed_path() const;
  std::filesystem::path model_path() const;
};

/// Applies "--key=value" style overrides (already split) to a JSON config.
/// Keys are dotted paths; "mode" is shorthand for "joint.mode". Values are
/// parsed as JSON when possible, otherwise taken as strings.
void apply_override(nlohmann::json& config, const std::string& key, const std::string& value);

/// Reads the file, applies overrides and the TYPHOON_OUTPUT_DIR variable.
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

/// Stage entry points. Each writes under config.stage_dir(<name>) together
/// with the effective config.json.
void run_synth(const RunConfig& config);
void run_preprocess(const RunConfig& config);
void run_embed(const RunConfig& config);
TrainingReport run_train(const RunConfig& config);
Metrics run_evaluate(const RunConfig& config);

/// Examples built from the preprocessed data, with the deterministic split.
struct PreparedData {
  std::vector<Example> all;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::vector<LabeledTweet> sentiment;
  EmbeddingTable embeddings;
  std::size_t fixed_length = 0;

  std::vector<Example> train() const;
  std::vector<Example> test() const;
};
PreparedData prepare_data(const RunConfig& config);

/// Builds and trains a model on prepared data; used by run_train.
JointModel train_model(const RunConfig& config, const PreparedData& data,
                       TrainingReport* report = nullptr);

void save_model(const std::filesystem::path& path, const JointModel& model,
                const RunConfig& config);
JointModel load_model(const std::filesystem::path& path, EmbeddingTable embeddings);

}  // namespace typhoon
