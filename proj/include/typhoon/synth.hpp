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
#include <json.hpp>
#include <vector>

#include "typhoon/data.hpp"
#include "typhoon/embeddings.hpp"
#include "typhoon/text.hpp"

namespace typhoon {

/// Generating parameters of the synthetic corpus.
///
/// Each observation draws a class from `priors`. Three latent variables
/// e_j ~ N(env_alpha[j] * class, 1) drive vmax, rad and mslp; lat and lon
/// follow a storm random walk and carry no class signal. A tweet latent
/// z ~ N(tweet_strength * class, 1) sets the slot's positive-tweet fraction
/// q = clamp(0.25 + slope * (z - 1.5 * tweet_strength), 0.02, 0.48) with
/// slope = 0.23 / (1.5 * tweet_strength + 2.5); the slot holds
/// c ~ U{tweets_min..tweets_max} tweets, round(q * c) of them positive.
struct SynthSpec {
  std::size_t n = 2000;
  std::array<double, kNumCategories> priors = {0.30, 0.28, 0.24, 0.18};
  std::array<double, 3> env_alpha = {0.98, 0.98, 0.98};
  double tweet_strength = 2.9;
  std::size_t tweets_min = 10;
  std::size_t tweets_max = 20;
  std::size_t words_min = 4;
  std::size_t words_max = 7;
  std::size_t obs_per_storm = 45;
  std::size_t sentiment_tweets = 4000;
  std::size_t semantic_dim = 32;
  std::uint64_t seed = 42;

  /// Throws ContractError for an invalid specification.
  void validate() const;
  nlohmann::json to_json() const;
  static SynthSpec from_json(const nlohmann::json& j);
};

double positive_fraction(const SynthSpec& spec, double z);

/// Bayes-optimal accuracy from the environmental features alone, and from
/// environmental features plus the slot's tweet composition, by numeric
/// integration over the generating mixture.
struct BayesAccuracy {
  double env_only = 0.0;
  double combined = 0.0;
};
BayesAccuracy bayes_accuracy(const SynthSpec& spec);

struct SynthDataset {
  std::vector<TyphoonObservation> observations;
  std::vector<RawTweet> tweets;
  std::vector<RawTweet> sentiment;
  SemanticVectors semantic;
  nlohmann::json ground_truth;
};

SynthDataset synth_generate(const SynthSpec& spec);

/// Writes besttrack.csv, tweets.jsonl, sentiment.jsonl,
/// semantic_vectors.txt and ground_truth.json into `dir`.
void write_synth_dataset(const std::filesystem::path& dir, const SynthDataset& data,
                         const SynthSpec& spec);

}  // namespace typhoon
