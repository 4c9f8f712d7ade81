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


#include <doctest.h>

#include <cmath>
#include <map>

#include "test_util.hpp"
#include "typhoon/data.hpp"
#include "typhoon/errors.hpp"
#include "typhoon/synth.hpp"

using namespace typhoon;

TEST_CASE("default specification reports the intended Bayes bounds") {
  const SynthSpec spec;
  const BayesAccuracy b = bayes_accuracy(spec);
  CHECK(b.env_only == doctest::Approx(0.70).epsilon(0.01 / 0.70));
  CHECK(b.combined == doctest::Approx(0.90).epsilon(0.01 / 0.90));
  CHECK(b.env_only < b.combined);
}

TEST_CASE("Bayes bounds at the limits") {
  SynthSpec none;
  none.tweet_strength = 0.0;
  const BayesAccuracy a = bayes_accuracy(none);
  CHECK(std::abs(a.env_only - a.combined) <= 1e-6);

  SynthSpec apart;
  apart.env_alpha = {25.0, 25.0, 25.0};
  CHECK(bayes_accuracy(apart).env_only == doctest::Approx(1.0).epsilon(1e-6));

  SynthSpec flat;
  flat.env_alpha = {0.0, 0.0, 0.0};
  flat.tweet_strength = 0.0;
  CHECK(bayes_accuracy(flat).env_only == doctest::Approx(0.30).epsilon(1e-6));
}

TEST_CASE("positive fraction is monotone and bounded") {
  const SynthSpec spec;
  double prev = -1.0;
  for (double z = -20; z <= 30; z += 0.25) {
    const double q = positive_fraction(spec, z);
    CHECK(q >= 0.02);
    CHECK(q <= 0.48);
    CHECK(q >= prev);
    prev = q;
  }
}

TEST_CASE("generated corpus follows the specification") {
  SynthSpec spec;
  spec.n = 300;
  spec.sentiment_tweets = 200;
  spec.semantic_dim = 6;
  const SynthDataset d = synth_generate(spec);
  REQUIRE(d.observations.size() == 300);
  CHECK(d.sentiment.size() == 200);
  CHECK_FALSE(d.semantic.empty());
  for (const auto& [phrase, v] : d.semantic) CHECK(v.size() == 6);

  std::vector<std::int64_t> times;
  for (const auto& t : d.tweets) times.push_back(t.timestamp);
  PairingResult p = pair_tweet_batches(d.observations, times, 6 * 3600);
  CHECK(p.discarded == 0);
  for (const auto& inst : p.instances) {
    CHECK(inst.tweets.size() >= spec.tweets_min);
    CHECK(inst.tweets.size() <= spec.tweets_max);
  }
  std::map<std::string, std::size_t> per_storm;
  for (const auto& o : d.observations) ++per_storm[o.storm_id];
  for (auto [id, n] : per_storm) CHECK(n <= spec.obs_per_storm);
  for (const auto& t : d.sentiment) CHECK(t.sentiment.has_value());

  CHECK(d.ground_truth.at("observations") == 300);
  CHECK(d.ground_truth.contains("bayes_accuracy_env_only"));
  CHECK(d.ground_truth.contains("bayes_accuracy_combined"));
}

TEST_CASE("generation is deterministic") {
  SynthSpec spec;
  spec.n = 50;
  spec.sentiment_tweets = 20;
  spec.semantic_dim = 4;
  const SynthDataset a = synth_generate(spec), b = synth_generate(spec);
  REQUIRE(a.tweets.size() == b.tweets.size());
  for (std::size_t i = 0; i < a.tweets.size(); ++i) CHECK(a.tweets[i].text == b.tweets[i].text);
  CHECK(a.ground_truth == b.ground_truth);
  spec.seed = 43;
  const SynthDataset c = synth_generate(spec);
  CHECK(c.observations[0].vmax != a.observations[0].vmax);
}

TEST_CASE("spec validation and JSON") {
  SynthSpec s;
  s.priors = {0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(s.validate(), ContractError);
  SynthSpec t;
  t.tweet_strength = 1.5;
  t.n = 77;
  const SynthSpec back = SynthSpec::from_json(t.to_json());
  CHECK(back.n == 77);
  CHECK(back.tweet_strength == 1.5);
  CHECK(back.priors == t.priors);
}

TEST_CASE("written dataset parses") {
  typhoon::testing::TempDir dir("synth");
  SynthSpec spec;
  spec.n = 40;
  spec.sentiment_tweets = 10;
  spec.semantic_dim = 3;
  const SynthDataset d = synth_generate(spec);
  write_synth_dataset(dir.path(), d, spec);
  for (const char* f : {"besttrack.csv", "tweets.jsonl", "sentiment.jsonl",
                        "semantic_vectors.txt", "ground_truth.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  BesttrackData bt = parse_besttrack(dir / "besttrack.csv");
  CHECK(bt.observations.size() == 40);
  CHECK(bt.rejected.empty());
  CHECK(read_tweets_jsonl(dir / "tweets.jsonl").size() == d.tweets.size());
  CHECK(load_semantic_vectors(dir / "semantic_vectors.txt", 3).size() == d.semantic.size());
}
