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

#include <algorithm>
#include <cmath>

#include "test_util.hpp"
#include "typhoon/errors.hpp"
#include "typhoon/features.hpp"

using namespace typhoon;
using typhoon::testing::random_tensor;
using typhoon::testing::values;

namespace {

double two_pass_variance(const std::vector<double>& s) {
  if (s.empty()) return 0.0;
  double mu = 0.0;
  for (double v : s) mu += v;
  mu /= static_cast<double>(s.size());
  double acc = 0.0;
  for (double v : s) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(s.size());
}

std::vector<std::array<double, 2>> pairs_from_positive(const std::vector<double>& pos) {
  std::vector<std::array<double, 2>> out;
  for (double p : pos) out.push_back({1.0 - p, p});
  return out;
}

}  // namespace

TEST_CASE("sentiment model shape and defaults") {
  Rng rng(1);
  SentimentModel m = SentimentModel::build(8, rng);
  CHECK(m.units == 64);
  CHECK(m.dropout_rate == 0.25);
  CHECK(m.input_dim() == 8);
  CHECK(m.head.w.shape() == Shape{128, 2});
  ParamList params;
  m.append_to(params);
  CHECK(params.size() == 26);
  CHECK(params.front().name.rfind("f1.", 0) == 0);
}

TEST_CASE("sentiment_forward outputs probabilities") {
  Rng rng(2);
  SentimentModel m = SentimentModel::build(4, rng, 6);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor p = sentiment_forward(m, random_tensor({5, 4}, rng), trial % 2 == 0, rng);
    REQUIRE(p.shape() == Shape{2});
    CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-12);
  }
  Tensor half = sentiment_forward(m, Tensor::zeros({5, 4}), false, rng);
  CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(sentiment_forward(m, Tensor::zeros({5, 3}), false, rng), ShapeError);
}

TEST_CASE("batched sentiment_forward agrees with single tweets") {
  Rng rng(3);
  SentimentModel m = SentimentModel::build(3, rng, 4);
  Tensor a = random_tensor({4, 3}, rng), b = random_tensor({4, 3}, rng);
  std::vector<Tensor> steps;
  for (std::size_t t = 0; t < 4; ++t) {
    steps.push_back(Tensor::from({2, 3}, {a.at(t, 0), a.at(t, 1), a.at(t, 2), b.at(t, 0),
                                          b.at(t, 1), b.at(t, 2)}));
  }
  Tensor batch = sentiment_forward(m, steps, false, rng);
  Tensor pa = sentiment_forward(m, a, false, rng);
  Tensor pb = sentiment_forward(m, b, false, rng);
  CHECK(batch.at(0, 1) == doctest::Approx(pa[1]).epsilon(1e-12));
  CHECK(batch.at(1, 1) == doctest::Approx(pb[1]).epsilon(1e-12));
}

TEST_CASE("sentiment model gradient through the full stack") {
  Rng rng(4);
  SentimentModel m = SentimentModel::build(3, rng, 3);
  Tensor x = random_tensor({4, 3}, rng);
  ParamList named;
  m.append_to(named);
  std::vector<Tensor> params;
  for (const auto& p : named) params.push_back(p.tensor);
  params.push_back(x);
  Rng fixed(0);
  const double err = gradient_check(
      [&]() {
        Tensor p = sentiment_forward(m, x, false, fixed);
        return ops::sum(ops::mul(p, Tensor::vector({0.3, -1.1})));
      },
      params);
  CHECK(err <= 1e-4);
}

TEST_CASE("batch_statistics spot values") {
  StatFeatures constant = batch_statistics(pairs_from_positive({0.7, 0.7, 0.7}));
  CHECK(constant.count == 3);
  CHECK(constant.v_pos == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(constant.v_neg == doctest::Approx(0.0).epsilon(1e-15));

  StatFeatures two = batch_statistics(pairs_from_positive({0.2, 0.8}));
  CHECK(std::abs(two.v_pos - 0.09) <= 1e-12);
  StatFeatures three = batch_statistics(pairs_from_positive({1, 0, 1}));
  CHECK(std::abs(three.v_pos - 2.0 / 9.0) <= 1e-12);

  StatFeatures empty = batch_statistics({});
  CHECK(empty.count == 0);
  CHECK(empty.v_neg == 0);
  CHECK(empty.v_pos == 0);

  const std::vector<std::array<double, 2>> bad = {{0.5, 0.6}};
  CHECK_THROWS_AS(batch_statistics(bad), ContractError);
}

TEST_CASE("batch_statistics matches a two-pass oracle and is order free") {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> pos(1 + rng.below(40));
    for (double& p : pos) p = rng.uniform();
    auto pairs = pairs_from_positive(pos);
    std::vector<double> neg;
    for (const auto& p : pairs) neg.push_back(p[0]);
    StatFeatures s = batch_statistics(pairs);
    CHECK(s.count == pos.size());
    CHECK(std::abs(s.v_pos - two_pass_variance(pos)) <= 1e-12);
    CHECK(std::abs(s.v_neg - two_pass_variance(neg)) <= 1e-12);
    CHECK(std::abs(s.v_neg - s.v_pos) <= 1e-12);
    rng.shuffle(std::span(pairs));
    StatFeatures shuffled = batch_statistics(pairs);
    CHECK(std::abs(shuffled.v_pos - s.v_pos) <= 1e-12);
  }
}

TEST_CASE("segment_variance") {
  Tensor x = Tensor::from({5, 2}, {0.8, 0.2, 0.2, 0.8, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0});
  const std::vector<std::size_t> offsets = {0, 2, 2, 5};
  Tensor v = segment_variance(x, offsets);
  REQUIRE(v.shape() == Shape{3, 2});
  CHECK(v.at(0, 1) == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(v.at(1, 0) == 0.0);
  CHECK(v.at(1, 1) == 0.0);
  CHECK(v.at(2, 1) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));

  Rng rng(6);
  Tensor y = random_tensor({7, 2}, rng);
  const std::vector<std::size_t> off = {0, 3, 3, 7};
  Tensor w = random_tensor({3, 2}, rng);
  CHECK(gradient_check([&](const Tensor& t) { return ops::sum(ops::mul(segment_variance(t, off), w)); },
                       y) <= 1e-4);
}

TEST_CASE("hard labels") {
  Tensor p = Tensor::from({3, 2}, {0.7, 0.3, 0.2, 0.8, 0.5, 0.5});
  CHECK(values(hard_labels(p)) == std::vector<double>{1, 0, 0, 1, 1, 0});
}

TEST_CASE("feature normalizer and combine_features") {
  FeatureNormalizer norm = FeatureNormalizer::from_ranges({0.0}, {20.0}, 1.0);
  const std::vector<double> env = {10.0};
  const auto f = combine_features(env, {std::exp(1.0) - 1.0, 0.01, 0.04}, norm);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f[2] == 0.01);
  CHECK(f[3] == 0.04);

  const auto empty = combine_features(env, {}, norm);
  CHECK(empty[1] == 0.0);
  CHECK(empty[2] == 0.0);
  CHECK(empty[3] == 0.0);

  FeatureNormalizer fitted;
  const std::vector<double> counts = {0, 3, 10};
  fitted.fit({{1, 5}, {3, 5}, {2, 5}}, counts);
  CHECK(fitted.env_dim() == 2);
  const auto lo = fitted.normalize_env(std::vector<double>{1, 5});
  CHECK(lo[0] == 0.0);
  CHECK(lo[1] == 0.0);  // constant column
  CHECK(fitted.scale_count(10) == doctest::Approx(1.0));
  CHECK_THROWS(combine_features(std::vector<double>{1.0}, {}, fitted));

  FeatureNormalizer back = FeatureNormalizer::from_json(fitted.to_json());
  CHECK(back.normalize_env(std::vector<double>{2.5, 5}) ==
        fitted.normalize_env(std::vector<double>{2.5, 5}));
  CHECK(back.scale_count(4) == fitted.scale_count(4));
}

TEST_CASE("embed_steps lays tokens out by position") {
  Tensor table = Tensor::from({3, 2}, {0, 0, 1, 2, 3, 4});
  const std::vector<std::vector<std::size_t>> seqs = {{1, 2, 0}, {2, 2, 1}};
  const auto steps = embed_steps(table, {}, seqs);
  REQUIRE(steps.size() == 3);
  CHECK(values(steps[0]) == std::vector<double>{1, 2, 3, 4});
  CHECK(values(steps[2]) == std::vector<double>{0, 0, 1, 2});
}
