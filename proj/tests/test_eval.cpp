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
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "typhoon/classifier.hpp"
#include "typhoon/errors.hpp"
#include "typhoon/eval.hpp"

using namespace typhoon;
using typhoon::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("confusion") {
  const std::vector<std::size_t> y = {0, 1, 2, 3, 1};
  ConfusionMatrix perfect = confusion(y, y, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK((perfect.counts[i][j] > 0) == (i == j));
  }
  CHECK(perfect.total() == 5);

  ConfusionMatrix one = confusion(std::vector<std::size_t>{0}, std::vector<std::size_t>{1}, 4);
  CHECK(one.counts[0][1] == 1);
  CHECK(one.total() == 1);

  ConfusionMatrix empty = confusion({}, {}, 4);
  CHECK(empty.total() == 0);
  CHECK(empty.classes() == 4);

  CHECK_THROWS_AS(confusion(y, std::vector<std::size_t>{0}, 4), ShapeError);
  CHECK_THROWS_AS(confusion(std::vector<std::size_t>{5}, std::vector<std::size_t>{0}, 4),
                  ContractError);
}

TEST_CASE("metrics spot values") {
  ConfusionMatrix cm{{{1, 1}, {0, 2}}};
  Metrics m = metrics(cm);
  CHECK(m.accuracy == 0.75);
  CHECK(m.f1_micro == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(m.per_class[0].precision == 1.0);
  CHECK(m.per_class[1].precision == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(m.per_class[0].recall == 0.5);
  CHECK(m.per_class[1].support == 2);

  const std::vector<std::size_t> y = {0, 1, 2, 3, 3, 2};
  Metrics p = metrics(confusion(y, y, 4));
  CHECK(p.accuracy == 1.0);
  CHECK(p.precision_micro == 1.0);
  CHECK(p.recall_micro == 1.0);
  CHECK(p.f1_micro == 1.0);
  CHECK(p.f1_macro == 1.0);

  ConfusionMatrix missing{{{2, 0, 0}, {1, 0, 0}, {0, 0, 0}}};
  Metrics z = metrics(missing);
  CHECK(z.per_class[1].precision == 0.0);
  CHECK(z.per_class[2].f1 == 0.0);

  CHECK_THROWS_AS(metrics(ConfusionMatrix{{{0, 0}, {0, 0}}}), ContractError);
}

TEST_CASE("micro scores equal accuracy and match a per-instance oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.below(4), n = 1 + rng.below(60);
    std::vector<std::size_t> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.below(k);
      p[i] = rng.uniform() < 0.6 ? y[i] : rng.below(k);
    }
    Metrics m = metrics(confusion(y, p, k));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += y[i] == p[i];
    const double acc = static_cast<double>(hits) / static_cast<double>(n);
    CHECK(std::abs(m.accuracy - acc) <= 1e-12);
    CHECK(std::abs(m.precision_micro - acc) <= 1e-12);
    CHECK(std::abs(m.recall_micro - acc) <= 1e-12);
    CHECK(std::abs(m.f1_micro - acc) <= 1e-12);
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += y[i] == c && p[i] == c;
        fp += y[i] != c && p[i] == c;
        fn += y[i] == c && p[i] != c;
      }
      const double prec = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
      const double rec = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
      CHECK(std::abs(m.per_class[c].precision - prec) <= 1e-12);
      CHECK(std::abs(m.per_class[c].recall - rec) <= 1e-12);
    }
  }
}

TEST_CASE("metric and confusion CSVs") {
  TempDir dir("eval");
  ConfusionMatrix cm{{{1, 1}, {0, 2}}};
  const std::vector<std::string_view> names = {"TD", "TS"};
  write_metrics_csv(dir / "m.csv", metrics(cm), names);
  write_confusion_csv(dir / "c.csv", cm, names);
  const std::string m = slurp(dir / "m.csv");
  CHECK(m.find("micro") != std::string::npos);
  CHECK(m.find("TS") != std::string::npos);
  const std::string c = slurp(dir / "c.csv");
  CHECK(c.find("TD,1,1") != std::string::npos);
  CHECK(c.find("TS,0,2") != std::string::npos);
}

TEST_CASE("permutation importance") {
  Rng rng(2);
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  for (int i = 0; i < 400; ++i) {
    const std::size_t label = rng.below(4);
    x.push_back({rng.normal(), static_cast<double>(label) + 0.1 * rng.normal(), 3.0});
    y.push_back(label);
  }
  const Predictor predict = [](const std::vector<std::vector<double>>& rows) {
    std::vector<std::size_t> out;
    for (const auto& r : rows) {
      out.push_back(static_cast<std::size_t>(std::clamp(std::lround(r[1]), 0L, 3L)));
    }
    return out;
  };
  const Importance defining = permutation_importance(predict, x, y, 1, 5, 7);
  CHECK(defining.mean > 0.2);
  CHECK(defining.drops.size() == 5);
  const Importance constant = permutation_importance(predict, x, y, 2, 5, 7);
  CHECK(std::abs(constant.mean) <= 0.01);
  const Importance noise = permutation_importance(predict, x, y, 0, 5, 7);
  CHECK(std::abs(noise.mean) <= 0.01);

  const Importance one = permutation_importance(predict, x, y, 1, 1, 7);
  const Importance ten = permutation_importance(predict, x, y, 1, 10, 7);
  CHECK(one.drops[0] == ten.drops[0]);
  CHECK(std::abs(one.mean - ten.mean) <= 3.0 * ten.stddev + 1e-12);

  CHECK_THROWS_AS(permutation_importance(predict, x, y, 3, 1, 7), ContractError);
  CHECK_THROWS_AS(permutation_importance(predict, x, y, 0, 0, 7), ContractError);
}

TEST_CASE("time series round trip") {
  TempDir dir("ts");
  std::vector<TimeseriesRow> rows = {
      {"HAIYAN", 1383782400, 3, 2, 0.0, 0.0, 0.0, 0.0},
      {"HAIYAN", 1383804000, 3, 3, 14.0, 0.0123456789012345678, 0.0123456789012345678,
       0.31415926535897931}};
  export_timeseries(rows, dir / "ts.csv");
  const auto back = read_timeseries(dir / "ts.csv");
  CHECK(back.size() == rows.size());
  CHECK(back == rows);
  CHECK(slurp(dir / "ts.csv").rfind(
            "storm_id,timestamp,true_label,predicted_label,c,v_neg,v_pos,mean_sentiment", 0) == 0);
  CHECK_THROWS(export_timeseries(rows, "/nonexistent/dir/ts.csv"));
}
