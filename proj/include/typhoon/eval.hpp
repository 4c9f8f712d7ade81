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
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace typhoon {

/// counts[i][j] = number of instances with true label i predicted as j.
struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;

  std::size_t classes() const { return counts.size(); }
  std::size_t total() const;
};

/// Throws ShapeError on a length mismatch, ContractError for a label >= k.
ConfusionMatrix confusion(std::span<const std::size_t> truth,
                          std::span<const std::size_t> pred, std::size_t k);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  double accuracy = 0.0;
  double precision_micro = 0.0;
  double recall_micro = 0.0;
  double f1_micro = 0.0;
  double f1_macro = 0.0;
  std::vector<ClassMetrics> per_class;
};

/// Micro scores come from pooled TP/FP/FN counts; 0/0 is taken as 0.
/// Throws ContractError for an empty matrix.
Metrics metrics(const ConfusionMatrix& cm);

void write_metrics_csv(const std::filesystem::path& path, const Metrics& m,
                       std::span<const std::string_view> class_names);
void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm,
                         std::span<const std::string_view> class_names);

using Predictor =
    std::function<std::vector<std::size_t>(const std::vector<std::vector<double>>&)>;

struct Importance {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> drops;  // one per repeat
};

/// Mean drop in micro F1 when column `feature` of x is shuffled across rows,
/// over `repeats` shuffles drawn from one Rng seeded with `seed`. Throws
/// ContractError for repeats < 1 or a feature index out of range.
Importance permutation_importance(const Predictor& predict,
                                  const std::vector<std::vector<double>>& x,
                                  std::span<const std::size_t> truth, std::size_t feature,
                                  std::size_t repeats, std::uint64_t seed);

struct TimeseriesRow {
  std::string storm_id;
  std::int64_t timestamp = 0;
  std::size_t true_label = 0;
  std::size_t predicted = 0;
  double count = 0.0;
  double v_neg = 0.0;
  double v_pos = 0.0;
  double mean_sentiment = 0.0;

  bool operator==(const TimeseriesRow&) const = default;
};

/// Columns: storm_id,timestamp,true_label,predicted_label,c,v_neg,v_pos,
/// mean_sentiment. Doubles are written with 17 significant digits.
void export_timeseries(std::span<const TimeseriesRow> rows,
                       const std::filesystem::path& path);
std::vector<TimeseriesRow> read_timeseries(const std::filesystem::path& path);

}  // namespace typhoon
