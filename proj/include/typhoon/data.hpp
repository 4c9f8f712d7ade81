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
#include <span>
#include <string>
#include <vector>

#include "typhoon/classifier.hpp"

namespace typhoon {

/// One best-track record.
struct TyphoonObservation {
  std::string storm_id;
  std::int64_t timestamp = 0;  // UTC seconds
  double lat = 0.0, lon = 0.0;
  double vmax = 0.0;  // knots
  double rad = 0.0;   // nautical miles
  double mslp = 0.0;  // millibars
  Category label = Category::TD;
};

inline constexpr std::size_t kEnvFeatureCount = 5;
inline constexpr std::array<std::string_view, kEnvFeatureCount> kEnvFeatureNames = {
    "lat", "lon", "vmax", "rad", "mslp"};

/// Environmental feature vector in kEnvFeatureNames order.
std::vector<double> env_vector(const TyphoonObservation& obs);

inline constexpr std::string_view kBesttrackHeader =
    "storm_id,timestamp,lat,lon,vmax,rad,mslp,label";

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct BesttrackData {
  std::vector<TyphoonObservation> observations;  // sorted by (storm_id, timestamp)
  std::vector<Rejection> rejected;
};

/// Throws DataError if the file cannot be read or the header is wrong.
/// Invalid rows are dropped and listed in `rejected`.
BesttrackData parse_besttrack(const std::filesystem::path& path);
BesttrackData parse_besttrack_text(std::string_view text);

void write_besttrack(const std::filesystem::path& path,
                     std::span<const TyphoonObservation> observations);

/// An observation with the indices of the tweets falling in its slot.
struct PairedInstance {
  TyphoonObservation observation;
  std::vector<std::size_t> tweets;  // ascending tweet indices
};

struct PairingResult {
  std::vector<PairedInstance> instances;  // same order as the observations
  std::size_t discarded = 0;               // tweets outside every slot
};

/// Slot of observation i is [t_i, t_i + slot_length). A tweet inside several
/// slots goes to the earliest one (ties by storm_id). Throws ContractError
/// if slot_length <= 0.
PairingResult pair_tweet_batches(std::span<const TyphoonObservation> observations,
                                 std::span<const std::int64_t> tweet_times,
                                 std::int64_t slot_length);

/// Provenance of a synthetic point: x = x[a] + u (x[b] - x[a]).
struct SmoteOrigin {
  std::size_t a = 0, b = 0;
  double u = 0.0;
};

struct SmoteResult {
  std::vector<std::vector<double>> x;  // originals first, then synthetic rows
  std::vector<std::size_t> labels;
  std::vector<SmoteOrigin> origins;    // origins[i] describes row n + i
};

/// Oversamples every class up to the majority count. Neighbours are the k
/// nearest same-class points by Euclidean distance (k is capped at the class
/// size minus one). Throws ContractError for k < 1 or ragged rows, DataError
/// for a class with a single member that needs oversampling.
SmoteResult smote_oversample(const std::vector<std::vector<double>>& x,
                             std::span<const std::size_t> labels, std::size_t k,
                             std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then floor(ratio * n) to train. Stratified mode applies
/// the rule per class, handing leftover train slots to the classes with the
/// largest remainders. Throws ContractError for an empty input or ratio
/// outside (0, 1).
SplitIndices train_test_split(std::span<const std::size_t> labels, double ratio,
                              std::uint64_t seed, bool stratified);

}  // namespace typhoon
