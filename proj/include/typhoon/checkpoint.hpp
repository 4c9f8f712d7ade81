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

// Parameter checkpoints.
//
// Layout (all integers little-endian):
//   bytes 0..7   magic "TYPHCKPT"
//   bytes 8..15  u64 header length H
//   next H bytes UTF-8 JSON header:
//                  {"format": 1, "meta": {...},
//                   "tensors": [{"name", "shape", "offset", "count"}, ...]}
//                offset/count are in f64 elements relative to the data block
//   remainder    f64 data block, IEEE-754 little-endian

#include <filesystem>
#include <json.hpp>

#include "typhoon/layers.hpp"

namespace typhoon {

struct Checkpoint {
  nlohmann::json meta;
  ParamList tensors;

  const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     const nlohmann::json& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint values into `params` by name. Every parameter must be
/// present with a matching shape; throws DataError otherwise.
void restore_params(const Checkpoint& ckpt, ParamList& params);

}  // namespace typhoon
