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
#include <string>
#include <string_view>

namespace typhoon {

/// Parses "YYYY-MM-DDTHH:MM:SS" with an optional "Z" or "+00:00" suffix (a
/// space may replace the 'T') into seconds since the Unix epoch. Throws
/// DataError on anything else, including out-of-range fields.
std::int64_t parse_utc(std::string_view text);

/// Inverse of parse_utc; always emits the "Z" form.
std::string format_utc(std::int64_t seconds);

}  // namespace typhoon
