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


#include "typhoon/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "typhoon/errors.hpp"
#include "typhoon/random.hpp"
#include "typhoon/timeutil.hpp"

namespace typhoon {

std::vector<double> env_vector(const TyphoonObservation& obs) {
  return {obs.lat, obs.lon, obs.vmax, obs.rad, obs.mslp};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

BesttrackData parse_besttrack_text(std::string_view text) {
  BesttrackData out;
  std::size_t pos = 0, line_no = 0;
  bool header_seen = false;
  static constexpr std::array<const char*, 5> kNumericNames = {"lat", "lon", "vmax",
                                                               "rad", "mslp"};
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kBesttrackHeader) {
        throw DataError("best-track header must be '" + std::string(kBesttrackHeader) +
                        "', got '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 8) {
      out.rejected.push_back({line_no, "expected 8 fields, got " +
                                           std::to_string(fields.size())});
      continue;
    }
    TyphoonObservation obs;
    obs.storm_id = std::string(fields[0]);
    if (obs.storm_id.empty()) {
      out.rejected.push_back({line_no, "empty storm_id"});
      continue;
    }
    try {
      obs.timestamp = parse_utc(fields[1]);
    } catch (const DataError&) {
      out.rejected.push_back({line_no, "bad timestamp"});
      continue;
    }
    std::array<double, 5> values{};
    std::string bad;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!parse_number(fields[2 + j], values[j])) {
        bad = fields[2 + j].empty() ? std::string("empty ") + kNumericNames[j]
                                    : std::string("bad ") + kNumericNames[j];
        break;
      }
    }
    if (!bad.empty()) {
      out.rejected.push_back({line_no, bad});
      continue;
    }
    obs.lat = values[0];
    obs.lon = values[1];
    obs.vmax = values[2];
    obs.rad = values[3];
    obs.mslp = values[4];
    const auto label = parse_category(fields[7]);
    std::string reason;
    if (!label) {
      reason = "unknown label '" + std::string(fields[7]) + "'";
    } else if (obs.lat < -90.0 || obs.lat > 90.0) {
      reason = "lat out of range";
    } else if (obs.lon < -180.0 || obs.lon > 360.0) {
      reason = "lon out of range";
    } else if (obs.vmax < 0.0) {
      reason = "negative vmax";
    } else if (obs.rad < 0.0) {
      reason = "negative rad";
    } else if (!(obs.mslp > 800.0 && obs.mslp < 1100.0)) {
      reason = "mslp outside (800, 1100)";
    }
    if (!reason.empty()) {
      out.rejected.push_back({line_no, reason});
      continue;
    }
    obs.label = *label;
    out.observations.push_back(std::move(obs));
  }
  if (!header_seen) throw DataError("best-track file has no header");

  std::stable_sort(out.observations.begin(), out.observations.end(),
                   [](const TyphoonObservation& a, const TyphoonObservation& b) {
                     return std::tie(a.storm_id, a.timestamp) <
                            std::tie(b.storm_id, b.timestamp);
                   });
  std::vector<TyphoonObservation> unique;
  unique.reserve(out.observations.size());
  for (auto& obs : out.observations) {
    if (!unique.empty() && unique.back().storm_id == obs.storm_id &&
        unique.back().timestamp == obs.timestamp) {
      out.rejected.push_back({0, "duplicate timestamp for storm " + obs.storm_id});
      continue;
    }
    unique.push_back(std::move(obs));
  }
  out.observations = std::move(unique);
  return out;
}

BesttrackData parse_besttrack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read best-track file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_besttrack_text(buf.str());
}

void write_besttrack(const std::filesystem::path& path,
                     std::span<const TyphoonObservation> observations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << kBesttrackHeader << '\n';
  for (const auto& o : observations) {
    out << o.storm_id << ',' << format_utc(o.timestamp) << ',' << format_number(o.lat)
        << ',' << format_number(o.lon) << ',' << format_number(o.vmax) << ','
        << format_number(o.rad) << ',' << format_number(o.mslp) << ','
        << category_name(o.label) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

PairingResult pair_tweet_batches(std::span<const TyphoonObservation> observations,
                                 std::span<const std::int64_t> tweet_times,
                                 std::int64_t slot_length) {
  if (slot_length <= 0) throw ContractError("slot_length must be positive");
  PairingResult out;
  out.instances.resize(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    out.instances[i].observation = observations[i];
  }
  std::vector<std::size_t> order(observations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(observations[a].timestamp, observations[a].storm_id) <
           std::tie(observations[b].timestamp, observations[b].storm_id);
  });
  for (std::size_t t = 0; t < tweet_times.size(); ++t) {
    const std::int64_t time = tweet_times[t];
    // Earliest observation with start > time - slot_length; it contains the
    // tweet iff its start is <= time.
    const auto it = std::upper_bound(
        order.begin(), order.end(), time - slot_length,
        [&](std::int64_t v, std::size_t i) { return v < observations[i].timestamp; });
    if (it == order.end() || observations[*it].timestamp > time) {
      ++out.discarded;
      continue;
    }
    out.instances[*it].tweets.push_back(t);
  }
  return out;
}

SmoteResult smote_oversample(const std::vector<std::vector<double>>& x,
                             std::span<const std::size_t> labels, std::size_t k,
                             std::uint64_t seed) {
  if (k < 1) throw ContractError("SMOTE k must be >= 1");
  if (x.size() != labels.size()) throw ShapeError("SMOTE: rows and labels differ in count");
  SmoteResult out;
  out.x = x;
  out.labels.assign(labels.begin(), labels.end());
  if (x.empty()) return out;
  const std::size_t dim = x.front().size();
  for (const auto& row : x) {
    if (row.size() != dim) throw ContractError("SMOTE: ragged feature rows");
  }
  const std::size_t classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::size_t majority = 0;
  for (const auto& m : members) majority = std::max(majority, m.size());

  Rng rng(seed);
  const auto dist2 = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += (x[a][j] - x[b][j]) * (x[a][j] - x[b][j]);
    return s;
  };
  for (std::size_t c = 0; c < classes; ++c) {
    const auto& mem = members[c];
    if (mem.empty() || mem.size() == majority) continue;
    if (mem.size() == 1) {
      throw DataError("SMOTE: class " + std::to_string(c) +
                      " has a single member; lower k or merge classes");
    }
    const std::size_t kk = std::min(k, mem.size() - 1);
    std::vector<std::vector<std::size_t>> neighbours(mem.size());
    for (std::size_t i = 0; i < mem.size(); ++i) {
      std::vector<std::pair<double, std::size_t>> cand;
      cand.reserve(mem.size() - 1);
      for (std::size_t j = 0; j < mem.size(); ++j) {
        if (j != i) cand.emplace_back(dist2(mem[i], mem[j]), mem[j]);
      }
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk),
                        cand.end());
      for (std::size_t j = 0; j < kk; ++j) neighbours[i].push_back(cand[j].second);
    }
    for (std::size_t s = 0; s < majority - mem.size(); ++s) {
      const std::size_t base = s % mem.size();
      const std::size_t a = mem[base];
      const std::size_t b = neighbours[base][rng.below(kk)];
      const double u = rng.uniform();
      std::vector<double> row(dim);
      for (std::size_t j = 0; j < dim; ++j) row[j] = x[a][j] + u * (x[b][j] - x[a][j]);
      out.x.push_back(std::move(row));
      out.labels.push_back(c);
      out.origins.push_back({a, b, u});
    }
  }
  return out;
}

SplitIndices train_test_split(std::span<const std::size_t> labels, double ratio,
                              std::uint64_t seed, bool stratified) {
  if (labels.empty()) throw ContractError("train_test_split: empty input");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ContractError("train_test_split: ratio must lie in (0, 1)");
  }
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto floor_share = [&](std::size_t count) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count)));
  };

  SplitIndices out;
  if (!stratified) {
    const std::size_t n_train = floor_share(n);
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return out;
  }

  const std::size_t classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> count(classes, 0);
  for (std::size_t l : labels) ++count[l];
  std::vector<std::size_t> quota(classes);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    quota[c] = floor_share(count[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> by_remainder(classes);
  std::iota(by_remainder.begin(), by_remainder.end(), 0);
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double ra = ratio * static_cast<double>(count[a]) -
                                       static_cast<double>(quota[a]);
                     const double rb = ratio * static_cast<double>(count[b]) -
                                       static_cast<double>(quota[b]);
                     return ra > rb;
                   });
  for (std::size_t i = 0; assigned < floor_share(n) && i < classes; ++i) {
    const std::size_t c = by_remainder[i];
    if (quota[c] < count[c]) {
      ++quota[c];
      ++assigned;
    }
  }
  std::vector<std::size_t> taken(classes, 0);
  for (std::size_t i : order) {
    const std::size_t c = labels[i];
    if (taken[c] < quota[c]) {
      ++taken[c];
      out.train.push_back(i);
    } else {
      out.test.push_back(i);
    }
  }
  return out;
}

}  // namespace typhoon
