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


#include "typhoon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "typhoon/errors.hpp"
#include "typhoon/random.hpp"

namespace typhoon {

namespace {

constexpr double kQLow = 0.02;
constexpr double kQHigh = 0.48;
constexpr std::int64_t kSlot = 6 * 3600;
constexpr std::int64_t kEpoch = 1372636800;  // 2013-07-01T00:00:00Z

const std::vector<std::string> kPositive = {
    "safe", "thankful", "grateful", "hope", "relief", "blessed",
    "calm", "okay", "strong", "helping", "love", "rescued"};
const std::vector<std::string> kNegative = {
    "scared", "flooded", "destroyed", "terrible", "panic", "dead",
    "damage", "worried", "collapsed", "horrible", "lost", "danger"};
const std::vector<std::string> kNeutral = {
    "the", "storm", "rain", "wind", "city", "today", "people", "near",
    "coast", "update", "news", "power", "roads", "family", "home", "tonight",
    "still", "water", "outside", "morning", "school", "island", "street", "sky",
    "we", "are", "is", "in", "at", "and", "our", "now"};
const std::vector<std::string> kEntities = {
    "red cross", "typhoon haiyan", "manila bay", "tacloban city",
    "pagasa", "national guard", "leyte", "visayas"};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double slope_of(const SynthSpec& spec) { return 0.23 / (1.5 * spec.tweet_strength + 2.5); }

// P(round(q(z) * c) == n) for z ~ N(mean, 1).
double count_probability(const SynthSpec& spec, double mean, std::size_t c, std::size_t n) {
  const double cd = static_cast<double>(c);
  const double a = (static_cast<double>(n) - 0.5) / cd;
  const double b = (static_cast<double>(n) + 0.5) / cd;
  if (a > kQHigh || b <= kQLow) return 0.0;
  const double slope = slope_of(spec);
  const double center = 1.5 * spec.tweet_strength;
  const auto z_of = [&](double q) { return center + (q - 0.25) / slope; };
  const double lo = a <= kQLow ? -std::numeric_limits<double>::infinity() : z_of(a);
  const double hi = b > kQHigh ? std::numeric_limits<double>::infinity() : z_of(b);
  return normal_cdf(hi - mean) - normal_cdf(lo - mean);
}

std::string pick(Rng& rng, const std::vector<std::string>& words) {
  return words[rng.below(words.size())];
}

std::string make_tweet(const SynthSpec& spec, Rng& rng, bool positive) {
  const std::size_t len =
      spec.words_min + rng.below(spec.words_max - spec.words_min + 1);
  std::vector<std::string> words;
  const std::size_t sentiment_words = 1 + rng.below(2);
  for (std::size_t i = 0; i < sentiment_words; ++i) {
    words.push_back(pick(rng, positive ? kPositive : kNegative));
  }
  if (rng.uniform() < 0.3) words.push_back(pick(rng, kEntities));
  while (words.size() < len) words.push_back(pick(rng, kNeutral));
  rng.shuffle(std::span<std::string>(words));
  // Surface noise the cleaning stage must undo.
  if (rng.uniform() < 0.1) {
    std::string& w = words[rng.below(words.size())];
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  }
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text += ' ';
    text += w;
  }
  if (rng.uniform() < 0.2) text += '!';
  if (rng.uniform() < 0.15) text = "@user" + std::to_string(rng.below(500)) + " " + text;
  if (rng.uniform() < 0.15) text += " #typhoon";
  if (rng.uniform() < 0.15) text += " http://t.co/" + std::to_string(rng.below(100000));
  if (rng.uniform() < 0.05) text += " (link: http://news.example.com/a" +
                                    std::to_string(rng.below(1000)) + ")";
  if (rng.uniform() < 0.03) text += " \xc3\xa7" "a";
  return text;
}

std::string tweet_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%07zu", i);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (n < 1) throw ContractError("synth: n must be >= 1");
  double total = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0)) throw ContractError("synth: priors must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("synth: priors must sum to 1");
  for (double a : env_alpha) {
    if (!std::isfinite(a)) throw ContractError("synth: env_alpha must be finite");
  }
  if (!(tweet_strength >= 0.0)) throw ContractError("synth: tweet_strength must be >= 0");
  if (tweets_min > tweets_max) throw ContractError("synth: tweets_min > tweets_max");
  if (words_min < 3 || words_min > words_max) {
    throw ContractError("synth: need 3 <= words_min <= words_max");
  }
  if (obs_per_storm < 1) throw ContractError("synth: obs_per_storm must be >= 1");
  if (semantic_dim < 1) throw ContractError("synth: semantic_dim must be >= 1");
}

nlohmann::json SynthSpec::to_json() const {
  return {{"n", n},
          {"priors", priors},
          {"env_alpha", env_alpha},
          {"tweet_strength", tweet_strength},
          {"tweets_min", tweets_min},
          {"tweets_max", tweets_max},
          {"words_min", words_min},
          {"words_max", words_max},
          {"obs_per_storm", obs_per_storm},
          {"sentiment_tweets", sentiment_tweets},
          {"semantic_dim", semantic_dim},
          {"seed", seed}};
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
  SynthSpec s;
  s.n = j.value("n", s.n);
  s.priors = j.value("priors", s.priors);
  s.env_alpha = j.value("env_alpha", s.env_alpha);
  s.tweet_strength = j.value("tweet_strength", s.tweet_strength);
  s.tweets_min = j.value("tweets_min", s.tweets_min);
  s.tweets_max = j.value("tweets_max", s.tweets_max);
  s.words_min = j.value("words_min", s.words_min);
  s.words_max = j.value("words_max", s.words_max);
  s.obs_per_storm = j.value("obs_per_storm", s.obs_per_storm);
  s.sentiment_tweets = j.value("sentiment_tweets", s.sentiment_tweets);
  s.semantic_dim = j.value("semantic_dim", s.semantic_dim);
  s.seed = j.value("seed", s.seed);
  return s;
}

double positive_fraction(const SynthSpec& spec, double z) {
  const double q = 0.25 + slope_of(spec) * (z - 1.5 * spec.tweet_strength);
  return std::clamp(q, kQLow, kQHigh);
}

BayesAccuracy bayes_accuracy(const SynthSpec& spec) {
  spec.validate();
  double s2 = 0.0;
  for (double a : spec.env_alpha) s2 += a * a;
  const double s_env = std::sqrt(s2);
  const std::size_t k = kNumCategories;
  // t = sum_j alpha_j e_j / |alpha| ~ N(class * |alpha|, 1) is sufficient
  // for the class given the environmental features.
  const double lo = -9.0, hi = s_env * static_cast<double>(k - 1) + 9.0;
  const double dt = 2e-3;
  const std::size_t steps = static_cast<std::size_t>((hi - lo) / dt);
  std::vector<std::array<double, kNumCategories>> env_density(steps);
  BayesAccuracy out;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = lo + (static_cast<double>(i) + 0.5) * dt;
    double best = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      env_density[i][c] = spec.priors[c] * normal_pdf(t - static_cast<double>(c) * s_env);
      best = std::max(best, env_density[i][c]);
    }
    out.env_only += best * dt;
  }
  const double pc = 1.0 / static_cast<double>(spec.tweets_max - spec.tweets_min + 1);
  for (std::size_t c = spec.tweets_min; c <= spec.tweets_max; ++c) {
    for (std::size_t npos = 0; npos <= c; ++npos) {
      std::array<double, kNumCategories> like{};
      double any = 0.0;
      for (std::size_t cls = 0; cls < k; ++cls) {
        if (c == 0) {
          like[cls] = 1.0;
        } else {
          like[cls] = count_probability(
              spec, spec.tweet_strength * static_cast<double>(cls), c, npos);
        }
        any += like[cls];
      }
      if (any == 0.0) continue;
      double acc = 0.0;
      for (std::size_t i = 0; i < steps; ++i) {
        double best = 0.0;
        for (std::size_t cls = 0; cls < k; ++cls) {
          best = std::max(best, env_density[i][cls] * like[cls]);
        }
        acc += best * dt;
      }
      out.combined += pc * acc;
      if (c == 0) break;
    }
  }
  return out;
}

SynthDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  SynthDataset out;
  Rng rng(derive_seed(spec.seed, "synth"));
  Rng text_rng(derive_seed(spec.seed, "synth_text"));

  std::array<double, kNumCategories> cdf{};
  double acc = 0.0;
  for (std::size_t c = 0; c < kNumCategories; ++c) cdf[c] = acc += spec.priors[c];

  std::size_t tweet_counter = 0;
  std::array<std::size_t, kNumCategories> class_counts{};
  double lat = 0.0, lon = 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t storm = i / spec.obs_per_storm;
    const std::size_t step = i % spec.obs_per_storm;
    if (step == 0) {
      lat = rng.uniform(8.0, 20.0);
      lon = rng.uniform(125.0, 145.0);
    } else {
      lat += rng.normal(0.25, 0.2);
      lon += rng.normal(-0.35, 0.2);
    }
    const double draw = rng.uniform();
    std::size_t cls = 0;
    while (cls + 1 < kNumCategories && draw >= cdf[cls]) ++cls;
    ++class_counts[cls];
    const double kc = static_cast<double>(cls);
    const double e1 = rng.normal(spec.env_alpha[0] * kc, 1.0);
    const double e2 = rng.normal(spec.env_alpha[1] * kc, 1.0);
    const double e3 = rng.normal(spec.env_alpha[2] * kc, 1.0);

    TyphoonObservation obs;
    char id[32];
    std::snprintf(id, sizeof id, "STORM%03zu", storm + 1);
    obs.storm_id = id;
    // Storms follow each other with a one-day gap, so slots never overlap.
    obs.timestamp = kEpoch +
                    static_cast<std::int64_t>(storm) *
                        (static_cast<std::int64_t>(spec.obs_per_storm) * kSlot + 86400) +
                    static_cast<std::int64_t>(step) * kSlot;
    obs.lat = std::round(lat * 100.0) / 100.0;
    obs.lon = std::round(lon * 100.0) / 100.0;
    obs.vmax = 70.0 + 12.0 * e1;
    obs.rad = 80.0 + 15.0 * e2;
    obs.mslp = 1010.0 - 8.0 * e3;
    obs.label = static_cast<Category>(cls);
    out.observations.push_back(obs);

    const double z = rng.normal(spec.tweet_strength * kc, 1.0);
    const double q = positive_fraction(spec, z);
    const std::size_t c = spec.tweets_min + rng.below(spec.tweets_max - spec.tweets_min + 1);
    const auto n_pos = static_cast<std::size_t>(std::lround(q * static_cast<double>(c)));
    std::vector<bool> polarity(c, false);
    for (std::size_t j = 0; j < n_pos; ++j) polarity[j] = true;
    std::vector<std::int64_t> offsets(c);
    for (auto& o : offsets) o = static_cast<std::int64_t>(rng.below(kSlot));
    std::sort(offsets.begin(), offsets.end());
    std::vector<std::size_t> perm(c);
    for (std::size_t j = 0; j < c; ++j) perm[j] = j;
    rng.shuffle(std::span<std::size_t>(perm));
    for (std::size_t j = 0; j < c; ++j) {
      RawTweet t;
      t.id = tweet_id(++tweet_counter);
      t.timestamp = obs.timestamp + offsets[j];
      t.text = make_tweet(spec, text_rng, polarity[perm[j]]);
      out.tweets.push_back(std::move(t));
    }
  }

  Rng sent_rng(derive_seed(spec.seed, "synth_sentiment"));
  for (std::size_t i = 0; i < spec.sentiment_tweets; ++i) {
    RawTweet t;
    t.id = "s" + tweet_id(i + 1).substr(1);
    t.timestamp = kEpoch - 86400 * 30 + static_cast<std::int64_t>(i) * 60;
    const bool positive = sent_rng.below(2) == 1;
    t.text = make_tweet(spec, sent_rng, positive);
    t.sentiment = positive ? 1 : 0;
    out.sentiment.push_back(std::move(t));
  }

  Rng sem_rng(derive_seed(spec.seed, "synth_semantic"));
  for (const auto& phrase : kEntities) {
    std::vector<double> v(spec.semantic_dim);
    for (double& x : v) x = sem_rng.normal(0.0, 0.1);
    std::string key = phrase;
    std::replace(key.begin(), key.end(), ' ', '_');
    out.semantic.emplace(key, std::move(v));
  }

  const BayesAccuracy bayes = bayes_accuracy(spec);
  out.ground_truth = {{"spec", spec.to_json()},
                      {"bayes_accuracy_env_only", bayes.env_only},
                      {"bayes_accuracy_combined", bayes.combined},
                      {"class_counts", class_counts},
                      {"observations", out.observations.size()},
                      {"tweets", out.tweets.size()},
                      {"sentiment_tweets", out.sentiment.size()}};
  return out;
}

void write_synth_dataset(const std::filesystem::path& dir, const SynthDataset& data,
                         const SynthSpec& spec) {
  std::filesystem::create_directories(dir);
  write_besttrack(dir / "besttrack.csv", data.observations);
  write_tweets_jsonl(dir / "tweets.jsonl", data.tweets);
  write_tweets_jsonl(dir / "sentiment.jsonl", data.sentiment);
  write_semantic_vectors(dir / "semantic_vectors.txt", data.semantic, spec.semantic_dim);
  std::ofstream out(dir / "ground_truth.json", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "ground_truth.json").string());
  out << data.ground_truth.dump(2) << '\n';
}

}  // namespace typhoon
