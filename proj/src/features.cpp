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


#include "typhoon/features.hpp"

#include <cmath>

#include "typhoon/errors.hpp"

namespace typhoon {

SentimentModel SentimentModel::build(std::size_t input_dim, Rng& rng,
                                     std::size_t units, double dropout_rate) {
  SentimentModel m;
  m.units = units;
  m.dropout_rate = dropout_rate;
  m.forward = LstmParams::init(input_dim, units, rng);
  m.backward = LstmParams::init(input_dim, units, rng);
  m.head = DenseParams::init(2 * units, 2, rng);
  return m;
}

void SentimentModel::append_to(ParamList& out, const std::string& prefix) const {
  forward.append_to(out, prefix + ".lstm_fwd");
  backward.append_to(out, prefix + ".lstm_bwd");
  head.append_to(out, prefix + ".head");
}

Tensor sentiment_forward(const SentimentModel& model,
                         std::span<const Tensor> steps, bool training, Rng& rng) {
  for (const Tensor& x : steps) {
    if (x.rank() != 2 || x.dim(1) != model.input_dim()) {
      throw ShapeError("sentiment_forward: step " + shape_string(x.shape()) +
                       " does not have width " + std::to_string(model.input_dim()));
    }
  }
  const Tensor h = bilstm_forward(model.forward, model.backward, steps);
  const Tensor dropped = dropout_forward(h, model.dropout_rate, training, rng);
  return softmax(dense_forward(model.head, dropped, Activation::none));
}

Tensor sentiment_forward(const SentimentModel& model, const Tensor& m,
                         bool training, Rng& rng) {
  if (m.rank() != 2 || m.dim(1) != model.input_dim()) {
    throw ShapeError("sentiment_forward: M " + shape_string(m.shape()) +
                     " is not [s x " + std::to_string(model.input_dim()) + "]");
  }
  std::vector<Tensor> steps;
  for (std::size_t t = 0; t < m.dim(0); ++t) {
    const std::size_t row[] = {t};
    steps.push_back(ops::gather_rows(m, row));
  }
  return ops::reshape(sentiment_forward(model, steps, training, rng), {2});
}

std::vector<Tensor> embed_steps(const Tensor& table,
                                const std::vector<bool>& frozen,
                                std::span<const std::vector<std::size_t>> seqs) {
  if (seqs.empty()) throw ContractError("embed_steps: no sequences");
  const std::size_t s = seqs.front().size();
  for (const auto& seq : seqs) {
    if (seq.size() != s) throw ShapeError("embed_steps: sequences differ in length");
  }
  std::vector<Tensor> steps;
  std::vector<std::size_t> rows(seqs.size());
  for (std::size_t t = 0; t < s; ++t) {
    for (std::size_t i = 0; i < seqs.size(); ++i) rows[i] = seqs[i][t];
    steps.push_back(ops::gather_rows(table, rows, frozen));
  }
  return steps;
}

StatFeatures batch_statistics(std::span<const std::array<double, 2>> sentiments) {
  StatFeatures out;
  if (sentiments.empty()) return out;
  const auto c = static_cast<double>(sentiments.size());
  double mean_neg = 0.0, mean_pos = 0.0;
  for (const auto& p : sentiments) {
    if (std::abs(p[0] + p[1] - 1.0) > 1e-9) {
      throw ContractError("batch_statistics: sentiment pair does not sum to 1");
    }
    mean_neg += p[0];
    mean_pos += p[1];
  }
  mean_neg /= c;
  mean_pos /= c;
  for (const auto& p : sentiments) {
    out.v_neg += (p[0] - mean_neg) * (p[0] - mean_neg);
    out.v_pos += (p[1] - mean_pos) * (p[1] - mean_pos);
  }
  out.count = c;
  out.v_neg /= c;
  out.v_pos /= c;
  return out;
}

Tensor segment_variance(const Tensor& x, std::span<const std::size_t> offsets) {
  if (x.rank() != 2) throw ShapeError("segment_variance needs a rank-2 input");
  if (offsets.size() < 2 || offsets.back() > x.dim(0)) {
    throw ShapeError("segment_variance: bad segment offsets");
  }
  const std::size_t k = x.dim(1);
  const std::size_t segments = offsets.size() - 1;
  Tensor out = Tensor::zeros({segments, k});
  auto o = out.mutable_data();
  auto v = x.data();
  std::vector<double> means(segments * k, 0.0);
  for (std::size_t b = 0; b < segments; ++b) {
    const std::size_t lo = offsets[b], hi = offsets[b + 1];
    if (hi < lo) throw ShapeError("segment_variance: offsets must be non-decreasing");
    if (hi == lo) continue;
    const auto c = static_cast<double>(hi - lo);
    for (std::size_t j = 0; j < k; ++j) {
      double mu = 0.0;
      for (std::size_t r = lo; r < hi; ++r) mu += v[r * k + j];
      mu /= c;
      double acc = 0.0;
      for (std::size_t r = lo; r < hi; ++r) acc += (v[r * k + j] - mu) * (v[r * k + j] - mu);
      means[b * k + j] = mu;
      o[b * k + j] = acc / c;
    }
  }
  if (needs_record({&x})) {
    out.set_requires_grad(true);
    std::vector<std::size_t> offs(offsets.begin(), offsets.end());
    active_tape()->record(out, {x}, [x, out, offs, means, k, segments]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      auto v = x.data();
      for (std::size_t b = 0; b < segments; ++b) {
        const std::size_t lo = offs[b], hi = offs[b + 1];
        if (hi == lo) continue;
        const auto c = static_cast<double>(hi - lo);
        for (std::size_t j = 0; j < k; ++j) {
          // d/dS_i of (1/c) sum (S - mu)^2 is 2 (S_i - mu) / c.
          const double scale = 2.0 * g[b * k + j] / c;
          for (std::size_t r = lo; r < hi; ++r) {
            gx[r * k + j] += scale * (v[r * k + j] - means[b * k + j]);
          }
        }
      }
    });
  }
  return out;
}

Tensor hard_labels(const Tensor& probs) {
  if (probs.rank() != 2) throw ShapeError("hard_labels needs [n x k]");
  const std::size_t n = probs.dim(0), k = probs.dim(1);
  Tensor out = Tensor::zeros({n, k});
  auto o = out.mutable_data();
  auto p = probs.data();
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (p[r * k + j] > p[r * k + best]) best = j;
    }
    o[r * k + best] = 1.0;
  }
  return out;
}

void FeatureNormalizer::fit(const std::vector<std::vector<double>>& env_rows,
                            std::span<const double> counts) {
  if (env_rows.empty()) throw ContractError("FeatureNormalizer::fit: no rows");
  const std::size_t m = env_rows.front().size();
  min_.assign(m, 0.0);
  max_.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    min_[j] = max_[j] = env_rows.front()[j];
  }
  for (const auto& row : env_rows) {
    if (row.size() != m) throw ShapeError("FeatureNormalizer::fit: ragged rows");
    for (std::size_t j = 0; j < m; ++j) {
      min_[j] = std::min(min_[j], row[j]);
      max_[j] = std::max(max_[j], row[j]);
    }
  }
  max_log_count_ = 0.0;
  for (double c : counts) max_log_count_ = std::max(max_log_count_, std::log1p(c));
  fitted_ = true;
}

std::vector<double> FeatureNormalizer::normalize_env(std::span<const double> env) const {
  if (!fitted_) throw ContractError("FeatureNormalizer used before fit");
  if (env.size() != min_.size()) {
    throw ShapeError("environmental vector has " + std::to_string(env.size()) +
                     " features, normalizer was fitted on " +
                     std::to_string(min_.size()));
  }
  std::vector<double> out(env.size());
  for (std::size_t j = 0; j < env.size(); ++j) {
    const double range = max_[j] - min_[j];
    out[j] = range > 0.0 ? (env[j] - min_[j]) / range : 0.0;
  }
  return out;
}

double FeatureNormalizer::scale_count(double count) const {
  if (!fitted_) throw ContractError("FeatureNormalizer used before fit");
  return max_log_count_ > 0.0 ? std::log1p(count) / max_log_count_ : 0.0;
}

nlohmann::json FeatureNormalizer::to_json() const {
  return {{"min", min_}, {"max", max_}, {"max_log_count", max_log_count_}};
}

FeatureNormalizer FeatureNormalizer::from_json(const nlohmann::json& j) {
  return from_ranges(j.at("min").get<std::vector<double>>(),
                     j.at("max").get<std::vector<double>>(),
                     j.at("max_log_count").get<double>());
}

FeatureNormalizer FeatureNormalizer::from_ranges(std::vector<double> min,
                                                 std::vector<double> max,
                                                 double max_log_count) {
  if (min.size() != max.size()) throw ShapeError("normalizer ranges differ in length");
  FeatureNormalizer n;
  n.min_ = std::move(min);
  n.max_ = std::move(max);
  n.max_log_count_ = max_log_count;
  n.fitted_ = true;
  return n;
}

std::vector<double> combine_features(std::span<const double> env,
                                     const StatFeatures& stats,
                                     const FeatureNormalizer& norm) {
  std::vector<double> out = norm.normalize_env(env);
  out.push_back(norm.scale_count(stats.count));
  out.push_back(stats.v_neg);
  out.push_back(stats.v_pos);
  return out;
}

}  // namespace typhoon
