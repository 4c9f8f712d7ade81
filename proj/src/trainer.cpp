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


#include "typhoon/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "typhoon/data.hpp"
#include "typhoon/errors.hpp"
#include "typhoon/log.hpp"

namespace typhoon {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr std::size_t kEvalChunkTweets = 2048;
constexpr std::size_t kEvalChunkRows = 512;

bool is_scalar(const Tensor& t) { return t.size() == 1; }

}  // namespace

std::string_view mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::joint: return "joint";
    case TrainMode::standalone_env_only: return "standalone_env_only";
    case TrainMode::feature_extractor_only: return "feature_extractor_only";
  }
  return "joint";
}

TrainMode parse_mode(std::string_view text) {
  if (text == "joint") return TrainMode::joint;
  if (text == "standalone_env_only") return TrainMode::standalone_env_only;
  if (text == "feature_extractor_only") return TrainMode::feature_extractor_only;
  throw ContractError("unknown mode '" + std::string(text) +
                      "' (expected joint, standalone_env_only or feature_extractor_only)");
}

void JointConfig::validate() const {
  if (!(lambda_f1 >= 0.0) || !(lambda_f2 >= 0.0)) {
    throw ContractError("loss weights must be >= 0");
  }
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ContractError("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ContractError("ADAM betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ContractError("ADAM epsilon must be > 0");
  if (!(clip_norm >= 0.0)) throw ContractError("clip_norm must be >= 0");
}

void adam_step(const ParamList& params, AdamState& state, const JointConfig& cfg) {
  if (state.t == 0 && state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor.size(), 0.0);
      state.v.emplace_back(p.tensor.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("ADAM state holds " + std::to_string(state.m.size()) +
                     " tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i].tensor.size()) {
      throw ShapeError("ADAM state for " + params[i].name + " has the wrong size");
    }
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor p = params[i].tensor;
    auto w = p.mutable_data();
    auto g = p.grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      w[j] -= cfg.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg.epsilon);
    }
  }
}

double clip_grad_norm(const ParamList& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.tensor.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double f = max_norm / norm;
    for (const auto& p : params) {
      if (!p.tensor.has_grad()) continue;
      for (double& g : p.tensor.mutable_grad()) g *= f;
    }
  }
  return norm;
}

Tensor cross_entropy(const Tensor& probs, std::span<const std::size_t> targets) {
  const bool single = probs.rank() == 1;
  if (!single && probs.rank() != 2) throw ShapeError("cross_entropy needs [k] or [n x k]");
  const std::size_t n = single ? 1 : probs.dim(0);
  const std::size_t k = single ? probs.dim(0) : probs.dim(1);
  if (targets.size() != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(n) + " rows");
  }
  if (n == 0) throw ContractError("cross_entropy of an empty batch");
  auto p = probs.data();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] >= k) {
      throw ContractError("cross_entropy: target " + std::to_string(targets[i]) +
                          " out of range for " + std::to_string(k) + " classes");
    }
    const double q = std::clamp(p[i * k + targets[i]], kProbClamp, 1.0 - kProbClamp);
    total -= std::log(q);
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(n));
  if (needs_record({&probs})) {
    out.set_requires_grad(true);
    std::vector<std::size_t> tg(targets.begin(), targets.end());
    active_tape()->record(out, {probs}, [probs, out, tg, n, k]() {
      const double g = out.grad()[0] / static_cast<double>(n);
      auto gp = probs.mutable_grad();
      auto p = probs.data();
      for (std::size_t i = 0; i < n; ++i) {
        const double q = p[i * k + tg[i]];
        // The clamp is flat outside its range.
        if (q > kProbClamp && q < 1.0 - kProbClamp) gp[i * k + tg[i]] -= g / q;
      }
    });
  }
  return out;
}

Tensor joint_loss(const Tensor& l_f1, const Tensor& l_f2, const JointConfig& cfg) {
  for (const Tensor* l : {&l_f1, &l_f2}) {
    if (!is_scalar(*l)) throw ContractError("joint_loss expects scalar losses");
    const double v = l->item();
    if (!std::isfinite(v) || v < 0.0) {
      throw ContractError("joint_loss: loss must be finite and >= 0");
    }
  }
  return ops::add(ops::scale(ops::reshape(l_f1, {}), cfg.lambda_f1),
                  ops::scale(ops::reshape(l_f2, {}), cfg.lambda_f2));
}

ParamList JointModel::trainable(bool train_embeddings) const {
  ParamList out;
  if (uses_tweets()) {
    if (train_embeddings) out.push_back({"embeddings", embeddings.vectors});
    f1.append_to(out, "f1");
  }
  f2.append_to(out, "f2");
  return out;
}

ParamList JointModel::all_tensors() const {
  ParamList out;
  out.push_back({"embeddings", embeddings.vectors});
  f1.append_to(out, "f1");
  f2.append_to(out, "f2");
  return out;
}

std::size_t feature_len(TrainMode mode, std::size_t env_dim) {
  switch (mode) {
    case TrainMode::joint: return env_dim + 3;
    case TrainMode::standalone_env_only: return env_dim;
    case TrainMode::feature_extractor_only: return 3;
  }
  return env_dim + 3;
}

std::vector<std::string> feature_names(TrainMode mode) {
  std::vector<std::string> out;
  if (mode != TrainMode::feature_extractor_only) {
    for (auto name : kEnvFeatureNames) out.emplace_back(name);
  }
  if (mode != TrainMode::standalone_env_only) {
    out.insert(out.end(), {"count", "v_neg", "v_pos"});
  }
  return out;
}

JointModel build_joint_model(TrainMode mode, EmbeddingTable embeddings, HeadKind head,
                             std::size_t env_dim, std::uint64_t seed,
                             std::size_t units) {
  JointModel model;
  model.mode = mode;
  model.embeddings = std::move(embeddings);
  model.embeddings.vectors.set_requires_grad(true);
  Rng rng(derive_seed(seed, "f1"));
  model.f1 = SentimentModel::build(model.embeddings.dim(), rng, units);
  model.f2 = build_head(head, feature_len(mode, env_dim), kNumCategories,
                        derive_seed(seed, "f2"));
  return model;
}

void fit_normalizer(JointModel& model, std::span<const Example> examples) {
  std::vector<std::vector<double>> env;
  std::vector<double> counts;
  for (const auto& ex : examples) {
    if (ex.synthetic) continue;
    env.push_back(ex.env);
    counts.push_back(ex.count);
  }
  model.norm.fit(env, counts);
}

std::vector<double> feature_row(const JointModel& model, const Example& ex,
                                const StatFeatures& stats) {
  switch (model.mode) {
    case TrainMode::joint: return combine_features(ex.env, stats, model.norm);
    case TrainMode::standalone_env_only: return model.norm.normalize_env(ex.env);
    case TrainMode::feature_extractor_only:
      return {model.norm.scale_count(stats.count), stats.v_neg, stats.v_pos};
  }
  return {};
}

namespace {

StatFeatures mix_stats(const StatFeatures& a, const StatFeatures& b, double u) {
  return {a.count + u * (b.count - a.count), a.v_neg + u * (b.v_neg - a.v_neg),
          a.v_pos + u * (b.v_pos - a.v_pos)};
}

// Tweets of a run of examples flattened, with per-example offsets.
struct FlatTweets {
  std::vector<std::vector<std::size_t>> seqs;
  std::vector<std::size_t> offsets{0};
};

Tensor tweet_probs(const JointModel& model, const std::vector<std::vector<std::size_t>>& seqs,
                   bool training, Rng& rng) {
  const auto steps = embed_steps(model.embeddings.vectors,
                                 model.embeddings.frozen_rows(), seqs);
  return sentiment_forward(model.f1, steps, training, rng);
}

Tensor variance_of(const JointModel& model, const Tensor& probs,
                   std::span<const std::size_t> offsets) {
  return segment_variance(model.hard_labels ? hard_labels(probs) : probs, offsets);
}

}  // namespace

namespace {

// (v_neg, v_pos, mean p_pos) per non-synthetic example, dropout off.
std::vector<std::array<double, 3>> slot_summaries(const JointModel& model,
                                                  std::span<const Example> examples) {
  std::vector<std::array<double, 3>> out(examples.size(), {0.0, 0.0, 0.0});
  NoGradScope no_grad;
  Rng unused(0);
  std::size_t i = 0;
  while (i < examples.size()) {
    FlatTweets flat;
    std::vector<std::size_t> rows;
    while (i < examples.size() && (flat.seqs.size() < kEvalChunkTweets || rows.empty())) {
      if (!examples[i].synthetic) {
        for (const auto& t : examples[i].tweets) flat.seqs.push_back(t);
        flat.offsets.push_back(flat.seqs.size());
        rows.push_back(i);
      }
      ++i;
    }
    if (flat.seqs.empty()) continue;
    const Tensor probs = tweet_probs(model, flat.seqs, false, unused);
    const Tensor var = variance_of(model, probs, flat.offsets);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double mean = 0.0;
      const std::size_t lo = flat.offsets[r], hi = flat.offsets[r + 1];
      for (std::size_t t = lo; t < hi; ++t) mean += probs.at(t, 1);
      if (hi > lo) mean /= static_cast<double>(hi - lo);
      out[rows[r]] = {var.at(r, 0), var.at(r, 1), mean};
    }
  }
  return out;
}

}  // namespace

std::vector<double> slot_mean_positive(const JointModel& model,
                                       std::span<const Example> examples) {
  std::vector<double> out(examples.size(), 0.0);
  if (!model.uses_tweets()) return out;
  const auto summary = slot_summaries(model, examples);
  for (std::size_t i = 0; i < examples.size(); ++i) out[i] = summary[i][2];
  return out;
}

std::vector<StatFeatures> compute_stats(const JointModel& model,
                                        std::span<const Example> examples) {
  std::vector<StatFeatures> out(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) out[i].count = examples[i].count;
  if (!model.uses_tweets()) return out;
  const auto summary = slot_summaries(model, examples);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out[i].v_neg = summary[i][0];
    out[i].v_pos = summary[i][1];
  }
  for (std::size_t j = 0; j < examples.size(); ++j) {
    const Example& ex = examples[j];
    if (!ex.synthetic) continue;
    if (ex.parent_a >= examples.size() || ex.parent_b >= examples.size() ||
        examples[ex.parent_a].synthetic || examples[ex.parent_b].synthetic) {
      throw ContractError("synthetic example has invalid parents");
    }
    out[j] = mix_stats(out[ex.parent_a], out[ex.parent_b], ex.u);
    out[j].count = ex.count;
  }
  return out;
}

std::vector<std::vector<double>> compute_features(const JointModel& model,
                                                  std::span<const Example> examples) {
  const auto stats = compute_stats(model, examples);
  std::vector<std::vector<double>> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out.push_back(feature_row(model, examples[i], stats[i]));
  }
  return out;
}

std::vector<std::vector<double>> predict_proba(
    const JointModel& model, const std::vector<std::vector<double>>& features) {
  NoGradScope no_grad;
  Rng unused(0);
  const std::size_t len = model.f2.input_len;
  std::vector<std::vector<double>> out;
  out.reserve(features.size());
  for (std::size_t lo = 0; lo < features.size(); lo += kEvalChunkRows) {
    const std::size_t hi = std::min(features.size(), lo + kEvalChunkRows);
    std::vector<double> flat;
    flat.reserve((hi - lo) * len);
    for (std::size_t i = lo; i < hi; ++i) {
      if (features[i].size() != len) {
        throw ShapeError("feature row has " + std::to_string(features[i].size()) +
                         " values, head expects " + std::to_string(len));
      }
      flat.insert(flat.end(), features[i].begin(), features[i].end());
    }
    const Tensor probs =
        classify_forward(model.f2, Tensor::from({hi - lo, len}, std::move(flat)), false,
                         unused);
    const std::size_t k = probs.dim(1);
    for (std::size_t r = 0; r < hi - lo; ++r) {
      out.emplace_back(probs.data().begin() + static_cast<std::ptrdiff_t>(r * k),
                       probs.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * k));
    }
  }
  return out;
}

std::vector<std::size_t> predict_labels(const JointModel& model,
                                        std::span<const Example> examples) {
  const auto probs = predict_proba(model, compute_features(model, examples));
  std::vector<std::size_t> out;
  out.reserve(probs.size());
  for (const auto& p : probs) out.push_back(argmax_index(p));
  return out;
}

std::vector<Example> oversample(const JointModel& model, std::vector<Example> train,
                                std::size_t k, std::uint64_t seed) {
  for (const auto& ex : train) {
    if (ex.synthetic) throw ContractError("oversample: input already oversampled");
  }
  const auto features = compute_features(model, train);
  std::vector<std::size_t> labels;
  labels.reserve(train.size());
  for (const auto& ex : train) labels.push_back(ex.label);
  const SmoteResult smote = smote_oversample(features, labels, k, seed);
  const std::size_t n = train.size();
  for (std::size_t i = 0; i < smote.origins.size(); ++i) {
    const SmoteOrigin& o = smote.origins[i];
    const Example& a = train[o.a];
    const Example& b = train[o.b];
    Example syn;
    syn.storm_id = "smote";
    syn.label = smote.labels[n + i];
    syn.env.resize(a.env.size());
    for (std::size_t j = 0; j < a.env.size(); ++j) {
      syn.env[j] = a.env[j] + o.u * (b.env[j] - a.env[j]);
    }
    syn.count = a.count + o.u * (b.count - a.count);
    syn.synthetic = true;
    syn.parent_a = o.a;
    syn.parent_b = o.b;
    syn.u = o.u;
    train.push_back(std::move(syn));
  }
  return train;
}

void TrainingReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,l_f1,l_f2,l_joint,train_acc,test_acc\n";
  char buf[256];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n", e.epoch, e.l_f1,
                  e.l_f2, e.l_joint, e.train_acc, e.test_acc);
    out << buf;
  }
  if (!out) throw DataError("failed writing " + path.string());
}

JointTrainer::JointTrainer(JointModel& model, const JointConfig& cfg,
                           std::vector<Example> train, std::vector<LabeledTweet> sentiment)
    : model_(model),
      cfg_(cfg),
      train_(std::move(train)),
      sentiment_(std::move(sentiment)),
      shuffle_rng_(derive_seed(cfg.seed, "shuffle")),
      sample_rng_(derive_seed(cfg.seed, "sentiment_sample")),
      dropout_rng_(derive_seed(cfg.seed, "dropout")) {
  cfg_.validate();
  if (train_.empty()) throw ContractError("empty training split");
  if (!model_.norm.fitted()) throw ContractError("normalizer must be fitted before training");
  if (cfg_.mode != model_.mode) {
    throw ContractError("config mode " + std::string(mode_name(cfg_.mode)) +
                        " differs from model mode " + std::string(mode_name(model_.mode)));
  }
  model_.hard_labels = cfg_.hard_labels;
  model_.embeddings.vectors.set_requires_grad(cfg_.train_embeddings);
  stat_cache_ = compute_stats(model_, train_);
}

BatchLoss JointTrainer::batch_loss(std::span<const std::size_t> batch,
                                   std::span<const std::size_t> sentiment_rows,
                                   bool training) {
  if (batch.empty()) throw ContractError("train_step: empty batch");
  BatchLoss out;
  const std::size_t b = batch.size();
  std::vector<std::size_t> labels(b);
  for (std::size_t i = 0; i < b; ++i) labels[i] = train_[batch[i]].label;

  Tensor l_f1 = Tensor::scalar(0.0);
  Tensor variance;  // [b x 2] rows in batch order
  std::vector<std::size_t> real_rows;
  if (model_.uses_tweets()) {
    FlatTweets flat;
    for (std::size_t i = 0; i < b; ++i) {
      const Example& ex = train_[batch[i]];
      if (ex.synthetic) continue;
      for (const auto& t : ex.tweets) flat.seqs.push_back(t);
      flat.offsets.push_back(flat.seqs.size());
      real_rows.push_back(i);
    }
    const std::size_t n_batch_tweets = flat.seqs.size();
    std::vector<std::size_t> sent_labels;
    for (std::size_t r : sentiment_rows) {
      flat.seqs.push_back(sentiment_.at(r).ids);
      sent_labels.push_back(sentiment_[r].label);
    }
    Tensor real_var = Tensor::zeros({real_rows.size(), 2});
    if (!flat.seqs.empty()) {
      const Tensor probs = tweet_probs(model_, flat.seqs, training, dropout_rng_);
      if (n_batch_tweets > 0) {
        std::vector<std::size_t> idx(n_batch_tweets);
        std::iota(idx.begin(), idx.end(), 0);
        real_var = variance_of(model_, ops::gather_rows(probs, idx), flat.offsets);
      }
      if (!sent_labels.empty()) {
        std::vector<std::size_t> idx(sent_labels.size());
        std::iota(idx.begin(), idx.end(), n_batch_tweets);
        l_f1 = cross_entropy(ops::gather_rows(probs, idx), sent_labels);
      }
    }
    // Synthetic rows follow their parents' latest statistics as constants.
    std::vector<double> syn_values;
    std::vector<std::size_t> source(b);
    std::size_t real_i = 0, syn_i = 0;
    for (std::size_t i = 0; i < b; ++i) {
      const Example& ex = train_[batch[i]];
      if (!ex.synthetic) {
        source[i] = real_i++;
        continue;
      }
      const StatFeatures s = mix_stats(stat_cache_[ex.parent_a], stat_cache_[ex.parent_b], ex.u);
      syn_values.push_back(s.v_neg);
      syn_values.push_back(s.v_pos);
      source[i] = real_rows.size() + syn_i++;
    }
    const Tensor pool =
        syn_i == 0 ? real_var
                   : ops::concat({real_var, Tensor::from({syn_i, 2}, syn_values)}, 0);
    variance = ops::gather_rows(pool, source);
    for (std::size_t r = 0; r < real_rows.size(); ++r) {
      out.real_stats.emplace_back(batch[real_rows[r]],
                                  std::array{real_var.at(r, 0), real_var.at(r, 1)});
    }
  }

  // Constant columns: normalized env and/or scaled count.
  std::vector<double> constant;
  std::size_t const_len = 0;
  for (std::size_t i = 0; i < b; ++i) {
    const Example& ex = train_[batch[i]];
    std::vector<double> row;
    if (model_.mode != TrainMode::feature_extractor_only) row = model_.norm.normalize_env(ex.env);
    if (model_.uses_tweets()) row.push_back(model_.norm.scale_count(ex.count));
    const_len = row.size();
    constant.insert(constant.end(), row.begin(), row.end());
  }
  const Tensor c = Tensor::from({b, const_len}, std::move(constant));
  const Tensor x = model_.uses_tweets() ? ops::concat({c, variance}, 1) : c;
  out.probs = classify_forward(model_.f2, x, training, dropout_rng_);
  out.l_f1 = l_f1;
  out.l_f2 = cross_entropy(out.probs, labels);
  out.l_joint = joint_loss(out.l_f1, out.l_f2, cfg_);
  out.labels = std::move(labels);
  return out;
}

StepResult JointTrainer::step(std::span<const std::size_t> batch,
                              std::span<const std::size_t> sentiment_rows) {
  const ParamList params = model_.trainable(cfg_.train_embeddings);
  for (const auto& p : params) Tensor(p.tensor).zero_grad();
  if (!cfg_.train_embeddings) Tensor(model_.embeddings.vectors).zero_grad();

  Tape tape;
  TapeScope scope(tape);
  const BatchLoss loss = batch_loss(batch, sentiment_rows, true);
  if (loss.l_joint.requires_grad()) tape.backward(loss.l_joint);
  clip_grad_norm(params, cfg_.clip_norm);
  adam_step(params, adam_, cfg_);
  for (const auto& [row, v] : loss.real_stats) {
    stat_cache_[row].v_neg = v[0];
    stat_cache_[row].v_pos = v[1];
  }

  StepResult out;
  out.l_f1 = loss.l_f1.item();
  out.l_f2 = loss.l_f2.item();
  out.l_joint = loss.l_joint.item();
  out.total = batch.size();
  const std::size_t k = loss.probs.dim(1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = loss.probs.data().subspan(i * k, k);
    if (argmax_index(row) == loss.labels[i]) ++out.correct;
  }
  return out;
}

TrainingReport JointTrainer::fit(std::span<const Example> test,
                                 const std::function<void(const EpochRecord&)>& on_epoch) {
  TrainingReport report;
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> test_labels;
  for (const auto& ex : test) test_labels.push_back(ex.label);

  for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    shuffle_rng_.shuffle(std::span<std::size_t>(order));
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t correct = 0, total = 0, steps = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg_.batch_size) {
      const std::size_t hi = std::min(order.size(), lo + cfg_.batch_size);
      const std::span<const std::size_t> batch(order.data() + lo, hi - lo);
      std::vector<std::size_t> sent;
      if (model_.uses_tweets() && !sentiment_.empty()) {
        std::size_t tweets = 0;
        for (std::size_t i : batch) tweets += train_[i].tweets.size();
        const std::size_t want = std::min(tweets, cfg_.sentiment_cap);
        for (std::size_t j = 0; j < want; ++j) sent.push_back(sample_rng_.below(sentiment_.size()));
      }
      const StepResult r = step(batch, sent);
      rec.l_f1 += r.l_f1;
      rec.l_f2 += r.l_f2;
      rec.l_joint += r.l_joint;
      correct += r.correct;
      total += r.total;
      ++steps;
    }
    rec.l_f1 /= static_cast<double>(steps);
    rec.l_f2 /= static_cast<double>(steps);
    rec.l_joint /= static_cast<double>(steps);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(total);
    if (!test.empty()) {
      rec.test_acc = accuracy(test_labels, predict_labels(model_, test));
    }
    report.epochs.push_back(rec);
    log_info("epoch " + std::to_string(epoch) + " l_joint " + std::to_string(rec.l_joint) +
             " train_acc " + std::to_string(rec.train_acc) + " test_acc " +
             std::to_string(rec.test_acc));
    if (on_epoch) on_epoch(rec);
  }
  return report;
}

TrainingReport fit(JointModel& model, const JointConfig& cfg, std::vector<Example> train,
                   std::span<const Example> test, std::vector<LabeledTweet> sentiment) {
  JointTrainer trainer(model, cfg, std::move(train), std::move(sentiment));
  return trainer.fit(test);
}

double accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  if (truth.size() != pred.size()) throw ShapeError("accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == pred[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace typhoon
