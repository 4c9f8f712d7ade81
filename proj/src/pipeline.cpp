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


#include "typhoon/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "typhoon/checkpoint.hpp"
#include "typhoon/data.hpp"
#include "typhoon/errors.hpp"
#include "typhoon/log.hpp"
#include "typhoon/text.hpp"

namespace typhoon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!j.is_object()) throw ContractError("config: '" + context + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ContractError("config: unknown key '" + (context.empty() ? "" : context + ".") +
                          key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& context) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ContractError("config: '" + (context.empty() ? "" : context + ".") + key +
                        "' has the wrong type");
  }
}

void read_path(const json& j, const char* key, fs::path& out, const std::string& context) {
  std::string s = out.string();
  read(j, key, s, context);
  out = s;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

fs::path prepare_stage(const RunConfig& config, std::string_view stage) {
  const fs::path dir = config.stage_dir(stage);
  fs::create_directories(dir);
  write_json(dir / "config.json", config.to_json());
  return dir;
}

}  // namespace

json RunConfig::to_json() const {
  json synth_j = synth.to_json();
  synth_j.erase("seed");
  synth_j.erase("semantic_dim");
  return {
      {"seed", seed},
      {"output_dir", output_dir.string()},
      {"paths",
       {{"besttrack", besttrack.string()},
        {"tweets", tweets.string()},
        {"sentiment", sentiment.string()},
        {"semantic_vectors", semantic_vectors.string()},
        {"preprocess_dir", preprocess_dir.string()},
        {"embed_dir", embed_dir.string()},
        {"model_dir", model_dir.string()}}},
      {"synth", synth_j},
      {"skipgram",
       {{"dim", skipgram.dim},
        {"window", skipgram.window},
        {"negatives", skipgram.negatives},
        {"epochs", skipgram.epochs},
        {"learning_rate", skipgram.learning_rate},
        {"min_count", skipgram.min_count}}},
      {"joint",
       {{"lambda_f1", joint.lambda_f1},
        {"lambda_f2", joint.lambda_f2},
        {"epochs", joint.epochs},
        {"batch_size", joint.batch_size},
        {"learning_rate", joint.learning_rate},
        {"beta1", joint.beta1},
        {"beta2", joint.beta2},
        {"epsilon", joint.epsilon},
        {"mode", std::string(mode_name(joint.mode))},
        {"clip_norm", joint.clip_norm},
        {"sentiment_cap", joint.sentiment_cap},
        {"hard_labels", joint.hard_labels},
        {"train_embeddings", joint.train_embeddings}}},
      {"model", {{"head", std::string(head_kind_name(head))}, {"lstm_units", lstm_units}}},
      {"slot_length", slot_length},
      {"smote", {{"enabled", smote}, {"k", smote_k}}},
      {"split", {{"ratio", split_ratio}, {"stratified", stratified}}},
      {"importance", {{"repeats", importance_repeats}}},
  };
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ContractError("config must be a JSON object");
  std::vector<std::string> missing;
  for (const char* key : {"seed", "output_dir"}) {
    if (!j.contains(key)) missing.emplace_back(key);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ContractError("config: missing required keys: " + list);
  }
  check_keys(j,
             {"seed", "output_dir", "paths", "synth", "skipgram", "joint", "model",
              "slot_length", "smote", "split", "importance"},
             "");
  RunConfig c;
  read(j, "seed", c.seed, "");
  read_path(j, "output_dir", c.output_dir, "");
  if (c.output_dir.empty()) throw ContractError("config: output_dir must not be empty");

  if (j.contains("paths")) {
    const json& p = j["paths"];
    check_keys(p,
               {"besttrack", "tweets", "sentiment", "semantic_vectors", "preprocess_dir",
                "embed_dir", "model_dir"},
               "paths");
    read_path(p, "besttrack", c.besttrack, "paths");
    read_path(p, "tweets", c.tweets, "paths");
    read_path(p, "sentiment", c.sentiment, "paths");
    read_path(p, "semantic_vectors", c.semantic_vectors, "paths");
    read_path(p, "preprocess_dir", c.preprocess_dir, "paths");
    read_path(p, "embed_dir", c.embed_dir, "paths");
    read_path(p, "model_dir", c.model_dir, "paths");
  }
  if (j.contains("synth")) {
    const json& s = j["synth"];
    check_keys(s,
               {"n", "priors", "env_alpha", "tweet_strength", "tweets_min", "tweets_max",
                "words_min", "words_max", "obs_per_storm", "sentiment_tweets"},
               "synth");
    try {
      c.synth = SynthSpec::from_json(s);
    } catch (const json::exception&) {
      throw ContractError("config: 'synth' has a value of the wrong type");
    }
  }
  if (j.contains("skipgram")) {
    const json& s = j["skipgram"];
    check_keys(s, {"dim", "window", "negatives", "epochs", "learning_rate", "min_count"},
               "skipgram");
    read(s, "dim", c.skipgram.dim, "skipgram");
    read(s, "window", c.skipgram.window, "skipgram");
    read(s, "negatives", c.skipgram.negatives, "skipgram");
    read(s, "epochs", c.skipgram.epochs, "skipgram");
    read(s, "learning_rate", c.skipgram.learning_rate, "skipgram");
    read(s, "min_count", c.skipgram.min_count, "skipgram");
  }
  if (j.contains("joint")) {
    const json& s = j["joint"];
    check_keys(s,
               {"lambda_f1", "lambda_f2", "epochs", "batch_size", "learning_rate", "beta1",
                "beta2", "epsilon", "mode", "clip_norm", "sentiment_cap", "hard_labels",
                "train_embeddings"},
               "joint");
    read(s, "lambda_f1", c.joint.lambda_f1, "joint");
    read(s, "lambda_f2", c.joint.lambda_f2, "joint");
    read(s, "epochs", c.joint.epochs, "joint");
    read(s, "batch_size", c.joint.batch_size, "joint");
    read(s, "learning_rate", c.joint.learning_rate, "joint");
    read(s, "beta1", c.joint.beta1, "joint");
    read(s, "beta2", c.joint.beta2, "joint");
    read(s, "epsilon", c.joint.epsilon, "joint");
    std::string mode(mode_name(c.joint.mode));
    read(s, "mode", mode, "joint");
    c.joint.mode = parse_mode(mode);
    read(s, "clip_norm", c.joint.clip_norm, "joint");
    read(s, "sentiment_cap", c.joint.sentiment_cap, "joint");
    read(s, "hard_labels", c.joint.hard_labels, "joint");
    read(s, "train_embeddings", c.joint.train_embeddings, "joint");
  }
  if (j.contains("model")) {
    const json& s = j["model"];
    check_keys(s, {"head", "lstm_units"}, "model");
    std::string head(head_kind_name(c.head));
    read(s, "head", head, "model");
    c.head = parse_head_kind(head);
    read(s, "lstm_units", c.lstm_units, "model");
  }
  read(j, "slot_length", c.slot_length, "");
  if (j.contains("smote")) {
    check_keys(j["smote"], {"enabled", "k"}, "smote");
    read(j["smote"], "enabled", c.smote, "smote");
    read(j["smote"], "k", c.smote_k, "smote");
  }
  if (j.contains("split")) {
    check_keys(j["split"], {"ratio", "stratified"}, "split");
    read(j["split"], "ratio", c.split_ratio, "split");
    read(j["split"], "stratified", c.stratified, "split");
  }
  if (j.contains("importance")) {
    check_keys(j["importance"], {"repeats"}, "importance");
    read(j["importance"], "repeats", c.importance_repeats, "importance");
  }

  // All randomness derives from the top-level seed.
  c.synth.seed = c.seed;
  c.synth.semantic_dim = c.skipgram.dim;
  c.skipgram.seed = derive_seed(c.seed, "embed");
  c.joint.seed = derive_seed(c.seed, "train");

  c.synth.validate();
  c.skipgram.validate();
  c.joint.validate();
  if (c.slot_length <= 0) throw ContractError("config: slot_length must be > 0");
  if (c.smote_k < 1) throw ContractError("config: smote.k must be >= 1");
  if (c.importance_repeats < 1) throw ContractError("config: importance.repeats must be >= 1");
  if (c.lstm_units < 1) throw ContractError("config: model.lstm_units must be >= 1");
  return c;
}

fs::path RunConfig::stage_dir(std::string_view stage) const { return output_dir / stage; }

fs::path RunConfig::besttrack_path() const {
  return besttrack.empty() ? stage_dir("synth") / "besttrack.csv" : besttrack;
}
fs::path RunConfig::tweets_path() const {
  return tweets.empty() ? stage_dir("synth") / "tweets.jsonl" : tweets;
}
fs::path RunConfig::sentiment_path() const {
  return sentiment.empty() ? stage_dir("synth") / "sentiment.jsonl" : sentiment;
}
fs::path RunConfig::semantic_path() const {
  return semantic_vectors.empty() ? stage_dir("synth") / "semantic_vectors.txt"
                                  : semantic_vectors;
}
fs::path RunConfig::preprocess_path() const {
  return preprocess_dir.empty() ? stage_dir("preprocess") : preprocess_dir;
}
fs::path RunConfig::embed_path() const {
  return embed_dir.empty() ? stage_dir("embed") : embed_dir;
}
fs::path RunConfig::model_path() const {
  return model_dir.empty() ? stage_dir("train") : model_dir;
}

void apply_override(json& config, const std::string& key, const std::string& value) {
  if (key.empty()) throw ContractError("override with an empty key");
  const std::string path = key == "mode" ? "joint.mode" : key;
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot - start);
    if (part.empty()) throw ContractError("override key '" + key + "' is malformed");
    if (!node->is_object()) throw ContractError("override '" + key + "' crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig load_run_config(const fs::path& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j = read_json(path);
  for (const auto& [k, v] : overrides) apply_override(j, k, v);
  if (const char* env = std::getenv("TYPHOON_OUTPUT_DIR"); env && *env) {
    j["output_dir"] = env;
  }
  return RunConfig::from_json(j);
}

void run_synth(const RunConfig& config) {
  const fs::path dir = prepare_stage(config, "synth");
  const SynthDataset data = synth_generate(config.synth);
  write_synth_dataset(dir, data, config.synth);
  log_info("synth: " + std::to_string(data.observations.size()) + " observations, " +
           std::to_string(data.tweets.size()) + " tweets, Bayes env-only " +
           std::to_string(data.ground_truth["bayes_accuracy_env_only"].get<double>()) +
           ", combined " +
           std::to_string(data.ground_truth["bayes_accuracy_combined"].get<double>()));
}

void run_preprocess(const RunConfig& config) {
  const fs::path dir = prepare_stage(config, "preprocess");
  const SemanticVectors semantic = load_semantic_vectors(config.semantic_path(),
                                                         config.skipgram.dim);
  std::vector<std::string> phrases;
  for (const auto& [phrase, vec] : semantic) phrases.push_back(phrase);
  const Gazetteer gazetteer(phrases);

  const auto process = [&](const fs::path& in) {
    std::vector<TokenSeq> out;
    for (const RawTweet& t : read_tweets_jsonl(in)) out.push_back(preprocess_tweet(t, gazetteer));
    return out;
  };
  const std::vector<TokenSeq> tweets = process(config.tweets_path());
  const std::vector<TokenSeq> sentiment = process(config.sentiment_path());
  write_tokens_jsonl(dir / "tokens.jsonl", tweets);
  write_tokens_jsonl(dir / "sentiment_tokens.jsonl", sentiment);

  const BesttrackData track = parse_besttrack(config.besttrack_path());
  std::vector<std::int64_t> times;
  times.reserve(tweets.size());
  for (const auto& t : tweets) times.push_back(t.timestamp);
  const PairingResult pairing =
      pair_tweet_batches(track.observations, times, config.slot_length);
  std::size_t empty_slots = 0;
  for (const auto& inst : pairing.instances) empty_slots += inst.tweets.empty();

  json rejected = json::array();
  for (const auto& r : track.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
  std::size_t entity_tokens = 0;
  for (const auto& t : tweets) {
    for (const auto& tok : t.tokens) entity_tokens += tok.kind == TokenKind::entity;
  }
  write_json(dir / "pairing.json",
             {{"observations", track.observations.size()},
              {"rejected_rows", rejected},
              {"tweets", tweets.size()},
              {"tweets_discarded", pairing.discarded},
              {"empty_slots", empty_slots},
              {"entity_tokens", entity_tokens},
              {"sentiment_tweets", sentiment.size()},
              {"fixed_length", compute_fixed_length(tweets)}});
  log_info("preprocess: " + std::to_string(tweets.size()) + " tweets, " +
           std::to_string(track.rejected.size()) + " rejected best-track rows");
}

void run_embed(const RunConfig& config) {
  const fs::path dir = prepare_stage(config, "embed");
  std::vector<TokenSeq> corpus = read_tokens_jsonl(config.preprocess_path() / "tokens.jsonl");
  for (auto& s : read_tokens_jsonl(config.preprocess_path() / "sentiment_tokens.jsonl")) {
    corpus.push_back(std::move(s));
  }
  const SkipgramResult result = train_skipgram(corpus, config.skipgram);
  const SemanticVectors semantic = load_semantic_vectors(config.semantic_path(),
                                                         config.skipgram.dim);
  const EmbeddingTable table = merge_tables(result.table, semantic);
  save_embedding_table(dir / "embeddings.txt", dir / "embeddings.json", table, config.skipgram);
  std::ofstream loss(dir / "skipgram_loss.csv", std::ios::binary);
  loss << "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g\n", e + 1, result.epoch_mean_loss[e]);
    loss << buf;
  }
  log_info("embed: vocabulary " + std::to_string(table.rows()) + " rows");
}

std::vector<Example> PreparedData::train() const {
  std::vector<Example> out;
  for (std::size_t i : train_rows) out.push_back(all[i]);
  return out;
}

std::vector<Example> PreparedData::test() const {
  std::vector<Example> out;
  for (std::size_t i : test_rows) out.push_back(all[i]);
  return out;
}

PreparedData prepare_data(const RunConfig& config) {
  PreparedData data;
  data.embeddings = load_embedding_table(config.embed_path() / "embeddings.txt",
                                         config.embed_path() / "embeddings.json");
  const json report = read_json(config.preprocess_path() / "pairing.json");
  data.fixed_length = report.at("fixed_length").get<std::size_t>();
  const std::vector<TokenSeq> tweets =
      read_tokens_jsonl(config.preprocess_path() / "tokens.jsonl");
  const BesttrackData track = parse_besttrack(config.besttrack_path());
  std::vector<std::int64_t> times;
  times.reserve(tweets.size());
  for (const auto& t : tweets) times.push_back(t.timestamp);
  const PairingResult pairing =
      pair_tweet_batches(track.observations, times, config.slot_length);

  std::vector<std::size_t> labels;
  for (const auto& inst : pairing.instances) {
    Example ex;
    ex.storm_id = inst.observation.storm_id;
    ex.timestamp = inst.observation.timestamp;
    ex.env = env_vector(inst.observation);
    ex.label = static_cast<std::size_t>(inst.observation.label);
    for (std::size_t t : inst.tweets) {
      ex.tweets.push_back(
          token_ids(data.embeddings, pad_or_truncate(tweets[t], data.fixed_length)));
    }
    ex.count = static_cast<double>(ex.tweets.size());
    labels.push_back(ex.label);
    data.all.push_back(std::move(ex));
  }
  const SplitIndices split = train_test_split(labels, config.split_ratio,
                                              derive_seed(config.seed, "split"),
                                              config.stratified);
  data.train_rows = split.train;
  data.test_rows = split.test;

  for (const auto& seq : read_tokens_jsonl(config.preprocess_path() / "sentiment_tokens.jsonl")) {
    if (!seq.sentiment) continue;
    LabeledTweet lt;
    lt.ids = token_ids(data.embeddings, pad_or_truncate(seq, data.fixed_length));
    lt.label = static_cast<std::size_t>(*seq.sentiment);
    data.sentiment.push_back(std::move(lt));
  }
  return data;
}

JointModel train_model(const RunConfig& config, const PreparedData& data,
                       TrainingReport* report) {
  JointModel model = build_joint_model(config.joint.mode, data.embeddings, config.head,
                                       kEnvFeatureCount, derive_seed(config.seed, "model"),
                                       config.lstm_units);
  std::vector<Example> train = data.train();
  fit_normalizer(model, train);
  model.hard_labels = config.joint.hard_labels;
  if (config.smote) {
    train = oversample(model, std::move(train), config.smote_k,
                       derive_seed(config.seed, "smote"));
  }
  const std::vector<Example> test = data.test();
  JointTrainer trainer(model, config.joint, std::move(train), data.sentiment);
  TrainingReport r = trainer.fit(test);
  if (report) *report = std::move(r);
  return model;
}

void save_model(const fs::path& path, const JointModel& model, const RunConfig& config) {
  const json meta = {{"mode", std::string(mode_name(model.mode))},
                     {"head", std::string(head_kind_name(model.f2.kind))},
                     {"lstm_units", model.f1.units},
                     {"env_dim", model.norm.env_dim()},
                     {"hard_labels", model.hard_labels},
                     {"normalizer", model.norm.to_json()},
                     {"seed", config.seed}};
  save_checkpoint(path, model.all_tensors(), meta);
}

JointModel load_model(const fs::path& path, EmbeddingTable embeddings) {
  const Checkpoint ckpt = load_checkpoint(path);
  const json& meta = ckpt.meta;
  JointModel model;
  try {
    model = build_joint_model(parse_mode(meta.at("mode").get<std::string>()),
                              std::move(embeddings),
                              parse_head_kind(meta.at("head").get<std::string>()),
                              meta.at("env_dim").get<std::size_t>(), 0,
                              meta.at("lstm_units").get<std::size_t>());
    model.hard_labels = meta.at("hard_labels").get<bool>();
    model.norm = FeatureNormalizer::from_json(meta.at("normalizer"));
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path.string() + " has invalid metadata: " + e.what());
  }
  ParamList params = model.all_tensors();
  restore_params(ckpt, params);
  return model;
}

TrainingReport run_train(const RunConfig& config) {
  const fs::path dir = prepare_stage(config, "train");
  const PreparedData data = prepare_data(config);
  TrainingReport report;
  const JointModel model = train_model(config, data, &report);
  save_model(dir / "model.ckpt", model, config);
  report.write_csv(dir / "training_report.csv");
  return report;
}

Metrics run_evaluate(const RunConfig& config) {
  const fs::path dir = prepare_stage(config, "evaluate");
  const PreparedData data = prepare_data(config);
  const JointModel model = load_model(config.model_path() / "model.ckpt", data.embeddings);

  const std::vector<Example> test = data.test();
  const auto x = compute_features(model, test);
  const Predictor predict = [&](const std::vector<std::vector<double>>& rows) {
    std::vector<std::size_t> out;
    for (const auto& p : predict_proba(model, rows)) out.push_back(argmax_index(p));
    return out;
  };
  std::vector<std::size_t> truth;
  for (const auto& ex : test) truth.push_back(ex.label);
  const auto pred = predict(x);
  const ConfusionMatrix cm = confusion(truth, pred, kNumCategories);
  const Metrics m = metrics(cm);
  write_metrics_csv(dir / "metrics.csv", m, kCategoryNames);
  write_confusion_csv(dir / "confusion.csv", cm, kCategoryNames);

  const auto names = feature_names(model.mode);
  std::ofstream imp(dir / "importance.csv", std::ios::binary);
  if (!imp) throw DataError("cannot write " + (dir / "importance.csv").string());
  imp << "feature,mean_drop,std\n";
  char buf[160];
  for (std::size_t f = 0; f < names.size(); ++f) {
    const Importance s = permutation_importance(predict, x, truth, f,
                                                config.importance_repeats,
                                                derive_seed(config.seed, "importance"));
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g\n", names[f].c_str(), s.mean, s.stddev);
    imp << buf;
  }

  const auto stats = compute_stats(model, data.all);
  const auto means = slot_mean_positive(model, data.all);
  std::vector<std::vector<double>> all_x;
  for (std::size_t i = 0; i < data.all.size(); ++i) {
    all_x.push_back(feature_row(model, data.all[i], stats[i]));
  }
  const auto all_pred = predict(all_x);
  std::vector<TimeseriesRow> rows;
  for (std::size_t i = 0; i < data.all.size(); ++i) {
    const Example& ex = data.all[i];
    rows.push_back({ex.storm_id, ex.timestamp, ex.label, all_pred[i], stats[i].count,
                    stats[i].v_neg, stats[i].v_pos, means[i]});
  }
  export_timeseries(rows, dir / "timeseries.csv");
  log_info("evaluate: accuracy " + std::to_string(m.accuracy));
  return m;
}

}  // namespace typhoon
