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


#include "typhoon/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "typhoon/errors.hpp"
#include "typhoon/log.hpp"
#include "typhoon/random.hpp"

namespace typhoon {

namespace {

// -log(sigmoid(x)) without overflow.
double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double parse_double(std::string_view text, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw DataError(where + ": malformed number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// --- Vocab ------------------------------------------------------------------

Vocab::Vocab() {
  tokens_.emplace_back(kPadText);
  index_.emplace(std::string(kPadText), 0);
}

std::size_t Vocab::add(const std::string& token) {
  const auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  tokens_.push_back(token);
  index_.emplace(token, tokens_.size() - 1);
  return tokens_.size() - 1;
}

std::size_t Vocab::lookup(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? 0 : it->second;
}

void SkipgramConfig::validate() const {
  if (dim < 1 || window < 1 || negatives < 1 || min_count < 1) {
    throw ContractError("skipgram config needs dim, window, negatives, min_count >= 1");
  }
  if (learning_rate < 0.0) throw ContractError("skipgram learning_rate must be >= 0");
}

std::vector<bool> EmbeddingTable::frozen_rows() const {
  std::vector<bool> frozen = entity_marks;
  frozen.resize(rows(), false);
  frozen[0] = true;
  return frozen;
}

Vocab build_vocab(const std::vector<TokenSeq>& corpus, std::size_t min_count) {
  if (corpus.empty()) throw ContractError("build_vocab: empty corpus");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& seq : corpus) {
    for (const auto& tok : seq.tokens) {
      if (tok.kind != TokenKind::pad) ++counts[tok.text];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  if (kept.empty()) {
    throw ContractError("build_vocab: no token reaches min_count " +
                        std::to_string(min_count));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocab vocab;
  for (const auto& [tok, n] : kept) vocab.add(tok);
  return vocab;
}

SkipgramResult train_skipgram(const std::vector<TokenSeq>& corpus,
                              const SkipgramConfig& config) {
  config.validate();
  Vocab vocab = build_vocab(corpus, config.min_count);
  const std::size_t V = vocab.size();
  const std::size_t d = config.dim;
  if (V < 3) {
    throw ContractError("train_skipgram needs at least 2 non-PAD vocabulary tokens");
  }

  std::vector<std::vector<std::size_t>> sentences;
  std::vector<double> freq(V, 0.0);
  std::size_t total_positions = 0;
  for (const auto& seq : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& tok : seq.tokens) {
      const std::size_t id = tok.kind == TokenKind::pad ? 0 : vocab.lookup(tok.text);
      if (id != 0) {
        ids.push_back(id);
        freq[id] += 1.0;
      }
    }
    total_positions += ids.size();
    if (ids.size() >= 2) sentences.push_back(std::move(ids));
  }

  // Cumulative unigram^0.75 distribution over rows 1..V-1.
  std::vector<double> cdf(V, 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < V; ++i) {
    acc += std::pow(freq[i], 0.75);
    cdf[i] = acc;
  }
  for (double& c : cdf) c /= acc;

  Rng rng(config.seed);
  std::vector<double> center(V * d, 0.0);
  std::vector<double> context(V * d, 0.0);
  for (std::size_t i = d; i < V * d; ++i) {
    center[i] = (rng.uniform() - 0.5) / static_cast<double>(d);
  }
  auto sample_negative = [&]() {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), V - 1);
  };

  SkipgramResult result;
  const double budget =
      static_cast<double>(std::max<std::size_t>(1, total_positions * config.epochs));
  double processed = 0.0;
  std::vector<double> neu(d);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (const auto& ids : sentences) {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const double lr =
            config.learning_rate * std::max(1e-4, 1.0 - processed / budget);
        processed += 1.0;
        double* v = &center[ids[i] * d];
        const std::size_t lo = i >= config.window ? i - config.window : 0;
        const std::size_t hi = std::min(ids.size(), i + config.window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i) continue;
          std::fill(neu.begin(), neu.end(), 0.0);
          auto update = [&](std::size_t target, double label) {
            double* u = &context[target * d];
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += v[k] * u[k];
            loss_sum += neg_log_sigmoid(label > 0 ? dot : -dot);
            const double g = lr * (label - sigmoid(dot));
            for (std::size_t k = 0; k < d; ++k) {
              neu[k] += g * u[k];
              u[k] += g * v[k];
            }
          };
          update(ids[j], 1.0);
          for (std::size_t n = 0; n < config.negatives; ++n) {
            const std::size_t neg = sample_negative();
            if (neg == ids[j]) continue;
            update(neg, 0.0);
          }
          for (std::size_t k = 0; k < d; ++k) v[k] += neu[k];
          ++pairs;
        }
      }
    }
    result.epoch_mean_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }

  std::fill(center.begin(), center.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
  result.table.vocab = std::move(vocab);
  result.table.vectors = Tensor::from({V, d}, std::move(center));
  result.table.entity_marks.assign(V, false);
  return result;
}

SemanticVectors load_semantic_vectors(const std::filesystem::path& path,
                                      std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open semantic vectors " + path.string());
  SemanticVectors out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t declared = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = fields(line);
    if (f.empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (!header_seen) {
      header_seen = true;
      if (f.size() != 2) throw DataError(where + ": expected header 'V d'");
      declared = static_cast<std::size_t>(parse_double(f[0], where));
      const auto dim = static_cast<std::size_t>(parse_double(f[1], where));
      if (dim != expected_dim) {
        throw DataError(where + ": dimension " + std::to_string(dim) +
                        " does not match expected " + std::to_string(expected_dim));
      }
      continue;
    }
    if (f.size() != expected_dim + 1) {
      throw DataError(where + ": expected " + std::to_string(expected_dim) +
                      " values, got " + std::to_string(f.size() - 1));
    }
    std::vector<double> vec;
    vec.reserve(expected_dim);
    for (std::size_t i = 1; i < f.size(); ++i) vec.push_back(parse_double(f[i], where));
    std::string phrase(f[0]);
    for (char& c : phrase) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out[phrase] = std::move(vec);
  }
  if (!header_seen) {
    log_warn("semantic vector file " + path.string() + " is empty");
  } else if (declared != out.size()) {
    log_warn("semantic vector file " + path.string() + " declares " +
             std::to_string(declared) + " entries but holds " +
             std::to_string(out.size()));
  }
  return out;
}

void write_semantic_vectors(const std::filesystem::path& path,
                            const SemanticVectors& vectors, std::size_t dim) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << vectors.size() << ' ' << dim << '\n';
  for (const auto& [phrase, vec] : vectors) {
    if (vec.size() != dim) throw ShapeError("semantic vector '" + phrase + "' has wrong dimension");
    out << phrase;
    for (double v : vec) out << ' ' << format_double(v);
    out << '\n';
  }
}

EmbeddingTable merge_tables(const EmbeddingTable& words,
                            const SemanticVectors& semantic) {
  const std::size_t d = words.dim();
  for (const auto& [phrase, vec] : semantic) {
    if (vec.size() != d) {
      throw ShapeError("merge_tables: semantic vector '" + phrase + "' has dimension " +
                       std::to_string(vec.size()) + ", table has " + std::to_string(d));
    }
  }
  EmbeddingTable out;
  out.vocab = words.vocab;
  std::vector<double> data(words.vectors.data().begin(), words.vectors.data().end());
  out.entity_marks = words.entity_marks;
  out.entity_marks.resize(words.rows(), false);
  for (const auto& [phrase, vec] : semantic) {
    const std::size_t before = out.vocab.size();
    const std::size_t row = out.vocab.add(phrase);
    if (row == before) {
      data.insert(data.end(), vec.begin(), vec.end());
      out.entity_marks.push_back(true);
    } else {
      std::copy(vec.begin(), vec.end(), data.begin() + static_cast<std::ptrdiff_t>(row * d));
      out.entity_marks[row] = true;
    }
  }
  out.vectors = Tensor::from({out.vocab.size(), d}, std::move(data));
  return out;
}

std::vector<std::size_t> token_ids(const EmbeddingTable& table, const TokenSeq& seq) {
  std::vector<std::size_t> ids;
  ids.reserve(seq.size());
  for (const auto& tok : seq.tokens) {
    ids.push_back(tok.kind == TokenKind::pad ? 0 : table.vocab.lookup(tok.text));
  }
  return ids;
}

Tensor lookup_sequence(const EmbeddingTable& table, const TokenSeq& seq) {
  const auto ids = token_ids(table, seq);
  return ops::gather_rows(table.vectors, ids, table.frozen_rows());
}

void save_embedding_table(const std::filesystem::path& vectors_path,
                          const std::filesystem::path& sidecar_path,
                          const EmbeddingTable& table,
                          const SkipgramConfig& config) {
  const std::size_t d = table.dim();
  std::ofstream out(vectors_path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + vectors_path.string());
  out << table.rows() - 1 << ' ' << d << '\n';
  auto data = table.vectors.data();
  for (std::size_t r = 1; r < table.rows(); ++r) {
    out << table.vocab.token(r);
    for (std::size_t k = 0; k < d; ++k) out << ' ' << format_double(data[r * d + k]);
    out << '\n';
  }
  nlohmann::ordered_json side;
  side["dim"] = d;
  side["pad"] = std::string(kPadText);
  auto& marks = side["entity_marks"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (r < table.entity_marks.size() && table.entity_marks[r]) {
      marks.push_back(table.vocab.token(r));
    }
  }
  side["config"] = {{"dim", config.dim},           {"window", config.window},
                    {"negatives", config.negatives}, {"epochs", config.epochs},
                    {"learning_rate", config.learning_rate},
                    {"min_count", config.min_count}, {"seed", config.seed}};
  std::ofstream sout(sidecar_path, std::ios::trunc);
  if (!sout) throw DataError("cannot write " + sidecar_path.string());
  sout << side.dump(2) << '\n';
}

EmbeddingTable load_embedding_table(const std::filesystem::path& vectors_path,
                                    const std::filesystem::path& sidecar_path) {
  std::ifstream sin(sidecar_path);
  if (!sin) throw DataError("cannot open " + sidecar_path.string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(sin);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(sidecar_path.string() + ": " + e.what());
  }
  const auto d = side.at("dim").get<std::size_t>();

  std::ifstream in(vectors_path);
  if (!in) throw DataError("cannot open " + vectors_path.string());
  EmbeddingTable table;
  std::vector<double> data(d, 0.0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = fields(line);
    if (f.empty() || line_no == 1) continue;
    const std::string where = vectors_path.string() + ":" + std::to_string(line_no);
    if (f.size() != d + 1) throw DataError(where + ": wrong number of values");
    table.vocab.add(std::string(f[0]));
    for (std::size_t i = 1; i < f.size(); ++i) data.push_back(parse_double(f[i], where));
  }
  table.vectors = Tensor::from({table.vocab.size(), d}, std::move(data));
  table.entity_marks.assign(table.vocab.size(), false);
  for (const auto& tok : side.at("entity_marks")) {
    const std::size_t row = table.vocab.lookup(tok.get<std::string>());
    if (row != 0) table.entity_marks[row] = true;
  }
  return table;
}

}  // namespace typhoon
