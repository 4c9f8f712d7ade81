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
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "typhoon/tensor.hpp"
#include "typhoon/text.hpp"

namespace typhoon {

/// Token -> row index. Index 0 is the reserved PAD token; unknown tokens
/// resolve to 0 at lookup time.
class Vocab {
 public:
  Vocab();

  std::size_t add(const std::string& token);
  std::size_t lookup(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.contains(token); }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SkipgramConfig {
  std::size_t dim = 200;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::size_t min_count = 2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EmbeddingTable {
  Vocab vocab;
  Tensor vectors;                 // [V x d]; row 0 is all zeros
  std::vector<bool> entity_marks; // per row; true for semantic-source rows

  std::size_t dim() const { return vectors.dim(1); }
  std::size_t rows() const { return vectors.dim(0); }
  /// Rows excluded from gradient updates: PAD and every entity row.
  std::vector<bool> frozen_rows() const;
};

/// Tokens with frequency >= min_count ordered by (frequency desc, token asc),
/// indexed from 1. PAD tokens are never counted.
Vocab build_vocab(const std::vector<TokenSeq>& corpus, std::size_t min_count);

struct SkipgramResult {
  EmbeddingTable table;
  std::vector<double> epoch_mean_loss;
};

/// Skip-gram with negative sampling over the (unpadded) corpus. Negatives
/// come from the unigram^0.75 distribution; the learning rate decays
/// linearly over all epochs. Returns the center vectors.
SkipgramResult train_skipgram(const std::vector<TokenSeq>& corpus,
                              const SkipgramConfig& config);

using SemanticVectors = std::map<std::string, std::vector<double>>;

/// word2vec text format: "V d" header, then "phrase v1 ... vd" per line with
/// spaces inside phrases written as '_'. An empty file yields an empty map.
SemanticVectors load_semantic_vectors(const std::filesystem::path& path,
                                      std::size_t expected_dim);
void write_semantic_vectors(const std::filesystem::path& path,
                            const SemanticVectors& vectors, std::size_t dim);

/// Adds or overwrites every semantic phrase with its vector and marks it as
/// an entity row. Word rows are copied bit-exactly.
EmbeddingTable merge_tables(const EmbeddingTable& words,
                            const SemanticVectors& semantic);

std::vector<std::size_t> token_ids(const EmbeddingTable& table,
                                   const TokenSeq& seq);

/// [s x d] matrix with one row per token; PAD and unknown tokens give zero
/// rows. Differentiable in table.vectors except for frozen rows.
Tensor lookup_sequence(const EmbeddingTable& table, const TokenSeq& seq);

/// Table export: word2vec text file (PAD omitted) plus a JSON sidecar with
/// the entity rows and the training config.
void save_embedding_table(const std::filesystem::path& vectors_path,
                          const std::filesystem::path& sidecar_path,
                          const EmbeddingTable& table,
                          const SkipgramConfig& config);
EmbeddingTable load_embedding_table(const std::filesystem::path& vectors_path,
                                    const std::filesystem::path& sidecar_path);

}  // namespace typhoon
