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


#include <doctest.h>

#include <cmath>
#include <fstream>

#include "test_util.hpp"
#include "typhoon/embeddings.hpp"
#include "typhoon/errors.hpp"

using namespace typhoon;
using typhoon::testing::TempDir;
using typhoon::testing::values;

namespace {

TokenSeq words(std::initializer_list<const char*> ws) {
  TokenSeq s;
  for (const char* w : ws) s.tokens.push_back({w});
  return s;
}

std::vector<double> row(const EmbeddingTable& t, const std::string& token) {
  const std::size_t i = t.vocab.lookup(token);
  const auto d = t.dim();
  return {t.vectors.data().begin() + i * d, t.vectors.data().begin() + (i + 1) * d};
}

}  // namespace

TEST_CASE("vocab ordering and cutoff") {
  const std::vector<TokenSeq> corpus = {words({"a", "a", "b"})};
  Vocab v = build_vocab(corpus, 1);
  CHECK(v.size() == 3);
  CHECK(v.token(0) == kPadText);
  CHECK(v.lookup("a") == 1);
  CHECK(v.lookup("b") == 2);
  CHECK(v.lookup("zzzz") == 0);

  Vocab cut = build_vocab(corpus, 2);
  CHECK(cut.size() == 2);
  CHECK(cut.lookup("b") == 0);

  CHECK_THROWS(build_vocab(corpus, 3));
  CHECK_THROWS(build_vocab({}, 1));

  Vocab tie = build_vocab({words({"z", "y", "y", "z", "x"})}, 1);
  CHECK(tie.tokens() == std::vector<std::string>{std::string(kPadText), "y", "z", "x"});
}

TEST_CASE("skip-gram config validation") {
  SkipgramConfig c;
  CHECK(c.dim == 200);
  CHECK(c.window == 5);
  CHECK(c.negatives == 5);
  CHECK(c.min_count == 2);
  CHECK_NOTHROW(c.validate());
  c.window = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("skip-gram with zero learning rate keeps the initialization") {
  std::vector<TokenSeq> corpus(20, words({"a", "b", "c", "a", "d"}));
  SkipgramConfig c;
  c.dim = 8;
  c.min_count = 1;
  c.learning_rate = 0.0;
  c.epochs = 1;
  const auto one = values(train_skipgram(corpus, c).table.vectors);
  c.epochs = 4;
  const auto four = values(train_skipgram(corpus, c).table.vectors);
  CHECK(one == four);
}

TEST_CASE("skip-gram is reproducible and pad row is zero") {
  std::vector<TokenSeq> corpus(30, words({"storm", "rain", "wind", "help", "safe"}));
  SkipgramConfig c;
  c.dim = 6;
  c.min_count = 1;
  c.epochs = 3;
  c.seed = 5;
  SkipgramResult a = train_skipgram(corpus, c);
  SkipgramResult b = train_skipgram(corpus, c);
  CHECK(values(a.table.vectors) == values(b.table.vectors));
  CHECK(a.epoch_mean_loss == b.epoch_mean_loss);
  for (std::size_t j = 0; j < 6; ++j) CHECK(a.table.vectors.at(0, j) == 0.0);
  CHECK_THROWS(train_skipgram({words({"a", "a"})}, c));
}

TEST_CASE("semantic vector file parsing") {
  TempDir dir("emb");
  {
    std::ofstream(dir / "one.txt") << "1 3\nred_cross 0.1 0.2 0.3\n";
    std::ofstream(dir / "wide.txt") << "1 4\nred_cross 0.1 0.2 0.3 0.4\n";
    std::ofstream(dir / "bad.txt") << "1 3\nred_cross 0.1 zero 0.3\n";
    std::ofstream(dir / "short.txt") << "2 3\nred_cross 0.1 0.2 0.3\nhaiyan 0.5 0.6\n";
    std::ofstream(dir / "empty.txt") << "";
  }
  SemanticVectors one = load_semantic_vectors(dir / "one.txt", 3);
  REQUIRE(one.size() == 1);
  CHECK(one.at("red_cross") == std::vector<double>{0.1, 0.2, 0.3});
  CHECK_THROWS_AS(load_semantic_vectors(dir / "wide.txt", 3), DataError);
  CHECK_THROWS_AS(load_semantic_vectors(dir / "bad.txt", 3), DataError);
  try {
    load_semantic_vectors(dir / "short.txt", 3);
    FAIL("expected a dimension error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(load_semantic_vectors(dir / "empty.txt", 3).empty());

  write_semantic_vectors(dir / "out.txt", one, 3);
  CHECK(load_semantic_vectors(dir / "out.txt", 3) == one);
}

TEST_CASE("merge_tables") {
  std::vector<TokenSeq> corpus(10, words({"typhoon", "haiyan", "help", "safe"}));
  SkipgramConfig c;
  c.dim = 4;
  c.min_count = 1;
  c.epochs = 1;
  EmbeddingTable base = train_skipgram(corpus, c).table;

  EmbeddingTable same = merge_tables(base, {});
  CHECK(values(same.vectors) == values(base.vectors));
  CHECK(same.vocab.tokens() == base.vocab.tokens());

  SemanticVectors sem = {{"haiyan", {1, 2, 3, 4}}, {"red_cross", {-1, 0, 1, 0.5}}};
  EmbeddingTable merged = merge_tables(base, sem);
  CHECK(merged.rows() == base.rows() + 1);
  CHECK(row(merged, "haiyan") == sem["haiyan"]);
  CHECK(row(merged, "red_cross") == sem["red_cross"]);
  for (const char* w : {"typhoon", "help", "safe"}) CHECK(row(merged, w) == row(base, w));
  const auto frozen = merged.frozen_rows();
  CHECK(frozen[0]);
  CHECK(frozen[merged.vocab.lookup("haiyan")]);
  CHECK(frozen[merged.vocab.lookup("red_cross")]);
  CHECK_FALSE(frozen[merged.vocab.lookup("help")]);

  CHECK_THROWS(merge_tables(base, {{"x", {1, 2}}}));
}

TEST_CASE("lookup_sequence") {
  EmbeddingTable t;
  t.vocab.add("a");
  t.vectors = Tensor::from({2, 3}, {0, 0, 0, 1, 2, 3});
  t.entity_marks = {false, false};

  TokenSeq pads = pad_or_truncate(TokenSeq{}, 4);
  Tensor m = lookup_sequence(t, pads);
  CHECK(m.shape() == Shape{4, 3});
  for (double v : m.data()) CHECK(v == 0.0);

  TokenSeq s = pad_or_truncate(words({"a"}), 2);
  CHECK(values(lookup_sequence(t, s)) == std::vector<double>{1, 2, 3, 0, 0, 0});
  CHECK(values(lookup_sequence(t, words({"zzzz"}))) == std::vector<double>{0, 0, 0});
  CHECK(token_ids(t, words({"a", "zzzz"})) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("lookup_sequence gradient skips frozen rows") {
  Rng rng(6);
  EmbeddingTable t;
  t.vocab.add("a");
  t.vocab.add("b");
  t.vectors = typhoon::testing::random_tensor({3, 2}, rng);
  t.entity_marks = {false, false, true};
  TokenSeq s = words({"a", "b", "a"});
  Tensor w = typhoon::testing::random_tensor({3, 2}, rng);

  Tensor table = t.vectors;
  table.set_requires_grad(true);
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(ops::sum(ops::mul(lookup_sequence(t, s), w)));
  }
  CHECK(table.grad()[2 * 2] == 0.0);
  CHECK(table.grad()[2 * 2 + 1] == 0.0);
  CHECK(table.grad()[2] == doctest::Approx(w.at(0, 0) + w.at(2, 0)));

  t.entity_marks = {false, false, false};
  const Tensor params[] = {table};
  CHECK(gradient_check([&]() { return ops::sum(ops::mul(lookup_sequence(t, s), w)); },
                       params) <= 1e-4);
}

TEST_CASE("embedding table export round trip") {
  TempDir dir("emb_io");
  std::vector<TokenSeq> corpus(10, words({"typhoon", "haiyan", "help", "safe"}));
  SkipgramConfig c;
  c.dim = 5;
  c.min_count = 1;
  c.epochs = 1;
  EmbeddingTable t = merge_tables(train_skipgram(corpus, c).table, {{"red_cross", {1, 2, 3, 4, 5}}});
  save_embedding_table(dir / "e.txt", dir / "e.json", t, c);
  EmbeddingTable back = load_embedding_table(dir / "e.txt", dir / "e.json");
  CHECK(back.vocab.tokens() == t.vocab.tokens());
  CHECK(values(back.vectors) == values(t.vectors));
  CHECK(back.entity_marks == t.entity_marks);
}
