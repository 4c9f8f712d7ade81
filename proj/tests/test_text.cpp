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

#include <cctype>
#include <fstream>

#include "test_util.hpp"
#include "typhoon/errors.hpp"
#include "typhoon/text.hpp"

using namespace typhoon;

namespace {

const char* kHaiyanTweet =
    "My heart goes out to all those affected by Typhoon Haiyan. You can help by "
    "donating to the Philippine RED CROSS here (link: http://www.redcross.org) "
    "redcross.org";

std::vector<std::string> texts(const TokenSeq& seq) {
  std::vector<std::string> out;
  for (const Token& t : seq.tokens) out.push_back(t.text);
  return out;
}

TokenSeq seq_of(std::size_t n) {
  TokenSeq s;
  for (std::size_t i = 0; i < n; ++i) s.tokens.push_back({"w" + std::to_string(i)});
  return s;
}

}  // namespace

TEST_CASE("clean_tweet") {
  const std::string cleaned = clean_tweet(kHaiyanTweet);
  CHECK(cleaned.find("redcross") == std::string::npos);
  CHECK(cleaned.find("link") == std::string::npos);
  CHECK(cleaned.find("http") == std::string::npos);
  CHECK(cleaned.rfind("here") == cleaned.size() - 4);

  CHECK(clean_tweet("@user hello #storm") == "hello");
  CHECK(clean_tweet("ça va typhoon") == "va typhoon");
  CHECK(clean_tweet("see www.example.com and https://t.co/x now") == "see and now");
  CHECK(clean_tweet("   ") == "");
  CHECK(clean_tweet("the storm is here") == "the storm is here");
}

TEST_CASE("tokenize") {
  const std::vector<std::string> expected = {
      "my", "heart", "goes", "out", "to", "all", "those", "affected", "by", "typhoon", "haiyan",
      "you", "can", "help", "by", "donating", "to", "the", "philippine", "red", "cross", "here"};
  CHECK(tokenize(clean_tweet(kHaiyanTweet)) == expected);
  CHECK(tokenize("").empty());
  CHECK(tokenize("Help! NOW.") == std::vector<std::string>{"help", "now"});
  CHECK(tokenize("... !!") .empty());
}

TEST_CASE("recognize_entities") {
  Gazetteer g({"red cross"});
  TokenSeq s = recognize_entities({"red", "cross"}, g);
  REQUIRE(s.size() == 1);
  CHECK(s.tokens[0] == Token{"red_cross", TokenKind::entity});

  TokenSeq plain = recognize_entities({"red", "cross"}, Gazetteer{});
  CHECK(texts(plain) == std::vector<std::string>{"red", "cross"});
  CHECK(plain.tokens[0].kind == TokenKind::word);

  Gazetteer g2({"red cross", "red"});
  TokenSeq s2 = recognize_entities({"red", "cross", "red"}, g2);
  REQUIRE(s2.size() == 2);
  CHECK(s2.tokens[0] == Token{"red_cross", TokenKind::entity});
  CHECK(s2.tokens[1] == Token{"red", TokenKind::entity});

  Gazetteer g3({"philippine_red_cross"});
  CHECK(g3.contains("philippine red cross"));
  TokenSeq s3 = recognize_entities({"the", "philippine", "red", "cross", "here"}, g3);
  CHECK(texts(s3) == std::vector<std::string>{"the", "philippine_red_cross", "here"});
}

TEST_CASE("entity recognition keeps token order") {
  Gazetteer g({"b c", "e"});
  TokenSeq s = recognize_entities({"a", "b", "c", "d", "e", "b"}, g);
  CHECK(texts(s) == std::vector<std::string>{"a", "b_c", "d", "e", "b"});
}

TEST_CASE("preprocess_tweet output is clean") {
  Gazetteer g({"typhoon haiyan", "red cross"});
  RawTweet t{"1", 100, std::string(kHaiyanTweet) + " @pagasa #yolanda", 1};
  TokenSeq s = preprocess_tweet(t, g);
  CHECK(s.source_id == "1");
  CHECK(s.timestamp == 100);
  CHECK(s.sentiment == 1);
  for (const Token& tok : s.tokens) {
    CHECK_FALSE(tok.text.empty());
    for (char c : tok.text) {
      CHECK_FALSE(std::isupper(static_cast<unsigned char>(c)));
      CHECK(c != '#');
      CHECK(c != '@');
    }
    CHECK(tok.text.find("http") == std::string::npos);
  }
  CHECK(texts(s)[9] == "typhoon_haiyan");
  CHECK(preprocess_tweet(t, g).tokens == s.tokens);
}

TEST_CASE("pad_or_truncate") {
  TokenSeq padded = pad_or_truncate(seq_of(3), 5);
  REQUIRE(padded.size() == 5);
  CHECK(padded.tokens[2].text == "w2");
  CHECK(padded.tokens[3].kind == TokenKind::pad);
  CHECK(padded.tokens[4].text == kPadText);

  TokenSeq cut = pad_or_truncate(seq_of(7), 5);
  CHECK(texts(cut) == texts(seq_of(5)));
  CHECK(texts(pad_or_truncate(seq_of(5), 5)) == texts(seq_of(5)));
  CHECK_THROWS_AS(pad_or_truncate(seq_of(2), 0), ContractError);
  for (std::size_t n = 0; n < 9; ++n) CHECK(pad_or_truncate(seq_of(n), 4).size() == 4);
}

TEST_CASE("compute_fixed_length") {
  CHECK(compute_fixed_length({seq_of(2), seq_of(4)}) == 3);
  CHECK(compute_fixed_length({seq_of(3), seq_of(3), seq_of(3)}) == 3);
  CHECK(compute_fixed_length({seq_of(1), seq_of(2), seq_of(2)}) == 2);
  CHECK(compute_fixed_length({seq_of(1), seq_of(2)}) == 2);
  CHECK(compute_fixed_length({seq_of(0)}) == 1);
  CHECK_THROWS_AS(compute_fixed_length({}), ContractError);
}

TEST_CASE("tweet and token JSON lines round trip") {
  typhoon::testing::TempDir dir("text");
  std::vector<RawTweet> tweets = {{"a", 1383782400, "hello world", std::nullopt},
                                  {"b", 1383786000, "stay safe", 0}};
  write_tweets_jsonl(dir / "t.jsonl", tweets);
  const auto back = read_tweets_jsonl(dir / "t.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "a");
  CHECK(back[0].timestamp == 1383782400);
  CHECK_FALSE(back[0].sentiment.has_value());
  CHECK(back[1].sentiment == 0);

  Gazetteer g({"stay safe"});
  std::vector<TokenSeq> seqs;
  for (const RawTweet& t : tweets) seqs.push_back(pad_or_truncate(preprocess_tweet(t, g), 3));
  write_tokens_jsonl(dir / "k.jsonl", seqs);
  const auto toks = read_tokens_jsonl(dir / "k.jsonl");
  REQUIRE(toks.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(toks[i].tokens == seqs[i].tokens);
    CHECK(toks[i].timestamp == seqs[i].timestamp);
    CHECK(toks[i].sentiment == seqs[i].sentiment);
  }
}

TEST_CASE("malformed tweet files are data errors") {
  typhoon::testing::TempDir dir("text_bad");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << "{\"id\": \"x\", \"timestamp\": \"yesterday\", \"text\": \"hi\"}\n";
  }
  CHECK_THROWS_AS(read_tweets_jsonl(dir / "bad.jsonl"), DataError);
  CHECK_THROWS_AS(read_tweets_jsonl(dir / "missing.jsonl"), DataError);
}
