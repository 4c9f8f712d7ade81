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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace typhoon {

struct RawTweet {
  std::string id;
  std::int64_t timestamp = 0;  // UTC seconds
  std::string text;
  /// 0 = negative, 1 = positive, for labeled sentiment corpora.
  std::optional<int> sentiment;
};

enum class TokenKind { word, entity, pad };

struct Token {
  std::string text;
  TokenKind kind = TokenKind::word;

  bool operator==(const Token&) const = default;
};

inline constexpr std::string_view kPadText = "<pad>";

struct TokenSeq {
  std::vector<Token> tokens;
  std::string source_id;
  std::int64_t timestamp = 0;
  std::optional<int> sentiment;

  std::size_t size() const { return tokens.size(); }
};

/// Removes "(link: ...)" annotations, URLs (http/https/www prefixes and bare
/// domain.tld tokens), @usernames, #hashtags and any token holding non-ASCII
/// bytes, then collapses whitespace. Stop words are kept.
std::string clean_tweet(std::string_view text);

/// Whitespace split, strip leading/trailing ASCII punctuation, lower-case,
/// drop empties.
std::vector<std::string> tokenize(std::string_view text);

/// Lower-case entity phrases of 1-4 space-separated words.
class Gazetteer {
 public:
  static constexpr std::size_t kMaxWords = 4;

  Gazetteer() = default;
  /// Accepts phrases with spaces or underscores between words.
  explicit Gazetteer(const std::vector<std::string>& phrases);

  void add(std::string_view phrase);
  bool contains(std::string_view spaced_phrase) const;
  bool empty() const { return phrases_.empty(); }
  std::size_t size() const { return phrases_.size(); }
  std::size_t longest() const { return longest_; }

 private:
  std::unordered_set<std::string> phrases_;
  std::size_t longest_ = 0;
};

/// Greedy left-to-right longest match: at each position the longest phrase
/// found in the gazetteer collapses into one entity token (words joined by
/// '_'); other words pass through unchanged.
TokenSeq recognize_entities(const std::vector<std::string>& words,
                            const Gazetteer& gazetteer);

/// clean -> tokenize -> recognize, carrying id/timestamp/sentiment over.
TokenSeq preprocess_tweet(const RawTweet& tweet, const Gazetteer& gazetteer);

/// Keeps the first s tokens, or right-pads with PAD tokens up to s.
TokenSeq pad_or_truncate(const TokenSeq& seq, std::size_t s);

/// Round-half-up of the mean token count, at least 1.
std::size_t compute_fixed_length(const std::vector<TokenSeq>& corpus);

// JSON-lines I/O. Tweets: {"id", "timestamp" (ISO-8601 UTC), "text"[,
// "sentiment"]}. Token files: {"id", "timestamp", "tokens": [...],
// "tags": ["word"|"entity"|"pad", ...][, "sentiment"]}.
std::vector<RawTweet> read_tweets_jsonl(const std::filesystem::path& path);
void write_tweets_jsonl(const std::filesystem::path& path,
                        const std::vector<RawTweet>& tweets);
std::vector<TokenSeq> read_tokens_jsonl(const std::filesystem::path& path);
void write_tokens_jsonl(const std::filesystem::path& path,
                        const std::vector<TokenSeq>& seqs);

}  // namespace typhoon
