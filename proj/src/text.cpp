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


#include "typhoon/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "typhoon/errors.hpp"
#include "typhoon/timeutil.hpp"

namespace typhoon {

namespace {

bool is_ascii_punct(char c) {
  return static_cast<unsigned char>(c) < 128 &&
         std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

std::string_view strip_punct(std::string_view tok) {
  while (!tok.empty() && is_ascii_punct(tok.front())) tok.remove_prefix(1);
  while (!tok.empty() && is_ascii_punct(tok.back())) tok.remove_suffix(1);
  return tok;
}

bool has_non_ascii(std::string_view tok) {
  return std::any_of(tok.begin(), tok.end(),
                     [](char c) { return static_cast<unsigned char>(c) >= 128; });
}

// host[.label]*.tld[/path] with an alphabetic tld of at least two letters.
bool looks_like_domain(std::string_view tok) {
  tok = strip_punct(tok);
  const std::string_view host = tok.substr(0, tok.find('/'));
  const std::size_t dot = host.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return false;
  const std::string_view tld = host.substr(dot + 1);
  if (tld.size() < 2) return false;
  if (!std::all_of(tld.begin(), tld.end(),
                   [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
    return false;
  }
  return std::all_of(host.begin(), host.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.';
  });
}

bool is_url(std::string_view tok) {
  std::string_view t = tok;
  while (!t.empty() && (t.front() == '(' || t.front() == '[' || t.front() == '<' ||
                        t.front() == '"' || t.front() == '\'')) {
    t.remove_prefix(1);
  }
  const std::string l = lower(t);
  if (l.starts_with("http://") || l.starts_with("https://") || l.starts_with("www.")) {
    return true;
  }
  return looks_like_domain(t);
}

bool is_mention_or_tag(std::string_view tok) {
  while (!tok.empty() && is_ascii_punct(tok.front()) && tok.front() != '@' &&
         tok.front() != '#') {
    tok.remove_prefix(1);
  }
  return !tok.empty() && (tok.front() == '@' || tok.front() == '#');
}

std::string remove_link_annotations(std::string_view text) {
  std::string out;
  const std::string l = lower(text);
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t at = l.find("(link:", i);
    if (at == std::string::npos) break;
    const std::size_t close = l.find(')', at);
    out.append(text.substr(i, at - i));
    out.push_back(' ');
    i = close == std::string::npos ? text.size() : close + 1;
  }
  if (i < text.size()) out.append(text.substr(i));
  return out;
}

const char* kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::word: return "word";
    case TokenKind::entity: return "entity";
    case TokenKind::pad: return "pad";
  }
  return "word";
}

TokenKind kind_from(const std::string& s) {
  if (s == "word") return TokenKind::word;
  if (s == "entity") return TokenKind::entity;
  if (s == "pad") return TokenKind::pad;
  throw DataError("unknown token tag '" + s + "'");
}

}  // namespace

std::string clean_tweet(std::string_view text) {
  std::string spaced = remove_link_annotations(text);
  for (char& c : spaced) {
    if (static_cast<unsigned char>(c) < 32 || c == 127) c = ' ';
  }
  std::string out;
  for (std::string_view tok : split_ws(spaced)) {
    if (has_non_ascii(tok) || is_url(tok) || is_mention_or_tag(tok)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (std::string_view tok : split_ws(text)) {
    tok = strip_punct(tok);
    if (!tok.empty()) out.push_back(lower(tok));
  }
  return out;
}

Gazetteer::Gazetteer(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) add(p);
}

void Gazetteer::add(std::string_view phrase) {
  std::string spaced(phrase);
  std::replace(spaced.begin(), spaced.end(), '_', ' ');
  const auto words = tokenize(spaced);
  if (words.empty() || words.size() > kMaxWords) return;
  std::string joined;
  for (const auto& w : words) {
    if (!joined.empty()) joined.push_back(' ');
    joined += w;
  }
  longest_ = std::max(longest_, words.size());
  phrases_.insert(std::move(joined));
}

bool Gazetteer::contains(std::string_view spaced_phrase) const {
  return phrases_.contains(std::string(spaced_phrase));
}

TokenSeq recognize_entities(const std::vector<std::string>& words,
                            const Gazetteer& gazetteer) {
  TokenSeq seq;
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t matched = 0;
    const std::size_t max_len = std::min(gazetteer.longest(), words.size() - i);
    for (std::size_t len = max_len; len >= 1; --len) {
      std::string phrase = words[i];
      for (std::size_t j = 1; j < len; ++j) phrase += " " + words[i + j];
      if (gazetteer.contains(phrase)) {
        matched = len;
        break;
      }
    }
    if (matched > 0) {
      std::string joined = words[i];
      for (std::size_t j = 1; j < matched; ++j) joined += "_" + words[i + j];
      seq.tokens.push_back({std::move(joined), TokenKind::entity});
      i += matched;
    } else {
      seq.tokens.push_back({words[i], TokenKind::word});
      ++i;
    }
  }
  return seq;
}

TokenSeq preprocess_tweet(const RawTweet& tweet, const Gazetteer& gazetteer) {
  TokenSeq seq = recognize_entities(tokenize(clean_tweet(tweet.text)), gazetteer);
  seq.source_id = tweet.id;
  seq.timestamp = tweet.timestamp;
  seq.sentiment = tweet.sentiment;
  return seq;
}

TokenSeq pad_or_truncate(const TokenSeq& seq, std::size_t s) {
  if (s < 1) throw ContractError("pad_or_truncate: s must be >= 1");
  TokenSeq out = seq;
  if (out.tokens.size() > s) {
    out.tokens.resize(s);
  } else {
    while (out.tokens.size() < s) {
      out.tokens.push_back({std::string(kPadText), TokenKind::pad});
    }
  }
  return out;
}

std::size_t compute_fixed_length(const std::vector<TokenSeq>& corpus) {
  if (corpus.empty()) {
    throw ContractError("compute_fixed_length: empty corpus");
  }
  std::size_t total = 0;
  for (const auto& seq : corpus) total += seq.size();
  // Integer round-half-up of total / n.
  const std::size_t n = corpus.size();
  const std::size_t s = (2 * total + n) / (2 * n);
  return std::max<std::size_t>(s, 1);
}

std::vector<RawTweet> read_tweets_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tweets file " + path.string());
  std::vector<RawTweet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RawTweet t;
      t.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                    : j.at("id").dump();
      t.timestamp = parse_utc(j.at("timestamp").get<std::string>());
      t.text = j.at("text").get<std::string>();
      if (j.contains("sentiment") && !j.at("sentiment").is_null()) {
        const int label = j.at("sentiment").get<int>();
        if (label != 0 && label != 1) throw DataError("sentiment must be 0 or 1");
        t.sentiment = label;
      }
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_tweets_jsonl(const std::filesystem::path& path,
                        const std::vector<RawTweet>& tweets) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& t : tweets) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["timestamp"] = format_utc(t.timestamp);
    j["text"] = t.text;
    if (t.sentiment) j["sentiment"] = *t.sentiment;
    out << j.dump() << '\n';
  }
}

std::vector<TokenSeq> read_tokens_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open token file " + path.string());
  std::vector<TokenSeq> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TokenSeq seq;
      seq.source_id = j.at("id").get<std::string>();
      seq.timestamp = parse_utc(j.at("timestamp").get<std::string>());
      const auto& toks = j.at("tokens");
      const auto& tags = j.at("tags");
      if (toks.size() != tags.size()) throw DataError("tokens/tags length differ");
      for (std::size_t i = 0; i < toks.size(); ++i) {
        seq.tokens.push_back(
            {toks[i].get<std::string>(), kind_from(tags[i].get<std::string>())});
      }
      if (j.contains("sentiment") && !j.at("sentiment").is_null()) {
        seq.sentiment = j.at("sentiment").get<int>();
      }
      out.push_back(std::move(seq));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_tokens_jsonl(const std::filesystem::path& path,
                        const std::vector<TokenSeq>& seqs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& seq : seqs) {
    nlohmann::ordered_json j;
    j["id"] = seq.source_id;
    j["timestamp"] = format_utc(seq.timestamp);
    auto& toks = j["tokens"] = nlohmann::ordered_json::array();
    auto& tags = j["tags"] = nlohmann::ordered_json::array();
    for (const auto& t : seq.tokens) {
      toks.push_back(t.text);
      tags.push_back(kind_name(t.kind));
    }
    if (seq.sentiment) j["sentiment"] = *seq.sentiment;
    out << j.dump() << '\n';
  }
}

}  // namespace typhoon
