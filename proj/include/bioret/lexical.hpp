// Copyright 2026 The bioret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BIORET_LEXICAL_HPP_
#define BIORET_LEXICAL_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioret/corpus.hpp"

namespace bioret {

struct ScoredHit {
  std::string ref;
  double score = 0.0;

  bool operator==(const ScoredHit&) const = default;
};

/// Ranking order used everywhere: score descending, then ref ascending.
inline bool hit_before(const ScoredHit& a, const ScoredHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.ref < b.ref;
}

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;
};

struct Posting {
  std::uint32_t unit = 0;  // position in Bm25Index::refs()
  int tf = 0;
};

/// Lucene-style BM25 over an immutable inverted index:
///
///   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
///   score(q, s) = sum over unique t in q that occur in s of
///                 idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg_len))
class Bm25Index {
 public:
  static inline constexpr int kFormatVersion = 1;

  /// Throws ValidationError on an empty input or duplicate refs and
  /// ConfigError when k1 < 0 or b is outside [0, 1].
  static Bm25Index build(std::span<const TextUnit> units, Bm25Params params = {});
  static Bm25Index build(std::span<const Segment> segments, Bm25Params params = {});

  double idf(const std::string& term) const;
  int df(const std::string& term) const;

  /// Throws LookupError if `ref` is not indexed.
  double score(std::span<const std::string> query_terms, std::string_view ref) const;

  /// Hits with score > 0, ordered by hit_before, at most top_k of them.
  std::vector<ScoredHit> search(std::string_view query, int top_k) const;
  std::vector<ScoredHit> search_terms(std::span<const std::string> query_terms, int top_k) const;

  /// Deterministic JSON encoding (identical input -> identical bytes).
  std::string serialize() const;
  static Bm25Index deserialize(std::string_view data);
  void save(const std::filesystem::path& path) const;
  static Bm25Index load(const std::filesystem::path& path);

  const Bm25Params& params() const { return params_; }
  std::size_t num_segments() const { return refs_.size(); }
  double avg_len() const { return avg_len_; }
  const std::vector<std::string>& refs() const { return refs_; }
  const std::vector<int>& lengths() const { return lengths_; }
  std::span<const Posting> postings(const std::string& term) const;

 private:
  double term_score(double idf, int tf, int len) const;
  std::vector<std::string> unique_terms(std::span<const std::string> terms) const;

  Bm25Params params_;
  std::vector<std::string> refs_;  // sorted
  std::vector<int> lengths_;
  double avg_len_ = 0.0;
  std::map<std::string, std::vector<Posting>> postings_;
};

struct TermWeight {
  std::string term;
  double weight = 0.0;
};

/// raw(t) = tf_text(t) * ln(N / (1 + df(t))), clamped at 0, then normalized
/// to sum to one. Terms are returned in order of first occurrence. If every
/// raw weight is zero all weights stay zero. Throws ValidationError when the
/// text has no tokens.
std::vector<TermWeight> tfidf_weights(std::string_view text, const CorpusStats& stats);

/// The m highest-weighted distinct terms of `text`; ties keep first
/// occurrence order. Fewer than m distinct terms returns them all.
std::vector<std::string> top_keywords(std::string_view text, const CorpusStats& stats, int m);

}  // namespace bioret

#endif  // BIORET_LEXICAL_HPP_
