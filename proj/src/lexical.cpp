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

#include "bioret/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bioret/error.hpp"
#include "jsonl.hpp"

namespace bioret {

using internal::json;

Bm25Index Bm25Index::build(std::span<const TextUnit> units, Bm25Params params) {
  if (units.empty()) throw ValidationError("cannot build a BM25 index without segments");
  if (!(params.k1 >= 0.0)) throw ConfigError("BM25 k1 must be >= 0");
  if (!(params.b >= 0.0 && params.b <= 1.0)) throw ConfigError("BM25 b must lie in [0, 1]");

  std::vector<std::size_t> order(units.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return units[a].id < units[b].id; });

  Bm25Index index;
  index.params_ = params;
  long long total = 0;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& unit = units[order[pos]];
    if (pos > 0 && unit.id == index.refs_.back())
      throw ValidationError("duplicate segment ref: " + unit.id);
    auto toks = tokenize(unit.text);
    TermCounts counts;
    for (auto& t : toks) ++counts[t];
    for (const auto& [term, tf] : counts)
      index.postings_[term].push_back({static_cast<std::uint32_t>(pos), tf});
    index.refs_.push_back(unit.id);
    index.lengths_.push_back(static_cast<int>(toks.size()));
    total += static_cast<long long>(toks.size());
  }
  index.avg_len_ = static_cast<double>(total) / static_cast<double>(units.size());
  return index;
}

Bm25Index Bm25Index::build(std::span<const Segment> segments, Bm25Params params) {
  std::vector<TextUnit> units;
  units.reserve(segments.size());
  for (const auto& s : segments) units.push_back({s.segment_id, s.text});
  return build(std::span<const TextUnit>(units), params);
}

int Bm25Index::df(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : static_cast<int>(it->second.size());
}

double Bm25Index::idf(const std::string& term) const {
  const double n = static_cast<double>(refs_.size());
  const double d = static_cast<double>(df(term));
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double Bm25Index::term_score(double idf, int tf, int len) const {
  // An all-empty corpus has avg_len 0; length normalization then degenerates to 1.
  const double rel = avg_len_ > 0.0 ? static_cast<double>(len) / avg_len_ : 1.0;
  const double norm = params_.k1 * (1.0 - params_.b + params_.b * rel);
  return idf * (tf * (params_.k1 + 1.0)) / (tf + norm);
}

std::vector<std::string> Bm25Index::unique_terms(std::span<const std::string> terms) const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& t : terms)
    if (seen.insert(t).second) out.push_back(t);
  return out;
}

std::span<const Posting> Bm25Index::postings(const std::string& term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return {};
  return it->second;
}

double Bm25Index::score(std::span<const std::string> query_terms, std::string_view ref) const {
  auto it = std::lower_bound(refs_.begin(), refs_.end(), ref);
  if (it == refs_.end() || *it != ref) throw LookupError("segment not indexed: " + std::string(ref));
  const auto unit = static_cast<std::uint32_t>(it - refs_.begin());
  double total = 0.0;
  for (const auto& term : unique_terms(query_terms)) {
    auto plist = postings(term);
    auto p = std::lower_bound(plist.begin(), plist.end(), unit,
                              [](const Posting& a, std::uint32_t u) { return a.unit < u; });
    if (p == plist.end() || p->unit != unit) continue;
    total += term_score(idf(term), p->tf, lengths_[unit]);
  }
  return total;
}

std::vector<ScoredHit> Bm25Index::search_terms(std::span<const std::string> query_terms,
                                               int top_k) const {
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  std::vector<double> acc(refs_.size(), 0.0);
  std::vector<bool> touched(refs_.size(), false);
  for (const auto& term : unique_terms(query_terms)) {
    const double w = idf(term);
    for (const auto& p : postings(term)) {
      acc[p.unit] += term_score(w, p.tf, lengths_[p.unit]);
      touched[p.unit] = true;
    }
  }
  std::vector<ScoredHit> hits;
  for (std::size_t i = 0; i < acc.size(); ++i)
    if (touched[i] && acc[i] > 0.0) hits.push_back({refs_[i], acc[i]});
  const auto k = std::min(hits.size(), static_cast<std::size_t>(top_k));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                    hit_before);
  hits.resize(k);
  return hits;
}

std::vector<ScoredHit> Bm25Index::search(std::string_view query, int top_k) const {
  auto terms = tokenize(query);
  return search_terms(terms, top_k);
}

std::string Bm25Index::serialize() const {
  json obj;
  obj["format"] = "bioret-bm25";
  obj["version"] = kFormatVersion;
  obj["k1"] = params_.k1;
  obj["b"] = params_.b;
  obj["refs"] = refs_;
  obj["lengths"] = lengths_;
  json post = json::object();
  for (const auto& [term, plist] : postings_) {
    json arr = json::array();
    for (const auto& p : plist) arr.push_back({p.unit, p.tf});
    post[term] = std::move(arr);
  }
  obj["postings"] = std::move(post);
  return obj.dump();
}

Bm25Index Bm25Index::deserialize(std::string_view data) {
  try {
    auto obj = json::parse(data);
    if (obj.value("format", "") != "bioret-bm25") throw DataError("not a BM25 index file");
    if (obj.at("version").get<int>() != kFormatVersion)
      throw DataError("unsupported BM25 index version");
    Bm25Index index;
    index.params_ = {obj.at("k1").get<double>(), obj.at("b").get<double>()};
    index.refs_ = obj.at("refs").get<std::vector<std::string>>();
    index.lengths_ = obj.at("lengths").get<std::vector<int>>();
    if (index.refs_.empty() || index.refs_.size() != index.lengths_.size())
      throw DataError("inconsistent BM25 index");
    long long total = 0;
    for (int len : index.lengths_) total += len;
    index.avg_len_ = static_cast<double>(total) / static_cast<double>(index.refs_.size());
    for (const auto& [term, arr] : obj.at("postings").items()) {
      auto& plist = index.postings_[term];
      for (const auto& p : arr) {
        Posting posting{p.at(0).get<std::uint32_t>(), p.at(1).get<int>()};
        if (posting.unit >= index.refs_.size()) throw DataError("posting references unknown unit");
        plist.push_back(posting);
      }
    }
    return index;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed BM25 index: ") + e.what());
  }
}

void Bm25Index::save(const std::filesystem::path& path) const {
  auto out = internal::open_out(path);
  out << serialize() << '\n';
}

Bm25Index Bm25Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

std::vector<TermWeight> tfidf_weights(std::string_view text, const CorpusStats& stats) {
  auto toks = tokenize(text);
  if (toks.empty()) throw ValidationError("text has no tokens");
  std::vector<TermWeight> weights;
  std::map<std::string, std::size_t> slot;
  for (const auto& t : toks) {
    auto [it, inserted] = slot.emplace(t, weights.size());
    if (inserted) weights.push_back({t, 0.0});
    weights[it->second].weight += 1.0;  // term frequency for now
  }
  const double n = static_cast<double>(stats.num_docs);
  double sum = 0.0;
  for (auto& w : weights) {
    const double raw = n > 0 ? w.weight * std::log(n / (1.0 + stats.df(w.term))) : 0.0;
    w.weight = raw > 0.0 ? raw : 0.0;
    sum += w.weight;
  }
  if (sum > 0.0)
    for (auto& w : weights) w.weight /= sum;
  return weights;
}

std::vector<std::string> top_keywords(std::string_view text, const CorpusStats& stats, int m) {
  if (m < 1) throw ConfigError("m must be >= 1");
  if (tokenize(text).empty()) return {};
  auto weights = tfidf_weights(text, stats);
  std::stable_sort(weights.begin(), weights.end(),
                   [](const TermWeight& a, const TermWeight& b) { return a.weight > b.weight; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < weights.size() && i < static_cast<std::size_t>(m); ++i)
    out.push_back(weights[i].term);
  return out;
}

}  // namespace bioret
