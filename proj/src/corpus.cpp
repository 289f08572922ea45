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

#include "bioret/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "bioret/error.hpp"
#include "jsonl.hpp"

namespace bioret {

using internal::json;

std::string Document::full_text() const {
  if (title.empty()) return abstract;
  if (abstract.empty()) return title;
  return title + " " + abstract;
}

UnitKind parse_unit_kind(std::string_view name) {
  if (name == "two-sent") return UnitKind::kTwoSent;
  if (name == "chunk128") return UnitKind::kChunk128;
  if (name == "chunk256") return UnitKind::kChunk256;
  if (name == "full-doc") return UnitKind::kFullDoc;
  if (name == "single-sent") return UnitKind::kSingleSent;
  throw ConfigError("unknown unit kind: " + std::string(name));
}

std::string_view unit_kind_name(UnitKind kind) {
  switch (kind) {
    case UnitKind::kTwoSent: return "two-sent";
    case UnitKind::kChunk128: return "chunk128";
    case UnitKind::kChunk256: return "chunk256";
    case UnitKind::kFullDoc: return "full-doc";
    case UnitKind::kSingleSent: return "single-sent";
  }
  throw ConfigError("unknown unit kind");
}

std::string make_segment_id(std::string_view doc_id, UnitKind kind, int ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", ordinal);
  return std::string(doc_id) + "::" + std::string(unit_kind_name(kind)) + "::" + buf;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  internal::for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
    Document d;
    d.id = internal::required_string(obj, "id", lineno);
    d.title = internal::required_string(obj, "title", lineno);
    d.abstract = internal::required_string(obj, "abstract", lineno);
    if (d.id.empty()) throw ParseError("empty document id", lineno);
    if (d.title.empty() && d.abstract.empty())
      throw ValidationError("document " + d.id + " has neither title nor abstract");
    if (!seen.insert(d.id).second) throw ValidationError("duplicate document id: " + d.id);
    docs.push_back(std::move(d));
  });
  return docs;
}

void write_corpus(const std::filesystem::path& path, std::span<const Document> docs) {
  auto out = internal::open_out(path);
  for (const auto& d : docs) {
    json obj = {{"id", d.id}, {"title", d.title}, {"abstract", d.abstract}};
    out << obj.dump() << '\n';
  }
}

namespace {

void push_segment(std::vector<Segment>& out, const Document& doc, UnitKind kind,
                  std::string text) {
  Segment s;
  s.doc_id = doc.id;
  s.unit_kind = kind;
  s.ordinal = 0;
  for (auto it = out.rbegin(); it != out.rend() && it->doc_id == doc.id; ++it) {
    s.ordinal = it->ordinal + 1;
    break;
  }
  s.segment_id = make_segment_id(doc.id, kind, s.ordinal);
  s.text = std::move(text);
  out.push_back(std::move(s));
}

// Greedy packing of consecutive whole sentences into chunks of at most
// `budget` tokens. A sentence longer than the budget forms its own chunk.
std::vector<std::string> pack_chunks(const std::vector<std::string>& sentences, int budget) {
  std::vector<std::string> chunks;
  std::vector<std::string> current;
  int used = 0;
  for (const auto& s : sentences) {
    int n = static_cast<int>(tokenize(s).size());
    if (!current.empty() && used + n > budget) {
      chunks.push_back(join(current, " "));
      current.clear();
      used = 0;
    }
    current.push_back(s);
    used += n;
  }
  if (!current.empty()) chunks.push_back(join(current, " "));
  return chunks;
}

}  // namespace

std::vector<Segment> segment_corpus(std::span<const Document> docs, const SegmentOptions& options) {
  static const SentenceSplitter kDefaultSplitter;
  const SentenceSplitter& splitter = options.splitter ? *options.splitter : kDefaultSplitter;
  int budget = options.token_budget;
  if (options.kind == UnitKind::kChunk128 || options.kind == UnitKind::kChunk256) {
    if (budget < 0) throw ConfigError("token budget must be positive");
    if (budget == 0) budget = options.kind == UnitKind::kChunk128 ? 128 : 256;
  }

  std::vector<Segment> out;
  for (const auto& doc : docs) {
    if (options.kind == UnitKind::kFullDoc) {
      push_segment(out, doc, options.kind, doc.full_text());
      continue;
    }
    std::vector<std::string> sentences = splitter.split(doc.abstract);
    if (options.include_title && !doc.title.empty()) {
      if (sentences.empty()) sentences.push_back(doc.title);
      else sentences.front() = doc.title + " " + sentences.front();
    }
    if (sentences.empty()) continue;
    switch (options.kind) {
      case UnitKind::kTwoSent:
        if (sentences.size() == 1) {
          push_segment(out, doc, options.kind, sentences[0]);
        } else {
          for (std::size_t i = 0; i + 1 < sentences.size(); ++i)
            push_segment(out, doc, options.kind, sentences[i] + " " + sentences[i + 1]);
        }
        break;
      case UnitKind::kSingleSent:
        for (auto& s : sentences) push_segment(out, doc, options.kind, s);
        break;
      case UnitKind::kChunk128:
      case UnitKind::kChunk256:
        for (auto& c : pack_chunks(sentences, budget)) push_segment(out, doc, options.kind, std::move(c));
        break;
      case UnitKind::kFullDoc:
        break;
    }
  }
  return out;
}

void write_segments(const std::filesystem::path& path, std::span<const Segment> segments) {
  auto out = internal::open_out(path);
  for (const auto& s : segments) {
    json obj = {{"segment_id", s.segment_id},
                {"doc_id", s.doc_id},
                {"ordinal", s.ordinal},
                {"unit_kind", std::string(unit_kind_name(s.unit_kind))},
                {"text", s.text}};
    out << obj.dump() << '\n';
  }
}

std::vector<Segment> load_segments(const std::filesystem::path& path) {
  std::vector<Segment> segments;
  std::set<std::string> seen;
  internal::for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
    Segment s;
    s.segment_id = internal::required_string(obj, "segment_id", lineno);
    s.doc_id = internal::required_string(obj, "doc_id", lineno);
    s.text = internal::required_string(obj, "text", lineno);
    auto kind = internal::required_string(obj, "unit_kind", lineno);
    try {
      s.unit_kind = parse_unit_kind(kind);
    } catch (const ConfigError&) {
      throw ParseError("unknown unit_kind \"" + kind + "\"", lineno);
    }
    auto ord = obj.find("ordinal");
    if (ord == obj.end() || !ord->is_number_integer() || ord->get<int>() < 0)
      throw ParseError("\"ordinal\" must be a non-negative integer", lineno);
    s.ordinal = ord->get<int>();
    if (s.text.empty()) throw ValidationError("segment " + s.segment_id + " has empty text");
    if (!seen.insert(s.segment_id).second)
      throw ValidationError("duplicate segment id: " + s.segment_id);
    segments.push_back(std::move(s));
  });
  return segments;
}

CorpusStats compute_stats(std::span<const TextUnit> units) {
  if (units.empty()) throw ValidationError("cannot compute statistics of an empty collection");
  CorpusStats stats;
  long long total = 0;
  for (const auto& u : units) {
    TermCounts counts;
    auto toks = tokenize(u.text);
    for (auto& t : toks) ++counts[t];
    if (!stats.term_freqs.emplace(u.id, counts).second)
      throw ValidationError("duplicate unit id in statistics: " + u.id);
    for (const auto& [term, tf] : counts) ++stats.doc_freq[term];
    stats.doc_lengths[u.id] = static_cast<int>(toks.size());
    total += static_cast<long long>(toks.size());
  }
  stats.num_docs = static_cast<int>(units.size());
  stats.avg_doc_len = static_cast<double>(total) / stats.num_docs;
  return stats;
}

CorpusStats compute_stats(std::span<const Document> docs) {
  std::vector<TextUnit> units;
  units.reserve(docs.size());
  for (const auto& d : docs) units.push_back({d.id, d.full_text()});
  return compute_stats(std::span<const TextUnit>(units));
}

CorpusStats compute_stats(std::span<const Segment> segments) {
  std::vector<TextUnit> units;
  units.reserve(segments.size());
  for (const auto& s : segments) units.push_back({s.segment_id, s.text});
  return compute_stats(std::span<const TextUnit>(units));
}

void write_stats(const std::filesystem::path& path, const CorpusStats& stats) {
  json obj;
  obj["version"] = 1;
  obj["num_docs"] = stats.num_docs;
  obj["avg_doc_len"] = stats.avg_doc_len;
  obj["doc_freq"] = stats.doc_freq;
  obj["doc_lengths"] = stats.doc_lengths;
  obj["term_freqs"] = stats.term_freqs;
  auto out = internal::open_out(path);
  out << obj.dump() << '\n';
}

CorpusStats load_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  json obj;
  try {
    obj = json::parse(in);
    CorpusStats stats;
    stats.num_docs = obj.at("num_docs").get<int>();
    stats.avg_doc_len = obj.at("avg_doc_len").get<double>();
    stats.doc_freq = obj.at("doc_freq").get<std::map<std::string, int>>();
    stats.doc_lengths = obj.at("doc_lengths").get<std::map<std::string, int>>();
    stats.term_freqs = obj.at("term_freqs").get<std::map<std::string, TermCounts>>();
    return stats;
  } catch (const json::exception& e) {
    throw DataError("malformed statistics file " + path.string() + ": " + e.what());
  }
}

}  // namespace bioret
