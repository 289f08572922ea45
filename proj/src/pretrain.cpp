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

#include "bioret/pretrain.hpp"

#include <algorithm>
#include <set>

#include "bioret/error.hpp"
#include "bioret/lexical.hpp"
#include "bioret/random.hpp"
#include "jsonl.hpp"

namespace bioret {

using internal::json;

std::string_view task_name(Task task) {
  switch (task) {
    case Task::kEtm: return "ETM";
    case Task::kRsm: return "RSM";
    case Task::kIct: return "ICT";
    case Task::kTempQG: return "TempQG";
    case Task::kSupervised: return "Supervised";
  }
  return "Supervised";
}

Task parse_task(std::string_view name) {
  auto n = to_lower(name);
  if (n == "etm") return Task::kEtm;
  if (n == "rsm") return Task::kRsm;
  if (n == "ict") return Task::kIct;
  if (n == "tempqg") return Task::kTempQG;
  if (n == "supervised") return Task::kSupervised;
  throw ConfigError("unknown task: " + std::string(name));
}

ExpandedTitle expand_title(const Document& doc, const CorpusStats& stats, int m) {
  ExpandedTitle et;
  et.title = doc.title;
  et.keywords = top_keywords(doc.abstract, stats, m);
  et.rendered = doc.title;
  for (const auto& k : et.keywords) {
    if (!et.rendered.empty()) et.rendered += ' ';
    et.rendered += k;
  }
  return et;
}

std::vector<std::string> reduce_sentence(std::string_view sentence, const CorpusStats& stats,
                                         int m) {
  if (m < 1) throw ConfigError("m must be >= 1");
  auto toks = tokenize(sentence);
  if (toks.empty()) return {};
  std::set<std::string> selected;
  for (auto& k : top_keywords(sentence, stats, m)) selected.insert(std::move(k));
  std::vector<std::string> out;
  std::set<std::string> emitted;
  for (const auto& t : toks)
    if (selected.count(t) && emitted.insert(t).second) out.push_back(t);
  return out;
}

PairBatch build_etm_pairs(std::span<const Document> docs, const CorpusStats& stats, int m) {
  if (m < 1) throw ConfigError("m must be >= 1");
  PairBatch batch;
  for (const auto& doc : docs) {
    if (tokenize(doc.abstract).empty()) {
      ++batch.skipped;
      batch.skipped_ids.push_back(doc.id);
      continue;
    }
    batch.pairs.push_back({expand_title(doc, stats, m).rendered, doc.abstract, Task::kEtm, doc.id});
  }
  return batch;
}

PairBatch build_rsm_pairs(std::span<const Document> docs, const CorpusStats& stats, int m,
                          int title_keywords, const SentenceSplitter* splitter) {
  if (m < 1 || title_keywords < 1) throw ConfigError("m must be >= 1");
  static const SentenceSplitter kDefault;
  const SentenceSplitter& split = splitter ? *splitter : kDefault;
  PairBatch batch;
  for (const auto& doc : docs) {
    auto sentences = split.split(doc.abstract);
    if (sentences.empty()) continue;
    const auto title = expand_title(doc, stats, title_keywords).rendered;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      auto reduced = reduce_sentence(sentences[i], stats, m);
      if (reduced.empty() || title.empty()) {
        ++batch.skipped;
        batch.skipped_ids.push_back(doc.id + "#" + std::to_string(i));
        continue;
      }
      batch.pairs.push_back({join(reduced, " "), title, Task::kRsm, doc.id});
    }
  }
  return batch;
}

PairBatch build_ict_pairs(std::span<const Document> docs, std::uint64_t seed,
                          const SentenceSplitter* splitter) {
  static const SentenceSplitter kDefault;
  const SentenceSplitter& split = splitter ? *splitter : kDefault;
  PairBatch batch;
  for (const auto& doc : docs) {
    auto sentences = split.split(doc.abstract);
    if (sentences.size() < 2) {
      ++batch.skipped;
      batch.skipped_ids.push_back(doc.id);
      continue;
    }
    Rng rng(seed, doc.id);
    const auto pick = static_cast<std::size_t>(rng.uniform_index(sentences.size()));
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < sentences.size(); ++i)
      if (i != pick) rest.push_back(sentences[i]);
    batch.pairs.push_back({sentences[pick], join(rest, " "), Task::kIct, doc.id});
  }
  return batch;
}

void write_pairs(const std::filesystem::path& path, std::span<const TrainingPair> pairs) {
  auto out = internal::open_out(path);
  for (const auto& p : pairs) {
    json obj = {{"query", p.query_text},
                {"positive", p.positive_text},
                {"task", std::string(task_name(p.task))},
                {"source_doc_id", p.source_doc_id}};
    out << obj.dump() << '\n';
  }
}

std::vector<TrainingPair> load_pairs(const std::filesystem::path& path) {
  std::vector<TrainingPair> pairs;
  internal::for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
    TrainingPair p;
    p.query_text = internal::required_string(obj, "query", lineno);
    p.positive_text = internal::required_string(obj, "positive", lineno);
    auto task = internal::required_string(obj, "task", lineno);
    try {
      p.task = parse_task(task);
    } catch (const ConfigError&) {
      throw ParseError("unknown task \"" + task + "\"", lineno);
    }
    p.source_doc_id = obj.value("source_doc_id", "");
    if (p.query_text.empty() || p.positive_text.empty())
      throw ParseError("training pair texts must be non-empty", lineno);
    pairs.push_back(std::move(p));
  });
  return pairs;
}

}  // namespace bioret
