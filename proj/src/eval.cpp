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

#include "bioret/eval.hpp"

#include <algorithm>
#include <fstream>

#include "bioret/error.hpp"
#include "jsonl.hpp"

namespace bioret {

using internal::json;

Qrels load_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError("expected query_id<TAB>doc_id", lineno);
    auto qid = trim(line.substr(0, tab)), doc = trim(line.substr(tab + 1));
    if (qid.empty() || doc.empty()) throw ParseError("empty query or document id", lineno);
    qrels[qid].insert(doc);
  }
  return qrels;
}

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
  auto out = internal::open_out(path);
  for (const auto& [qid, docs] : qrels)
    for (const auto& d : docs) out << qid << '\t' << d << '\n';
}

double average_precision(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                         int cutoff) {
  if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
  if (relevant.empty()) return 0.0;
  std::set<std::string> found;
  double sum = 0.0;
  const auto limit = std::min(ranked.size(), static_cast<std::size_t>(cutoff));
  for (std::size_t r = 0; r < limit; ++r) {
    if (relevant.count(ranked[r]) && found.insert(ranked[r]).second)
      sum += static_cast<double>(found.size()) / static_cast<double>(r + 1);
  }
  const auto denom = std::min(relevant.size(), static_cast<std::size_t>(cutoff));
  return sum / static_cast<double>(denom);
}

double recall_at(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                 int cutoff) {
  if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
  if (relevant.empty()) return 0.0;
  std::set<std::string> found;
  const auto limit = std::min(ranked.size(), static_cast<std::size_t>(cutoff));
  for (std::size_t r = 0; r < limit; ++r)
    if (relevant.count(ranked[r])) found.insert(ranked[r]);
  return static_cast<double>(found.size()) / static_cast<double>(relevant.size());
}

EvalReport evaluate_run(const Run& run, const Qrels& qrels, int cutoff) {
  if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
  EvalReport report;
  report.cutoff = cutoff;
  double ap_sum = 0.0, recall_sum = 0.0;
  for (const auto& [qid, relevant] : qrels) {
    if (relevant.empty()) {
      report.skipped.push_back(qid);
      continue;
    }
    QueryEval q;
    q.query_id = qid;
    q.relevant = static_cast<int>(relevant.size());
    auto it = run.find(qid);
    if (it != run.end()) {
      q.in_run = true;
      std::vector<std::string> ranked;
      for (const auto& h : it->second.hits) ranked.push_back(h.ref);
      q.average_precision = average_precision(ranked, relevant, cutoff);
      q.recall = recall_at(ranked, relevant, cutoff);
      const auto limit = std::min(ranked.size(), static_cast<std::size_t>(cutoff));
      std::set<std::string> hit(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(limit));
      for (const auto& d : relevant) q.relevant_retrieved += static_cast<int>(hit.count(d));
    }
    ap_sum += q.average_precision;
    recall_sum += q.recall;
    report.per_query.push_back(std::move(q));
  }
  if (!report.per_query.empty()) {
    report.map = ap_sum / static_cast<double>(report.per_query.size());
    report.recall = recall_sum / static_cast<double>(report.per_query.size());
  }
  return report;
}

void write_eval_report(const std::filesystem::path& path, const EvalReport& report,
                       const std::string& manifest_json) {
  json obj;
  obj["map"] = report.map;
  obj["recall"] = report.recall;
  obj["cutoff"] = report.cutoff;
  json rows = json::array();
  for (const auto& q : report.per_query)
    rows.push_back({{"query_id", q.query_id},
                    {"ap", q.average_precision},
                    {"recall", q.recall},
                    {"relevant", q.relevant},
                    {"relevant_retrieved", q.relevant_retrieved},
                    {"in_run", q.in_run}});
  obj["per_query"] = std::move(rows);
  obj["skipped"] = report.skipped;
  if (!manifest_json.empty()) obj["manifests"] = json::parse(manifest_json);
  auto out = internal::open_out(path);
  out << obj.dump(2) << '\n';
}

}  // namespace bioret
