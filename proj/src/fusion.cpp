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

#include "bioret/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bioret/error.hpp"
#include "jsonl.hpp"

namespace bioret {

std::vector<ScoredHit> normalize_scores(std::span<const ScoredHit> hits) {
  std::vector<ScoredHit> out(hits.begin(), hits.end());
  if (out.empty()) return out;
  auto [lo, hi] = std::minmax_element(out.begin(), out.end(),
                                      [](const ScoredHit& a, const ScoredHit& b) { return a.score < b.score; });
  const double mn = lo->score, mx = hi->score;
  for (auto& h : out) h.score = mx == mn ? 1.0 : (h.score - mn) / (mx - mn);
  return out;
}

void canonicalize(RunList& run) {
  std::sort(run.hits.begin(), run.hits.end(), hit_before);
  std::vector<std::string> refs;
  for (const auto& h : run.hits) refs.push_back(h.ref);
  std::sort(refs.begin(), refs.end());
  if (std::adjacent_find(refs.begin(), refs.end()) != refs.end())
    throw ValidationError("duplicate ref in run for query " + run.query_id);
}

RunList hybrid_fuse(const RunList& bm25_run, const RunList& dense_run, std::string tag) {
  if (bm25_run.query_id != dense_run.query_id)
    throw ValidationError("cannot fuse runs of different queries: " + bm25_run.query_id + " vs " +
                          dense_run.query_id);
  std::map<std::string, double> fused;
  for (const auto& h : normalize_scores(bm25_run.hits)) fused[h.ref] += h.score;
  for (const auto& h : normalize_scores(dense_run.hits)) fused[h.ref] += h.score;
  RunList out{bm25_run.query_id, {}, std::move(tag)};
  for (const auto& [ref, s] : fused) out.hits.push_back({ref, s});
  std::sort(out.hits.begin(), out.hits.end(), hit_before);
  return out;
}

RunList aggregate_documents(const RunList& segment_run,
                            const std::map<std::string, std::string>& segment_to_doc, int top_n) {
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  std::map<std::string, double> best;
  for (const auto& h : segment_run.hits) {
    auto it = segment_to_doc.find(h.ref);
    if (it == segment_to_doc.end()) throw ValidationError("segment without document: " + h.ref);
    auto [pos, inserted] = best.emplace(it->second, h.score);
    if (!inserted) pos->second = std::max(pos->second, h.score);
  }
  RunList out{segment_run.query_id, {}, segment_run.tag};
  for (const auto& [doc, s] : best) out.hits.push_back({doc, s});
  const auto k = std::min(out.hits.size(), static_cast<std::size_t>(top_n));
  std::partial_sort(out.hits.begin(), out.hits.begin() + static_cast<std::ptrdiff_t>(k), out.hits.end(),
                    hit_before);
  out.hits.resize(k);
  return out;
}

void write_trec_run(const std::filesystem::path& path, const Run& run) {
  auto out = internal::open_out(path);
  char buf[64];
  for (const auto& [qid, list] : run) {
    const std::string tag = list.tag.empty() ? "bioret" : list.tag;
    for (std::size_t r = 0; r < list.hits.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", list.hits[r].score);
      out << qid << " Q0 " << list.hits[r].ref << ' ' << (r + 1) << ' ' << buf << ' ' << tag << '\n';
    }
  }
}

Run load_trec_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Run run;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string qid, q0, ref, rank, score, tag, extra;
    if (!(fields >> qid >> q0 >> ref >> rank >> score >> tag) || (fields >> extra))
      throw ParseError("expected 6 whitespace-separated columns", lineno);
    if (rank.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("invalid rank \"" + rank + "\"", lineno);
    double s = 0.0;
    try {
      std::size_t used = 0;
      s = std::stod(score, &used);
      if (used != score.size() || !std::isfinite(s)) throw std::invalid_argument(score);
    } catch (const std::exception&) {
      throw ParseError("invalid score \"" + score + "\"", lineno);
    }
    auto& list = run[qid];
    list.query_id = qid;
    list.tag = tag;
    list.hits.push_back({ref, s});
  }
  for (auto& [qid, list] : run) canonicalize(list);
  return run;
}

}  // namespace bioret
