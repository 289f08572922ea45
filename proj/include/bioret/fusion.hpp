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

#ifndef BIORET_FUSION_HPP_
#define BIORET_FUSION_HPP_

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bioret/lexical.hpp"

namespace bioret {

/// Ranked hits for one query. Refs are unique and hits are kept in
/// hit_before order.
struct RunList {
  std::string query_id;
  std::vector<ScoredHit> hits;
  std::string tag;
};

using Run = std::map<std::string, RunList>;  // keyed by query id

/// Min-max normalization to [0, 1]; a list whose scores are all equal maps
/// to 1.0 everywhere. Order is preserved.
std::vector<ScoredHit> normalize_scores(std::span<const ScoredHit> hits);

/// Sum of the two normalized score lists over the union of candidates, a
/// candidate missing from one list contributing 0 for it. Scores lie in
/// [0, 2]. Throws ValidationError when the query ids differ.
RunList hybrid_fuse(const RunList& bm25_run, const RunList& dense_run, std::string tag = "hybrid");

/// Document score = max over its retrieved segments; the top_n documents by
/// (score desc, doc id asc). Throws ValidationError for unmapped segments.
RunList aggregate_documents(const RunList& segment_run,
                            const std::map<std::string, std::string>& segment_to_doc, int top_n = 10);

/// TREC 6-column run files: qid Q0 ref rank score tag.
void write_trec_run(const std::filesystem::path& path, const Run& run);
Run load_trec_run(const std::filesystem::path& path);

/// Sorts hits into canonical order and rejects duplicate refs.
void canonicalize(RunList& run);

}  // namespace bioret

#endif  // BIORET_FUSION_HPP_
