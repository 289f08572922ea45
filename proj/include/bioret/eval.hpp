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

#ifndef BIORET_EVAL_HPP_
#define BIORET_EVAL_HPP_

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bioret/fusion.hpp"

namespace bioret {

using Qrels = std::map<std::string, std::set<std::string>>;

/// TSV "query_id<TAB>doc_id" per line.
Qrels load_qrels(const std::filesystem::path& path);
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);

/// Cutoff average precision:
///   AP = (sum over ranks r <= cutoff holding a relevant doc of precision@r)
///        / min(|relevant|, cutoff)
/// A doc repeated in the ranking counts once. Empty `relevant` gives 0.
double average_precision(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                         int cutoff = 10);

/// |top-cutoff ∩ relevant| / |relevant| (0 for an empty relevant set).
double recall_at(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                 int cutoff = 10);

struct QueryEval {
  std::string query_id;
  double average_precision = 0.0;
  double recall = 0.0;
  int relevant = 0;
  int relevant_retrieved = 0;
  bool in_run = false;
};

struct EvalReport {
  double map = 0.0;
  double recall = 0.0;
  int cutoff = 10;
  std::vector<QueryEval> per_query;
  std::vector<std::string> skipped;  // qrels queries with no relevant docs
};

/// Means over every qrels query with a non-empty relevant set; a query the
/// run does not cover contributes 0 to both means.
EvalReport evaluate_run(const Run& run, const Qrels& qrels, int cutoff = 10);

void write_eval_report(const std::filesystem::path& path, const EvalReport& report,
                       const std::string& manifest_json = "");

}  // namespace bioret

#endif  // BIORET_EVAL_HPP_
