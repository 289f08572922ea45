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

#ifndef BIORET_PRETRAIN_HPP_
#define BIORET_PRETRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioret/corpus.hpp"

namespace bioret {

enum class Task { kEtm, kRsm, kIct, kTempQG, kSupervised };

std::string_view task_name(Task task);  // "ETM", "RSM", ...
Task parse_task(std::string_view name);  // case-insensitive

struct TrainingPair {
  std::string query_text;
  std::string positive_text;
  Task task = Task::kSupervised;
  std::string source_doc_id;
};

// Title followed by the top-m TF-IDF keywords of the abstract.
struct ExpandedTitle {
  std::string title;
  std::vector<std::string> keywords;
  std::string rendered;
};

ExpandedTitle expand_title(const Document& doc, const CorpusStats& stats, int m);

/// The top-m TF-IDF words of `sentence`, kept in sentence order. A selected
/// term that occurs several times contributes only its first occurrence.
std::vector<std::string> reduce_sentence(std::string_view sentence, const CorpusStats& stats,
                                         int m);

struct PairBatch {
  std::vector<TrainingPair> pairs;
  int skipped = 0;
  std::vector<std::string> skipped_ids;  // doc ids (ETM/ICT) or "doc#sentence" (RSM)
};

inline constexpr int kDefaultEtmKeywords = 10;
inline constexpr int kDefaultRsmWords = 8;

/// Expanded Title Mapping: query = expanded title, positive = abstract.
/// Documents with an empty abstract are skipped.
PairBatch build_etm_pairs(std::span<const Document> docs, const CorpusStats& stats,
                          int m = kDefaultEtmKeywords);

/// Reduced Sentence Mapping: one pair per abstract sentence, query = the
/// reduced sentence, positive = the document's expanded title.
PairBatch build_rsm_pairs(std::span<const Document> docs, const CorpusStats& stats,
                          int m = kDefaultRsmWords, int title_keywords = kDefaultEtmKeywords,
                          const SentenceSplitter* splitter = nullptr);

/// Inverse Cloze Task: a uniformly drawn sentence is the query and the
/// remaining sentences (in order) are the positive. The draw for each
/// document uses Rng(seed, doc.id), so it does not depend on corpus order.
PairBatch build_ict_pairs(std::span<const Document> docs, std::uint64_t seed,
                          const SentenceSplitter* splitter = nullptr);

void write_pairs(const std::filesystem::path& path, std::span<const TrainingPair> pairs);
std::vector<TrainingPair> load_pairs(const std::filesystem::path& path);

}  // namespace bioret

#endif  // BIORET_PRETRAIN_HPP_
