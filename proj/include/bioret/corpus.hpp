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

#ifndef BIORET_CORPUS_HPP_
#define BIORET_CORPUS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioret/text.hpp"

namespace bioret {

struct Document {
  std::string id;
  std::string title;
  std::string abstract;

  /// "title abstract", skipping whichever part is empty.
  std::string full_text() const;
};

enum class UnitKind { kTwoSent, kChunk128, kChunk256, kFullDoc, kSingleSent };

/// Accepts "two-sent", "chunk128", "chunk256", "full-doc", "single-sent".
UnitKind parse_unit_kind(std::string_view name);
std::string_view unit_kind_name(UnitKind kind);

struct Segment {
  std::string segment_id;
  std::string doc_id;
  std::string text;
  UnitKind unit_kind = UnitKind::kTwoSent;
  int ordinal = 0;
};

struct SegmentOptions {
  UnitKind kind = UnitKind::kTwoSent;
  // Whitespace-token budget for chunk kinds; 0 selects 128 / 256.
  int token_budget = 0;
  // Prepend the title to the first segment of non-FullDoc units.
  bool include_title = false;
  const SentenceSplitter* splitter = nullptr;  // nullptr: default guard list
};

/// Reads a JSON Lines corpus ({"id","title","abstract"} per line). Blank
/// lines are skipped. Throws ParseError (with the 1-based line number) on
/// malformed lines and ValidationError on duplicate ids or empty documents.
std::vector<Document> load_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const Document> docs);

std::vector<Segment> segment_corpus(std::span<const Document> docs,
                                    const SegmentOptions& options = {});

/// Segment ids look like "<doc_id>::<kind>::<ordinal, zero-padded to 3>".
std::string make_segment_id(std::string_view doc_id, UnitKind kind, int ordinal);

void write_segments(const std::filesystem::path& path, std::span<const Segment> segments);
std::vector<Segment> load_segments(const std::filesystem::path& path);

using TermCounts = std::map<std::string, int>;

struct CorpusStats {
  int num_docs = 0;
  std::map<std::string, int> doc_freq;
  double avg_doc_len = 0.0;
  // Keyed by unit id so the statistics do not depend on input order.
  std::map<std::string, TermCounts> term_freqs;
  std::map<std::string, int> doc_lengths;

  int df(const std::string& term) const {
    auto it = doc_freq.find(term);
    return it == doc_freq.end() ? 0 : it->second;
  }
};

struct TextUnit {
  std::string id;
  std::string text;
};

/// Throws ValidationError on an empty collection or duplicate unit ids.
CorpusStats compute_stats(std::span<const TextUnit> units);
CorpusStats compute_stats(std::span<const Document> docs);
CorpusStats compute_stats(std::span<const Segment> segments);

void write_stats(const std::filesystem::path& path, const CorpusStats& stats);
CorpusStats load_stats(const std::filesystem::path& path);

}  // namespace bioret

#endif  // BIORET_CORPUS_HPP_
