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

#ifndef BIORET_TEXT_HPP_
#define BIORET_TEXT_HPP_

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bioret {

// A whitespace-delimited word with leading/trailing punctuation stripped.
// [begin, end) are byte offsets of the stripped word in the source text.
struct WordToken {
  std::string surface;  // original case
  std::string norm;     // lowercased
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits on whitespace, strips leading/trailing ASCII punctuation and
/// drops words that become empty. Offsets refer to `text`.
std::vector<WordToken> word_tokens(std::string_view text);

/// Lowercased, punctuation-stripped whitespace tokens. This is the single
/// tokenizer used for statistics, BM25, TF-IDF and token budgets.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Rule-based sentence splitter. A sentence ends at '.', '?' or '!' when the
/// terminator is followed by whitespace and an uppercase letter, or by the
/// end of text. A '.' ending a word listed in the abbreviation guard never
/// ends a sentence.
class SentenceSplitter {
 public:
  SentenceSplitter();  // built-in guard list
  explicit SentenceSplitter(std::set<std::string> abbreviations);

  /// One abbreviation per line, including its period ("e.g.", "E.").
  /// Blank lines and lines starting with '#' are ignored.
  static SentenceSplitter from_file(const std::filesystem::path& path);

  /// Trimmed sentences in text order; the text between consecutive
  /// sentences is whitespace only.
  std::vector<std::string> split(std::string_view text) const;

  const std::set<std::string>& abbreviations() const { return abbreviations_; }

 private:
  bool is_guarded(std::string_view text, std::size_t period_pos) const;

  std::set<std::string> abbreviations_;
};

/// Splits with the default guard list.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace bioret

#endif  // BIORET_TEXT_HPP_
