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

#include "bioret/text.hpp"

#include <cctype>
#include <fstream>

#include "bioret/error.hpp"

namespace bioret {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

const std::set<std::string>& default_abbreviations() {
  static const std::set<std::string> kAbbrev = {
      "e.g.", "i.e.", "al.",  "etc.", "vs.", "Dr.",  "Mr.",  "Mrs.", "Ms.",
      "Fig.", "Figs.", "Eq.", "No.",  "approx.", "ca.", "cf.", "Ref.", "St.",
      "A.",   "B.",   "C.",   "D.",   "E.",  "F.",   "G.",   "H.",   "I.",
      "J.",   "K.",   "L.",   "M.",   "N.",  "O.",   "P.",   "Q.",   "R.",
      "S.",   "T.",   "U.",   "V.",   "W.",  "X.",   "Y.",   "Z."};
  return kAbbrev;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<WordToken> word_tokens(std::string_view text) {
  std::vector<WordToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    std::size_t b = start, e = i;
    while (b < e && is_punct(text[b])) ++b;
    while (e > b && is_punct(text[e - 1])) --e;
    if (b == e) continue;
    WordToken tok;
    tok.surface = std::string(text.substr(b, e - b));
    tok.norm = to_lower(tok.surface);
    tok.begin = b;
    tok.end = e;
    out.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : word_tokens(text)) out.push_back(std::move(t.norm));
  return out;
}

SentenceSplitter::SentenceSplitter() : abbreviations_(default_abbreviations()) {}

SentenceSplitter::SentenceSplitter(std::set<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {}

SentenceSplitter SentenceSplitter::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open abbreviation file: " + path.string());
  std::set<std::string> abbrev;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    abbrev.insert(t);
  }
  return SentenceSplitter(std::move(abbrev));
}

bool SentenceSplitter::is_guarded(std::string_view text, std::size_t period_pos) const {
  std::size_t b = period_pos;
  while (b > 0 && !is_space(text[b - 1])) --b;
  // Leading brackets/quotes do not belong to the abbreviation.
  while (b < period_pos && (text[b] == '(' || text[b] == '[' || text[b] == '"')) ++b;
  return abbreviations_.count(std::string(text.substr(b, period_pos + 1 - b))) > 0;
}

std::vector<std::string> SentenceSplitter::split(std::string_view text) const {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    if (j < text.size() && !is_space(text[j])) continue;
    while (j < text.size() && is_space(text[j])) ++j;
    bool boundary = j >= text.size() || is_upper(text[j]);
    if (!boundary) continue;
    if (c == '.' && is_guarded(text, i)) continue;
    auto s = trim(text.substr(start, i + 1 - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = i + 1;
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  static const SentenceSplitter kDefault;
  return kDefault.split(text);
}

}  // namespace bioret
