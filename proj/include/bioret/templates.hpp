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

#ifndef BIORET_TEMPLATES_HPP_
#define BIORET_TEMPLATES_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioret/corpus.hpp"
#include "bioret/embedding.hpp"
#include "bioret/lexical.hpp"
#include "bioret/polydpr.hpp"
#include "bioret/pretrain.hpp"

namespace bioret {

inline constexpr std::string_view kBlank = "_";

/// Surface forms (lowercased, space-joined words) flagged verb or noun.
class EntityLexicon {
 public:
  EntityLexicon() = default;

  /// One entry per line: "surface<TAB>verb" or "surface<TAB>noun".
  static EntityLexicon load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// The surface is normalized through the shared tokenizer.
  void add(std::string_view surface, bool is_verb = false);
  std::optional<bool> lookup(std::string_view normalized) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t max_words() const { return max_words_; }
  const std::map<std::string, bool, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, bool, std::less<>> entries_;
  std::size_t max_words_ = 0;
};

struct EntitySpan {
  std::size_t first_token = 0;  // word index, inclusive
  std::size_t last_token = 0;   // word index, exclusive
  std::size_t begin = 0;        // byte offsets into the tagged text
  std::size_t end = 0;
  std::string surface;
  std::string norm;
  bool from_lexicon = false;
  bool is_verb = false;

  std::size_t num_words() const { return last_token - first_token; }
};

/// Longest-match lexicon spans plus two heuristics: runs of two or more
/// capitalized words (never including the first word or question words) and
/// words mixing digits and letters. Overlaps are resolved longest-first,
/// then leftmost-first; the result is in text order.
std::vector<EntitySpan> tag_entities(std::string_view text, const EntityLexicon& lexicon);

/// Closed list of common verbs treated as verbs even without a lexicon flag.
bool is_stop_verb(std::string_view normalized);

/// Question-level document frequency of word n-grams (n <= 8): the number
/// of questions containing the phrase as a contiguous word sequence.
class PhraseFrequency {
 public:
  static inline constexpr std::size_t kMaxWords = 8;

  static PhraseFrequency build(std::span<const std::string> questions);
  int df(std::string_view normalized_phrase) const;
  std::size_t num_questions() const { return num_questions_; }

 private:
  std::map<std::string, int, std::less<>> counts_;
  std::size_t num_questions_ = 0;
};

struct Template {
  std::string pattern;
  std::vector<std::string> source_question_ids;
  std::optional<int> cluster_id;
};

struct ExtractedTemplate {
  Template tmpl;
  std::vector<std::string> replaced;  // entity surfaces, in blank order
};

inline constexpr int kDefaultDfThreshold = 5;

/// Replaces every non-verb entity whose question frequency is below
/// `df_threshold` with "_". All other characters are kept verbatim.
ExtractedTemplate extract_template(std::string_view question, std::span<const EntitySpan> entities,
                                   const PhraseFrequency& freq, int df_threshold);

struct Question {
  std::string id;
  std::string text;
};

/// JSONL {"id", "text"} per line.
std::vector<Question> load_questions(const std::filesystem::path& path);
void write_questions(const std::filesystem::path& path, std::span<const Question> questions);

/// Extracts a template for every question and merges identical patterns
/// (first-seen order, source ids accumulated).
std::vector<Template> extract_templates(std::span<const Question> questions,
                                        const EntityLexicon& lexicon,
                                        int df_threshold = kDefaultDfThreshold);

/// Pattern words: punctuation-stripped lowercase words, with blank words
/// ("_", "_?", "(_)") reported as "_".
std::vector<std::string> pattern_tokens(std::string_view pattern);
std::size_t count_blanks(std::string_view pattern);

/// Optional idf weights for template similarity: 1 + ln((1 + N) / (1 + df))
/// over a template pool.
class TemplateIdf {
 public:
  static TemplateIdf build(std::span<const Template> pool);
  double weight(const std::string& term) const;

 private:
  std::map<std::string, double> idf_;
  double default_ = 1.0;
};

/// Cosine similarity of TF(-IDF) bags over pattern words with blanks
/// removed. Blank-only patterns score 0.
double template_similarity(const Template& a, const Template& b, const TemplateIdf* idf = nullptr);

struct TemplateCluster {
  int id = 0;
  std::vector<std::size_t> members;  // indices into the clustered list
};

inline constexpr double kDefaultClusterThreshold = 0.75;

/// Greedy single pass in input order: a template joins the first cluster
/// whose members all have similarity >= threshold with it, otherwise it
/// opens a new cluster. Throws ConfigError unless 0 < threshold <= 1.
std::vector<TemplateCluster> cluster_templates(std::span<const Template> templates,
                                               double threshold = kDefaultClusterThreshold,
                                               const TemplateIdf* idf = nullptr);

enum class Representative { kSmallest, kSecondSmallest };

Representative parse_representative(std::string_view name);  // "smallest" | "second"

/// Member with the smallest pattern length in words (or the second-smallest
/// when requested and available); ties by lexicographic pattern.
Template pick_representative(std::span<const Template> members,
                             Representative rule = Representative::kSmallest);

/// One representative per cluster, with cluster_id set and the cluster's
/// source question ids merged.
std::vector<Template> representative_pool(std::span<const Template> templates,
                                          std::span<const TemplateCluster> clusters,
                                          Representative rule = Representative::kSmallest);

void write_template_pool(const std::filesystem::path& path, std::span<const Template> pool);
std::vector<Template> load_template_pool(const std::filesystem::path& path);

/// Scores every template of a fixed pool against a context passage.
class TemplateScorer {
 public:
  virtual ~TemplateScorer() = default;
  virtual std::vector<double> score(std::string_view context) const = 0;
  virtual std::size_t pool_size() const = 0;
};

/// BM25 of the context words against template patterns (blanks removed).
class LexicalTemplateScorer final : public TemplateScorer {
 public:
  explicit LexicalTemplateScorer(std::span<const Template> pool, Bm25Params params = {});
  std::vector<double> score(std::string_view context) const override;
  std::size_t pool_size() const override { return size_; }

 private:
  std::size_t size_ = 0;
  std::optional<Bm25Index> index_;  // empty when no pattern has a word
};

/// Max-similarity of the projected context query vector against each
/// template's code vectors. Templates without words score -infinity.
class DenseTemplateScorer final : public TemplateScorer {
 public:
  DenseTemplateScorer(std::span<const Template> pool, const EmbeddingProvider& provider,
                      const PolyDprModel& model);
  std::vector<double> score(std::string_view context) const override;
  std::size_t pool_size() const override { return encoded_.size(); }

 private:
  const EmbeddingProvider& provider_;
  const PolyDprModel& model_;
  std::vector<std::optional<Matrix>> encoded_;
};

/// Top-n templates by score (ties by pool position), unique by pattern.
std::vector<Template> select_templates(std::string_view context, std::span<const Template> pool,
                                       const TemplateScorer& scorer, int n = 10);

/// Fills the blanks left to right with distinct non-verb context entities
/// ranked by (lexicon hit, word length, first occurrence); entities already
/// present in the template are not used. Returns nullopt when there are
/// more blanks than entities. The first character is capitalized and a
/// terminal '?' is ensured.
std::optional<std::string> fill_template(const Template& tmpl, std::string_view context,
                                         const EntityLexicon& lexicon);

struct GeneratedQuestion {
  std::string segment_id;
  std::string doc_id;
  std::string question;
  std::string pattern;
};

/// For each segment: select n templates, fill them, and drop failed fills
/// and duplicate questions within the segment.
std::vector<GeneratedQuestion> generate_questions(std::span<const Segment> segments,
                                                  std::span<const Template> pool,
                                                  const TemplateScorer& scorer,
                                                  const EntityLexicon& lexicon, int n_templates);

void write_generated_questions(const std::filesystem::path& path,
                               std::span<const GeneratedQuestion> questions);
std::vector<GeneratedQuestion> load_generated_questions(const std::filesystem::path& path);

/// TempQG pairs: (question, segment text) in the short setting, or
/// (question, source document text) when `docs` is given (long setting).
PairBatch tempqg_pairs(std::span<const GeneratedQuestion> questions,
                       std::span<const Segment> segments,
                       std::span<const Document> docs = {});

PairBatch build_tempqg_pairs(std::span<const Segment> segments, std::span<const Template> pool,
                             const TemplateScorer& scorer, const EntityLexicon& lexicon,
                             int n_templates, std::span<const Document> docs = {});

}  // namespace bioret

#endif  // BIORET_TEMPLATES_HPP_
