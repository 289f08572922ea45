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

#include "bioret/templates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "bioret/error.hpp"
#include "jsonl.hpp"

namespace bioret {

using internal::json;

namespace {

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool has_alpha(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

bool starts_upper(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

// Words that never start or extend a capitalized-run entity.
bool is_question_word(std::string_view w) {
  static const std::set<std::string, std::less<>> kWords = {
      "what", "which", "who", "whom", "whose", "when", "where", "why", "how", "is", "are",
      "was", "were", "does", "do", "did", "can", "could", "should", "would", "will", "may",
      "might", "has", "have", "had", "list", "name", "describe", "the", "a", "an", "in", "of"};
  return kWords.count(w) > 0;
}

}  // namespace

bool is_stop_verb(std::string_view w) {
  static const std::set<std::string, std::less<>> kVerbs = {
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do",
      "does", "did", "can", "could", "may", "might", "will", "would", "shall", "should",
      "must", "cause", "causes", "caused", "treat", "treats", "treated", "use", "used",
      "uses", "target", "targets", "targeted", "bind", "binds", "involve", "involved",
      "inhibit", "inhibits", "inhibited", "regulate", "regulates", "regulated", "encode",
      "encodes", "encoded", "associate", "associated", "affect", "affects", "affected"};
  return kVerbs.count(w) > 0;
}

EntityLexicon EntityLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon: " + path.string());
  EntityLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected surface<TAB>verb|noun", lineno);
    auto kind = trim(std::string_view(line).substr(tab + 1));
    if (kind != "verb" && kind != "noun") throw ParseError("entity kind must be verb or noun", lineno);
    if (tokenize(line.substr(0, tab)).empty()) throw ParseError("empty lexicon surface", lineno);
    lex.add(line.substr(0, tab), kind == "verb");
  }
  return lex;
}

void EntityLexicon::save(const std::filesystem::path& path) const {
  auto out = internal::open_out(path);
  for (const auto& [surface, verb] : entries_) out << surface << '\t' << (verb ? "verb" : "noun") << '\n';
}

void EntityLexicon::add(std::string_view surface, bool is_verb) {
  auto words = tokenize(surface);
  if (words.empty()) throw ValidationError("lexicon surface has no words");
  max_words_ = std::max(max_words_, words.size());
  entries_.insert_or_assign(join(words, " "), is_verb);
}

std::optional<bool> EntityLexicon::lookup(std::string_view normalized) const {
  auto it = entries_.find(normalized);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<EntitySpan> tag_entities(std::string_view text, const EntityLexicon& lexicon) {
  const auto words = word_tokens(text);
  const std::size_t n = words.size();
  struct Candidate {
    std::size_t first, last;
    bool lexicon;
    bool verb;
  };
  std::vector<Candidate> cands;

  auto phrase = [&](std::size_t first, std::size_t last) {
    std::string p;
    for (std::size_t i = first; i < last; ++i) {
      if (i > first) p += ' ';
      p += words[i].norm;
    }
    return p;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t longest = std::min(lexicon.max_words(), n - i);
    for (std::size_t len = longest; len >= 1; --len) {
      if (auto verb = lexicon.lookup(phrase(i, i + len))) {
        cands.push_back({i, i + len, true, *verb});
        break;
      }
    }
    if (has_digit(words[i].surface) && has_alpha(words[i].surface))
      cands.push_back({i, i + 1, false, false});
  }
  for (std::size_t i = 1; i < n;) {
    std::size_t j = i;
    while (j < n && starts_upper(words[j].surface) && !is_question_word(words[j].norm)) ++j;
    if (j - i >= 2) cands.push_back({i, j, false, false});
    i = j == i ? i + 1 : j;
  }

  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    const auto la = a.last - a.first, lb = b.last - b.first;
    if (la != lb) return la > lb;
    if (a.first != b.first) return a.first < b.first;
    return a.lexicon && !b.lexicon;
  });
  std::vector<bool> taken(n, false);
  std::vector<EntitySpan> spans;
  for (const auto& c : cands) {
    bool free = true;
    for (std::size_t i = c.first; i < c.last; ++i) free = free && !taken[i];
    if (!free) continue;
    for (std::size_t i = c.first; i < c.last; ++i) taken[i] = true;
    EntitySpan s;
    s.first_token = c.first;
    s.last_token = c.last;
    s.begin = words[c.first].begin;
    s.end = words[c.last - 1].end;
    s.surface = std::string(text.substr(s.begin, s.end - s.begin));
    s.norm = phrase(c.first, c.last);
    s.from_lexicon = c.lexicon;
    s.is_verb = c.lexicon ? c.verb : (c.last - c.first == 1 && is_stop_verb(s.norm));
    spans.push_back(std::move(s));
  }
  std::sort(spans.begin(), spans.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.first_token < b.first_token; });
  return spans;
}

PhraseFrequency PhraseFrequency::build(std::span<const std::string> questions) {
  PhraseFrequency pf;
  pf.num_questions_ = questions.size();
  for (const auto& q : questions) {
    const auto words = tokenize(q);
    std::set<std::string> grams;
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::string g;
      for (std::size_t len = 1; len <= kMaxWords && i + len <= words.size(); ++len) {
        if (len > 1) g += ' ';
        g += words[i + len - 1];
        grams.insert(g);
      }
    }
    for (const auto& g : grams) ++pf.counts_[g];
  }
  return pf;
}

int PhraseFrequency::df(std::string_view normalized_phrase) const {
  auto it = counts_.find(normalized_phrase);
  return it == counts_.end() ? 0 : it->second;
}

ExtractedTemplate extract_template(std::string_view question, std::span<const EntitySpan> entities,
                                   const PhraseFrequency& freq, int df_threshold) {
  std::vector<const EntitySpan*> ordered;
  for (const auto& e : entities) ordered.push_back(&e);
  std::sort(ordered.begin(), ordered.end(),
            [](const EntitySpan* a, const EntitySpan* b) { return a->begin < b->begin; });
  ExtractedTemplate out;
  std::string pattern;
  std::size_t pos = 0;
  for (const auto* e : ordered) {
    if (e->is_verb || e->begin < pos || e->end > question.size()) continue;
    if (freq.df(e->norm) >= df_threshold) continue;
    pattern.append(question.substr(pos, e->begin - pos));
    pattern.append(kBlank);
    out.replaced.push_back(e->surface);
    pos = e->end;
  }
  pattern.append(question.substr(pos));
  out.tmpl.pattern = std::move(pattern);
  return out;
}

std::vector<Question> load_questions(const std::filesystem::path& path) {
  std::vector<Question> out;
  std::set<std::string> seen;
  internal::for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
    Question q{internal::required_string(obj, "id", lineno), internal::required_string(obj, "text", lineno)};
    if (!seen.insert(q.id).second) throw ValidationError("duplicate question id: " + q.id);
    out.push_back(std::move(q));
  });
  return out;
}

void write_questions(const std::filesystem::path& path, std::span<const Question> questions) {
  auto out = internal::open_out(path);
  for (const auto& q : questions) out << json{{"id", q.id}, {"text", q.text}}.dump() << '\n';
}

std::vector<Template> extract_templates(std::span<const Question> questions,
                                        const EntityLexicon& lexicon, int df_threshold) {
  std::vector<std::string> texts;
  for (const auto& q : questions) texts.push_back(q.text);
  const auto freq = PhraseFrequency::build(texts);
  std::vector<Template> out;
  std::map<std::string, std::size_t> by_pattern;
  for (const auto& q : questions) {
    const auto spans = tag_entities(q.text, lexicon);
    auto t = extract_template(q.text, spans, freq, df_threshold).tmpl;
    if (trim(t.pattern).empty()) continue;
    auto [it, inserted] = by_pattern.emplace(t.pattern, out.size());
    if (inserted) out.push_back(std::move(t));
    out[it->second].source_question_ids.push_back(q.id);
  }
  return out;
}

namespace {

// Whitespace-separated raw words of a pattern with byte offsets.
struct RawWord {
  std::size_t begin, end;
};

std::vector<RawWord> raw_words(std::string_view s) {
  std::vector<RawWord> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    out.push_back({b, i});
  }
  return out;
}

bool is_blank_word(std::string_view w) {
  std::size_t b = 0, e = w.size();
  auto strip = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) && c != '_'; };
  while (b < e && strip(w[b])) ++b;
  while (e > b && strip(w[e - 1])) --e;
  return w.substr(b, e - b) == kBlank;
}

}  // namespace

std::vector<std::string> pattern_tokens(std::string_view pattern) {
  std::vector<std::string> out;
  for (const auto& rw : raw_words(pattern)) {
    auto w = pattern.substr(rw.begin, rw.end - rw.begin);
    if (is_blank_word(w)) {
      out.emplace_back(kBlank);
      continue;
    }
    for (auto& t : tokenize(w)) out.push_back(std::move(t));
  }
  return out;
}

std::size_t count_blanks(std::string_view pattern) {
  const auto toks = pattern_tokens(pattern);
  return static_cast<std::size_t>(std::count(toks.begin(), toks.end(), std::string(kBlank)));
}

TemplateIdf TemplateIdf::build(std::span<const Template> pool) {
  TemplateIdf idf;
  std::map<std::string, int> df;
  for (const auto& t : pool) {
    std::set<std::string> terms;
    for (auto& w : pattern_tokens(t.pattern))
      if (w != kBlank) terms.insert(std::move(w));
    for (const auto& w : terms) ++df[w];
  }
  const double n = static_cast<double>(pool.size());
  for (const auto& [w, f] : df) idf.idf_[w] = 1.0 + std::log((1.0 + n) / (1.0 + f));
  idf.default_ = 1.0 + std::log(1.0 + n);
  return idf;
}

double TemplateIdf::weight(const std::string& term) const {
  auto it = idf_.find(term);
  return it == idf_.end() ? default_ : it->second;
}

double template_similarity(const Template& a, const Template& b, const TemplateIdf* idf) {
  auto bag = [&](const Template& t) {
    std::map<std::string, double> m;
    for (auto& w : pattern_tokens(t.pattern))
      if (w != kBlank) m[w] += 1.0;
    if (idf)
      for (auto& [w, x] : m) x *= idf->weight(w);
    return m;
  };
  const auto ba = bag(a), bb = bag(b);
  if (ba.empty() || bb.empty()) return 0.0;
  if (ba == bb) return 1.0;
  double num = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [w, x] : ba) {
    na += x * x;
    auto it = bb.find(w);
    if (it != bb.end()) num += x * it->second;
  }
  for (const auto& [w, x] : bb) nb += x * x;
  const double cos = num / std::sqrt(na * nb);
  return std::clamp(cos, 0.0, 1.0);
}

std::vector<TemplateCluster> cluster_templates(std::span<const Template> templates, double threshold,
                                               const TemplateIdf* idf) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("cluster threshold must lie in (0, 1]");
  std::vector<TemplateCluster> clusters;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    bool placed = false;
    for (auto& c : clusters) {
      const bool fits = std::all_of(c.members.begin(), c.members.end(), [&](std::size_t m) {
        return template_similarity(templates[i], templates[m], idf) >= threshold;
      });
      if (fits) {
        c.members.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({static_cast<int>(clusters.size()), {i}});
  }
  return clusters;
}

Representative parse_representative(std::string_view name) {
  if (name == "smallest") return Representative::kSmallest;
  if (name == "second") return Representative::kSecondSmallest;
  throw ConfigError("representative must be 'smallest' or 'second'");
}

Template pick_representative(std::span<const Template> members, Representative rule) {
  if (members.empty()) throw ValidationError("cannot pick a representative of an empty cluster");
  std::vector<std::pair<std::size_t, const Template*>> ranked;
  for (const auto& t : members) ranked.emplace_back(pattern_tokens(t.pattern).size(), &t);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second->pattern < b.second->pattern;
  });
  const std::size_t pick = rule == Representative::kSecondSmallest && ranked.size() >= 2 ? 1 : 0;
  return *ranked[pick].second;
}

std::vector<Template> representative_pool(std::span<const Template> templates,
                                          std::span<const TemplateCluster> clusters,
                                          Representative rule) {
  std::vector<Template> pool;
  for (const auto& c : clusters) {
    std::vector<Template> members;
    std::vector<std::string> sources;
    for (auto m : c.members) {
      if (m >= templates.size()) throw ValidationError("cluster member out of range");
      members.push_back(templates[m]);
      for (const auto& s : templates[m].source_question_ids) sources.push_back(s);
    }
    auto rep = pick_representative(members, rule);
    rep.cluster_id = c.id;
    rep.source_question_ids = std::move(sources);
    pool.push_back(std::move(rep));
  }
  return pool;
}

void write_template_pool(const std::filesystem::path& path, std::span<const Template> pool) {
  auto out = internal::open_out(path);
  for (const auto& t : pool) {
    json obj = {{"pattern", t.pattern}};
    obj["cluster_id"] = t.cluster_id ? json(*t.cluster_id) : json(nullptr);
    obj["source_question_ids"] = t.source_question_ids;
    out << obj.dump() << '\n';
  }
}

std::vector<Template> load_template_pool(const std::filesystem::path& path) {
  std::vector<Template> pool;
  internal::for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
    Template t;
    t.pattern = internal::required_string(obj, "pattern", lineno);
    if (trim(t.pattern).empty()) throw ParseError("empty template pattern", lineno);
    auto cid = obj.find("cluster_id");
    if (cid != obj.end() && !cid->is_null()) {
      if (!cid->is_number_integer()) throw ParseError("cluster_id must be an integer", lineno);
      t.cluster_id = cid->get<int>();
    }
    auto src = obj.find("source_question_ids");
    if (src != obj.end() && src->is_array()) t.source_question_ids = src->get<std::vector<std::string>>();
    pool.push_back(std::move(t));
  });
  return pool;
}

namespace {

std::string template_ref(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "t%010zu", i);
  return buf;
}

}  // namespace

LexicalTemplateScorer::LexicalTemplateScorer(std::span<const Template> pool, Bm25Params params)
    : size_(pool.size()) {
  std::vector<TextUnit> units;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (!tokenize(pool[i].pattern).empty()) units.push_back({template_ref(i), pool[i].pattern});
  if (!units.empty()) index_ = Bm25Index::build(std::span<const TextUnit>(units), params);
}

std::vector<double> LexicalTemplateScorer::score(std::string_view context) const {
  std::vector<double> scores(size_, 0.0);
  if (!index_) return scores;
  const auto terms = tokenize(context);
  for (const auto& hit : index_->search_terms(terms, static_cast<int>(index_->num_segments())))
    scores[std::stoul(hit.ref.substr(1))] = hit.score;
  return scores;
}

DenseTemplateScorer::DenseTemplateScorer(std::span<const Template> pool,
                                         const EmbeddingProvider& provider,
                                         const PolyDprModel& model)
    : provider_(provider), model_(model) {
  if (provider.dimension() != model.dimension())
    throw ConfigError("embedding dimension does not match the model");
  for (const auto& t : pool) {
    const auto tokens = provider.token_vectors(t.pattern);
    if (tokens.rows() == 0) encoded_.emplace_back(std::nullopt);
    else encoded_.emplace_back(encode_context(tokens, model.codes));
  }
}

std::vector<double> DenseTemplateScorer::score(std::string_view context) const {
  const auto q = model_.project_query(provider_.query_vector(context));
  std::vector<double> scores;
  scores.reserve(encoded_.size());
  for (const auto& v : encoded_)
    scores.push_back(v ? infer_similarity(q, *v) : -std::numeric_limits<double>::infinity());
  return scores;
}

std::vector<Template> select_templates(std::string_view context, std::span<const Template> pool,
                                       const TemplateScorer& scorer, int n) {
  if (pool.empty()) throw ValidationError("template pool is empty");
  if (n < 1) throw ConfigError("number of templates must be >= 1");
  if (scorer.pool_size() != pool.size()) throw ConfigError("scorer was built for a different pool");
  const auto scores = scorer.score(context);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Template> out;
  std::set<std::string> seen;
  for (auto i : order) {
    if (out.size() >= static_cast<std::size_t>(n)) break;
    if (seen.insert(pool[i].pattern).second) out.push_back(pool[i]);
  }
  return out;
}

namespace {

bool contains_phrase(const std::vector<std::string>& words, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > words.size()) return false;
  return std::search(words.begin(), words.end(), phrase.begin(), phrase.end()) != words.end();
}

std::string finalize_question(std::string q) {
  q = trim(q);
  if (q.empty()) return q;
  q[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(q[0])));
  if (q.back() != '?') q += '?';
  return q;
}

}  // namespace

std::optional<std::string> fill_template(const Template& tmpl, std::string_view context,
                                         const EntityLexicon& lexicon) {
  const auto words = raw_words(tmpl.pattern);
  std::vector<std::size_t> blanks;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (is_blank_word(std::string_view(tmpl.pattern).substr(words[i].begin, words[i].end - words[i].begin)))
      blanks.push_back(i);
  if (blanks.empty()) return finalize_question(tmpl.pattern);

  const auto template_words = pattern_tokens(tmpl.pattern);
  auto spans = tag_entities(context, lexicon);
  std::vector<const EntitySpan*> ranked;
  std::set<std::string> seen;
  for (const auto& s : spans) {
    if (s.is_verb || contains_phrase(template_words, tokenize(s.norm))) continue;
    if (seen.insert(s.norm).second) ranked.push_back(&s);
  }
  if (ranked.size() < blanks.size()) return std::nullopt;
  std::stable_sort(ranked.begin(), ranked.end(), [](const EntitySpan* a, const EntitySpan* b) {
    if (a->from_lexicon != b->from_lexicon) return a->from_lexicon;
    if (a->num_words() != b->num_words()) return a->num_words() > b->num_words();
    return a->begin < b->begin;
  });

  std::string out;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < blanks.size(); ++k) {
    const auto& w = words[blanks[k]];
    const auto underscore = tmpl.pattern.find('_', w.begin);
    out.append(tmpl.pattern, pos, underscore - pos);
    out.append(ranked[k]->surface);
    pos = underscore + 1;
  }
  out.append(tmpl.pattern, pos, std::string::npos);
  return finalize_question(std::move(out));
}

std::vector<GeneratedQuestion> generate_questions(std::span<const Segment> segments,
                                                  std::span<const Template> pool,
                                                  const TemplateScorer& scorer,
                                                  const EntityLexicon& lexicon, int n_templates) {
  std::vector<GeneratedQuestion> out;
  for (const auto& seg : segments) {
    std::set<std::string> seen;
    for (const auto& t : select_templates(seg.text, pool, scorer, n_templates)) {
      auto q = fill_template(t, seg.text, lexicon);
      if (!q || !seen.insert(*q).second) continue;
      out.push_back({seg.segment_id, seg.doc_id, std::move(*q), t.pattern});
    }
  }
  return out;
}

void write_generated_questions(const std::filesystem::path& path,
                               std::span<const GeneratedQuestion> questions) {
  auto out = internal::open_out(path);
  for (const auto& q : questions)
    out << json{{"segment_id", q.segment_id}, {"doc_id", q.doc_id}, {"question", q.question},
                {"template", q.pattern}}
               .dump()
        << '\n';
}

std::vector<GeneratedQuestion> load_generated_questions(const std::filesystem::path& path) {
  std::vector<GeneratedQuestion> out;
  internal::for_each_jsonl(path, [&](const json& obj, std::size_t lineno) {
    out.push_back({internal::required_string(obj, "segment_id", lineno),
                   internal::required_string(obj, "doc_id", lineno),
                   internal::required_string(obj, "question", lineno),
                   obj.value("template", "")});
  });
  return out;
}

PairBatch tempqg_pairs(std::span<const GeneratedQuestion> questions,
                       std::span<const Segment> segments, std::span<const Document> docs) {
  std::map<std::string, const Segment*, std::less<>> by_segment;
  for (const auto& s : segments) by_segment.emplace(s.segment_id, &s);
  std::map<std::string, const Document*, std::less<>> by_doc;
  for (const auto& d : docs) by_doc.emplace(d.id, &d);
  PairBatch batch;
  for (const auto& q : questions) {
    auto seg = by_segment.find(q.segment_id);
    if (seg == by_segment.end()) throw ValidationError("question refers to unknown segment " + q.segment_id);
    std::string positive;
    if (docs.empty()) {
      positive = seg->second->text;
    } else {
      auto doc = by_doc.find(seg->second->doc_id);
      if (doc == by_doc.end()) throw ValidationError("segment refers to unknown document " + seg->second->doc_id);
      positive = doc->second->full_text();
    }
    batch.pairs.push_back({q.question, std::move(positive), Task::kTempQG, seg->second->doc_id});
  }
  return batch;
}

PairBatch build_tempqg_pairs(std::span<const Segment> segments, std::span<const Template> pool,
                             const TemplateScorer& scorer, const EntityLexicon& lexicon,
                             int n_templates, std::span<const Document> docs) {
  const auto questions = generate_questions(segments, pool, scorer, lexicon, n_templates);
  return tempqg_pairs(questions, segments, docs);
}

}  // namespace bioret
