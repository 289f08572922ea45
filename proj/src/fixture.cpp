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

#include "bioret/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bioret/error.hpp"
#include "bioret/random.hpp"

namespace bioret {
namespace {

const std::vector<std::string> kSyllables = {
    "ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pu", "ra", "se", "ti", "vo", "zu",
    "bre", "cla", "dro", "fli", "gra", "pla", "sto", "tri", "vex", "lor", "min", "tal", "sin",
    "ron", "del"};

const std::vector<std::string> kFiller = {
    "the", "of", "and", "in", "with", "was", "were", "to", "a", "for", "by", "is", "that",
    "on", "as", "from", "these", "patients", "study", "results", "showed", "observed",
    "analysis", "levels", "expression", "cells", "role", "effect", "increased", "significantly",
    "what", "which", "how", "does", "function", "involved", "affect", "targeted", "signaling"};

const std::vector<std::string> kStarts = {"The", "In", "These", "This", "Our", "We", "Further",
                                          "Moreover", "Here", "Thus"};

const std::vector<std::string> kCategories = {"receptor", "enzyme",  "protein", "gene",
                                              "kinase",   "channel", "hormone", "cytokine"};

const std::vector<std::string> kVerbs = {"regulates", "inhibits", "activates", "modulates",
                                         "binds", "targets"};

std::string pick(Rng& rng, const std::vector<std::string>& xs) {
  return xs[rng.uniform_index(xs.size())];
}

class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) cdf_[i] = acc += 1.0 / static_cast<double>(i + 1);
    for (double& c : cdf_) c /= acc;
  }
  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::vector<std::string> make_vocabulary(Rng& rng, int size) {
  std::set<std::string> seen(kFiller.begin(), kFiller.end());
  std::vector<std::string> words;
  while (static_cast<int>(words.size()) < size) {
    std::string w;
    const auto n = 2 + rng.uniform_index(2);
    for (std::uint64_t i = 0; i < n; ++i) w += pick(rng, kSyllables);
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

class EntityNamer {
 public:
  std::string next(Rng& rng) {
    for (;;) {
      std::string code;
      for (int i = 0; i < 3; ++i) code += static_cast<char>('A' + rng.uniform_index(26));
      code += '-' + std::to_string(10 + rng.uniform_index(990));
      if (used_.insert(to_lower(code)).second) return code;
    }
  }

 private:
  std::set<std::string> used_;
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

Fixture make_synthetic_fixture(const FixtureOptions& options) {
  if (options.n_docs < 10) throw ConfigError("fixture needs at least 10 documents");
  if (options.vocab_size < 50) throw ConfigError("fixture vocabulary must have at least 50 words");
  if (options.sentences_per_doc < 3) throw ConfigError("fixture needs at least 3 sentences per document");
  if (!(options.filler_rate >= 0.0 && options.filler_rate < 1.0))
    throw ConfigError("fixture filler_rate must be in [0, 1)");

  Rng rng(options.seed, "fixture");
  const auto vocab = make_vocabulary(rng, options.vocab_size);
  const ZipfSampler zipf(vocab.size());
  // Topic words come from the rarer half of the vocabulary.
  auto topic_word = [&]() { return vocab[vocab.size() / 2 + rng.uniform_index(vocab.size() / 2)]; };
  auto content_word = [&]() { return vocab[zipf.sample(rng)]; };

  auto background_sentence = [&]() {
    std::vector<std::string> w = {pick(rng, kStarts)};
    const auto len = 8 + rng.uniform_index(5);
    for (std::uint64_t i = 0; i < len; ++i)
      w.push_back(rng.uniform() < options.filler_rate ? pick(rng, kFiller) : content_word());
    return join(w, " ") + ".";
  };

  Fixture fx;
  EntityNamer namer;
  for (int d = 0; d < options.n_docs; ++d) {
    char id[16];
    std::snprintf(id, sizeof(id), "D%04d", d);
    const std::string e1 = namer.next(rng), e2 = namer.next(rng);
    const std::string category = pick(rng, kCategories);
    const std::string t1 = topic_word(), t2 = topic_word(), t3 = topic_word();

    const auto n_sent = static_cast<std::size_t>(options.sentences_per_doc);
    const auto planted_at = rng.uniform_index(n_sent - 1);
    std::vector<std::string> sentences;
    for (std::size_t s = 0; s < n_sent; ++s) {
      if (s == planted_at) {
        sentences.push_back("The " + e1 + " " + category + " " + pick(rng, kVerbs) + " " + t1 + " " +
                            t2 + " in " + content_word() + " " + pick(rng, kFiller) + " " +
                            content_word() + ".");
      } else if (s == planted_at + 1) {
        sentences.push_back("In " + t3 + " " + content_word() + " " + e2 + " " + pick(rng, kVerbs) +
                            " " + t1 + " with " + e1 + " " + pick(rng, kFiller) + " " +
                            content_word() + ".");
      } else {
        sentences.push_back(background_sentence());
      }
    }
    Document doc;
    doc.id = id;
    doc.title = capitalize(content_word()) + " " + content_word() + " of " + t2 + " " + category + " " +
                content_word();
    doc.abstract = join(sentences, " ");
    fx.planted[doc.id] = {e1, e2};
    fx.lexicon.add(e1);
    fx.lexicon.add(e2);

    if (d % 2 == 0) {
      Question q;
      char qid[16];
      std::snprintf(qid, sizeof(qid), "Q%04d", d / 2);
      q.id = qid;
      switch (rng.uniform_index(4)) {
        case 0: q.text = "What is the role of " + e1 + " in " + t1 + " " + t2 + "?"; break;
        case 1: q.text = "Which " + category + " is targeted by " + e1 + " and " + e2 + "?"; break;
        case 2: q.text = "Is " + e2 + " involved in " + t1 + " " + t3 + "?"; break;
        default: q.text = "How does " + e1 + " affect " + t2 + " with " + e2 + "?"; break;
      }
      fx.qrels[q.id].insert(doc.id);
      fx.queries.push_back(std::move(q));
    }
    fx.docs.push_back(std::move(doc));
  }

  // Template-extraction questions use entity codes that never occur in the corpus.
  const std::vector<std::string> forms = {
      "Which {c} is targeted by {e}?",       "What is the role of {e} in {c} signaling?",
      "Is {e} involved in {c} regulation?",  "How does {e} affect {c} activity?",
      "Which {c} interacts with {e} and {f}?", "What is the function of {e}?",
      "Is {e} a {c}?",                       "Does {e} inhibit {f}?"};
  const int n_questions = std::max(40, options.n_docs);
  for (int i = 0; i < n_questions; ++i) {
    std::string text = forms[rng.uniform_index(forms.size())];
    auto replace = [&](const std::string& key, const std::string& value) {
      auto pos = text.find(key);
      if (pos != std::string::npos) text.replace(pos, key.size(), value);
    };
    const std::string e = namer.next(rng), f = namer.next(rng);
    replace("{c}", pick(rng, kCategories));
    replace("{e}", e);
    replace("{f}", f);
    fx.lexicon.add(e);
    fx.lexicon.add(f);
    char qid[16];
    std::snprintf(qid, sizeof(qid), "TQ%04d", i);
    fx.train_questions.push_back({qid, text});
  }
  for (const auto& v : {"regulates", "inhibits", "activates", "modulates", "binds", "targets",
                        "targeted", "involved", "affect", "inhibit", "interacts"})
    fx.lexicon.add(v, true);
  return fx;
}

void write_fixture(const Fixture& fixture, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_corpus(dir / "corpus.jsonl", fixture.docs);
  write_questions(dir / "queries.jsonl", fixture.queries);
  write_qrels(dir / "qrels.tsv", fixture.qrels);
  write_questions(dir / "questions.jsonl", fixture.train_questions);
  fixture.lexicon.save(dir / "lexicon.tsv");
}

}  // namespace bioret
