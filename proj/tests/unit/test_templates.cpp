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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bioret/corpus.hpp"
#include "bioret/error.hpp"
#include "bioret/fixture.hpp"
#include "bioret/lexical.hpp"
#include "bioret/templates.hpp"
#include "bioret/text.hpp"
#include "helpers.hpp"

using namespace bioret;

namespace {

const char* kBorden = "Borden classification is used for which disease?";
const char* kLampContext =
    "The lysosomal-membrane protein type 2A (LAMP-2A) acts as the receptor for the substrates of "
    "chaperone-mediated autophagy (CMA), which should undergo unfolding before crossing the lysosomal "
    "membrane and reaching the lumen for degradation.";

std::vector<Question> borden_corpus() {
  return {{"q1", kBorden},
          {"q2", "Which gene causes Huntington disease?"},
          {"q3", "What drug treats Gaucher disease?"},
          {"q4", "Is celiac disease autoimmune?"},
          {"q5", "Which disease is linked to CFTR?"},
          {"q6", "What is the prevalence of Fabry disease?"}};
}

EntityLexicon borden_lexicon() {
  EntityLexicon lex;
  lex.add("borden classification");
  lex.add("disease");
  return lex;
}

std::vector<std::string> names(const std::vector<EntitySpan>& spans) {
  std::vector<std::string> out;
  for (const auto& s : spans) out.push_back(s.surface);
  return out;
}

// Cosine of plain count bags, blanks and punctuation removed.
double bag_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, double> x, y;
  for (const auto& w : a) x[w] += 1;
  for (const auto& w : b) y[w] += 1;
  double dot = 0, nx = 0, ny = 0;
  for (auto& [w, c] : x) {
    nx += c * c;
    if (y.count(w)) dot += c * y[w];
  }
  for (auto& [w, c] : y) ny += c * c;
  return dot / std::sqrt(nx * ny);
}

}  // namespace

TEST_CASE("tag_entities examples") {
  const auto spans = tag_entities(kBorden, borden_lexicon());
  CHECK(names(spans) == std::vector<std::string>{"Borden classification", "disease"});
  CHECK(spans[0].from_lexicon);
  CHECK(spans[0].norm == "borden classification");

  CHECK(tag_entities("what is the answer here?", EntityLexicon{}).empty());
  const auto bnn = tag_entities("Is BNN-20 involved?", EntityLexicon{});
  CHECK(names(bnn) == std::vector<std::string>{"BNN-20"});
  CHECK_FALSE(bnn[0].from_lexicon);

  // Capitalized runs never start at the first word; longest span wins overlaps.
  CHECK(names(tag_entities("Does Spinal Muscular Atrophy respond?", EntityLexicon{})) ==
        std::vector<std::string>{"Spinal Muscular Atrophy"});
  EntityLexicon verb;
  verb.add("phosphorylates", true);
  const auto v = tag_entities("which kinase phosphorylates tau", verb);
  REQUIRE(v.size() == 1);
  CHECK(v[0].is_verb);
}

TEST_CASE("extract_template examples") {
  const auto qs = borden_corpus();
  std::vector<std::string> texts;
  for (const auto& q : qs) texts.push_back(q.text);
  const auto freq = PhraseFrequency::build(texts);
  CHECK(freq.df("disease") == 6);
  CHECK(freq.df("borden classification") == 1);

  const auto spans = tag_entities(kBorden, borden_lexicon());
  const auto t = extract_template(kBorden, spans, freq, kDefaultDfThreshold);
  CHECK(t.tmpl.pattern == "_ is used for which disease?");
  CHECK(t.replaced == std::vector<std::string>{"Borden classification"});

  // Every entity common: unchanged.
  CHECK(extract_template(kBorden, spans, freq, 1).tmpl.pattern == kBorden);

  // Two rare entities: two blanks in order.
  const std::string two = "Does KXR-417 bind ZPL-22 in cells?";
  const auto t2 = extract_template(two, tag_entities(two, EntityLexicon{}), freq, 5);
  CHECK(t2.tmpl.pattern == "Does _ bind _ in cells?");
  CHECK(t2.replaced == std::vector<std::string>{"KXR-417", "ZPL-22"});

  const auto pool = extract_templates(qs, borden_lexicon(), 5);
  REQUIRE_FALSE(pool.empty());
  CHECK(pool[0].pattern == "_ is used for which disease?");
  CHECK(pool[0].source_question_ids == std::vector<std::string>{"q1"});
}

TEST_CASE("template_similarity") {
  const Template a{"_ is used for which disease?", {}, {}};
  const Template b{"which disease is _ used for?", {}, {}};
  const Template c{"kinase pathway signal", {}, {}};
  CHECK(template_similarity(a, a) == 1.0);
  CHECK(template_similarity(a, c) == 0.0);
  CHECK(template_similarity(a, b) == doctest::Approx(bag_cosine({"is", "used", "for", "which", "disease"},
                                                                {"which", "disease", "is", "used", "for"})));
  const Template d{"which disease is caused by _", {}, {}};
  CHECK(template_similarity(a, d) ==
        doctest::Approx(bag_cosine({"is", "used", "for", "which", "disease"}, {"which", "disease", "is", "caused", "by"}))
            .epsilon(1e-12));
  CHECK(template_similarity(Template{"_ _?", {}, {}}, Template{"_", {}, {}}) == 0.0);
  CHECK(pattern_tokens("Is (_) the _? yes") == std::vector<std::string>{"is", "_", "the", "_", "yes"});
  CHECK(count_blanks("_ binds _?") == 2);
}

TEST_CASE("cluster_templates: greedy pass matches a hand simulation") {
  const std::vector<Template> ts = {{"which gene causes _", {}, {}},
                                    {"which gene causes _ disease", {}, {}},
                                    {"what drug treats _", {}, {}},
                                    {"which gene causes _", {}, {}},
                                    {"what drug treats _ patients", {}, {}}};
  // Brute-force greedy reference over the precomputed similarity matrix.
  std::vector<std::vector<double>> sim(5, std::vector<double>(5));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) sim[i][j] = template_similarity(ts[i], ts[j]);
  std::vector<std::vector<std::size_t>> expect;
  for (std::size_t i = 0; i < 5; ++i) {
    bool placed = false;
    for (auto& c : expect) {
      bool ok = true;
      for (auto m : c) ok = ok && sim[i][m] >= 0.75;
      if (ok) {
        c.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) expect.push_back({i});
  }
  const auto got = cluster_templates(ts, 0.75);
  REQUIRE(got.size() == expect.size());
  for (std::size_t c = 0; c < got.size(); ++c) {
    CHECK(got[c].id == static_cast<int>(c));
    CHECK(got[c].members == expect[c]);
  }
  CHECK(got.size() == 2);

  CHECK(cluster_templates(std::vector<Template>{ts[0]}).size() == 1);
  const auto same = cluster_templates(std::vector<Template>{ts[0], ts[3]});
  REQUIRE(same.size() == 1);
  CHECK(same[0].members.size() == 2);
  CHECK_THROWS_AS(cluster_templates(ts, 0.0), ConfigError);
  CHECK_THROWS_AS(cluster_templates(ts, 1.5), ConfigError);
}

TEST_CASE("pick_representative") {
  const std::vector<Template> m = {{"a b c d e f g", {}, {}}, {"a b c d", {}, {}}, {"a b c d e f g h i", {}, {}}};
  CHECK(pick_representative(std::span(m.data(), 1)).pattern == m[0].pattern);
  CHECK(pick_representative(m).pattern == "a b c d");
  CHECK(pick_representative(m, Representative::kSecondSmallest).pattern == "a b c d e f g");
  const std::vector<Template> tie = {{"z y", {}, {}}, {"a b", {}, {}}};
  CHECK(pick_representative(tie).pattern == "a b");
  CHECK(parse_representative("second") == Representative::kSecondSmallest);
  CHECK_THROWS_AS(parse_representative("largest"), ConfigError);

  const std::vector<Template> ts = {{"which gene causes _", {"q1"}, {}}, {"which gene causes _ now", {"q2"}, {}}};
  const auto pool = representative_pool(ts, cluster_templates(ts, 0.75));
  REQUIRE(pool.size() == 1);
  CHECK(pool[0].pattern == "which gene causes _");
  CHECK(pool[0].cluster_id == 0);
  CHECK(pool[0].source_question_ids == std::vector<std::string>{"q1", "q2"});
}

TEST_CASE("select_templates with the lexical scorer") {
  const std::vector<Template> pool = {{"what drug treats _", {}, {}},
                                      {"which receptor binds _", {}, {}},
                                      {"which receptor binds _", {}, {}},
                                      {"is _ a kinase", {}, {}}};
  const LexicalTemplateScorer scorer(pool);
  const std::string ctx = "The receptor was expressed in neurons.";
  const auto sel = select_templates(ctx, pool, scorer, 10);
  CHECK(sel.size() == 3);
  CHECK(sel[0].pattern == "which receptor binds _");

  // Exhaustive oracle: BM25 of the context against the pattern texts.
  std::vector<TextUnit> units;
  for (std::size_t i = 0; i < pool.size(); ++i) units.push_back({std::to_string(i), pool[i].pattern});
  const auto idx = Bm25Index::build(units);
  const auto scores = scorer.score(ctx);
  for (std::size_t i = 0; i < pool.size(); ++i)
    CHECK(scores[i] == doctest::Approx(idx.score(tokenize(ctx), std::to_string(i))).epsilon(1e-12));

  const std::vector<Template> one = {{"what is _", {}, {}}};
  const LexicalTemplateScorer s1(one);
  CHECK(select_templates("anything", one, s1, 1).size() == 1);
  CHECK_THROWS_AS(select_templates("x", one, s1, 0), ConfigError);
  CHECK_THROWS_AS(select_templates("x", pool, s1, 1), ConfigError);
}

TEST_CASE("fill_template examples") {
  EntityLexicon lex;
  lex.add("lamp-2a");
  CHECK(fill_template({"which receptor is targeted by _", {}, {}}, kLampContext, lex) ==
        std::string("Which receptor is targeted by LAMP-2A?"));
  CHECK(fill_template({"what is autophagy?", {}, {}}, kLampContext, lex) == std::string("What is autophagy?"));
  CHECK_FALSE(fill_template({"does _ bind _", {}, {}}, "Only KXR-417 here.", EntityLexicon{}).has_value());
  CHECK(fill_template({"does _ bind _", {}, {}}, "Both KXR-417 and ZPL-22 here.", EntityLexicon{}) ==
        std::string("Does KXR-417 bind ZPL-22?"));
}

TEST_CASE("lexicon file") {
  testing::TempDir dir;
  testing::write_file(dir / "lex.tsv", "# comment\nLAMP-2A\tnoun\nbinds\tverb\n");
  const auto lex = EntityLexicon::load(dir / "lex.tsv");
  CHECK(lex.size() == 2);
  CHECK(lex.lookup("lamp-2a") == false);
  CHECK(lex.lookup("binds") == true);
  lex.save(dir / "out.tsv");
  CHECK(EntityLexicon::load(dir / "out.tsv").entries() == lex.entries());
  testing::write_file(dir / "bad.tsv", "x\tnoun\ny\tadjective\n");
  CHECK_THROWS_AS(EntityLexicon::load(dir / "bad.tsv"), ParseError);
}

TEST_CASE("tempqg pairs: dedup and counts") {
  EntityLexicon lex;
  lex.add("kxr-417");
  const std::vector<Segment> segs = {{"d1#0", "d1", "KXR-417 is a receptor. It binds ligands.", UnitKind::kTwoSent, 0},
                                     {"d2#0", "d2", "No entities at all here.", UnitKind::kTwoSent, 0}};
  // Three patterns that fill to the same question once capitalized.
  const std::vector<Template> pool = {{"what is _", {}, {}}, {"What is _?", {}, {}}, {"what is _?", {}, {}},
                                      {"which receptor is _", {}, {}}};
  const LexicalTemplateScorer scorer(pool);
  const auto batch = build_tempqg_pairs(segs, pool, scorer, lex, 10);
  CHECK(batch.pairs.size() == 2);
  for (const auto& p : batch.pairs) {
    CHECK(p.task == Task::kTempQG);
    CHECK(p.positive_text == segs[0].text);
  }
  CHECK(build_tempqg_pairs(segs, pool, scorer, lex, 1).pairs.size() <= 1);
  const std::vector<Document> docs = {{"d1", "Title", "Long text."}, {"d2", "T", "x."}};
  const auto longer = build_tempqg_pairs(segs, pool, scorer, lex, 10, docs);
  REQUIRE_FALSE(longer.pairs.empty());
  CHECK(longer.pairs[0].positive_text == "Title Long text.");
}

TEST_CASE("property: extraction, filling and clustering invariants on the fixture") {
  const auto fx = make_synthetic_fixture({});
  std::vector<std::string> texts;
  for (const auto& q : fx.train_questions) texts.push_back(q.text);
  const auto freq = PhraseFrequency::build(texts);
  for (const auto& q : fx.train_questions) {
    const auto spans = tag_entities(q.text, fx.lexicon);
    const auto ex = extract_template(q.text, spans, freq, 5);
    // Re-inserting replaced entities reconstructs the question.
    std::string rebuilt;
    std::size_t k = 0;
    for (char c : ex.tmpl.pattern) {
      if (c == '_' && k < ex.replaced.size()) rebuilt += ex.replaced[k++];
      else rebuilt += c;
    }
    CHECK(k == ex.replaced.size());
    CHECK(rebuilt == q.text);
    // Idempotent.
    const auto again = extract_template(ex.tmpl.pattern, tag_entities(ex.tmpl.pattern, fx.lexicon), freq, 5);
    CHECK(again.tmpl.pattern == ex.tmpl.pattern);
  }

  const auto templates = extract_templates(fx.train_questions, fx.lexicon, 5);
  for (std::size_t i = 0; i < templates.size(); ++i)
    for (std::size_t j = 0; j < templates.size(); ++j) {
      CHECK(template_similarity(templates[i], templates[j]) == template_similarity(templates[j], templates[i]));
      if (i == j && !tokenize(templates[i].pattern).empty()) CHECK(template_similarity(templates[i], templates[i]) == 1.0);
    }
  const auto clusters = cluster_templates(templates);
  std::vector<int> seen(templates.size(), 0);
  for (const auto& c : clusters)
    for (auto m : c.members) ++seen[m];
  CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }));

  // Filling changes nothing outside the blanks (up to the finishing rules).
  const auto segs = segment_corpus(fx.docs, {});
  for (std::size_t i = 0; i < 40; ++i) {
    for (const auto& t : templates) {
      const auto q = fill_template(t, segs[i].text, fx.lexicon);
      if (!q) continue;
      auto pieces = t.pattern;
      std::vector<std::string> parts;
      std::size_t start = 0, at;
      while ((at = pieces.find('_', start)) != std::string::npos) {
        parts.push_back(pieces.substr(start, at - start));
        start = at + 1;
      }
      parts.push_back(pieces.substr(start));
      std::string lowered = to_lower(*q);
      std::size_t pos = 0;
      bool ok = true;
      for (const auto& p : parts) {
        const auto trimmed = to_lower(trim(p));
        if (trimmed.empty()) continue;
        const auto f = lowered.find(trimmed, pos);
        ok = ok && f != std::string::npos;
        if (f != std::string::npos) pos = f + trimmed.size();
      }
      CHECK(ok);
    }
  }

  // Pair count equals an enumeration of selected and filled templates.
  const std::vector<Segment> some(segs.begin(), segs.begin() + 30);
  const auto pool = representative_pool(templates, clusters);
  const LexicalTemplateScorer scorer(pool);
  std::size_t expect = 0;
  for (const auto& s : some) {
    std::set<std::string> qs;
    for (const auto& t : select_templates(s.text, pool, scorer, 5))
      if (auto q = fill_template(t, s.text, fx.lexicon)) qs.insert(*q);
    expect += qs.size();
  }
  CHECK(build_tempqg_pairs(some, pool, scorer, fx.lexicon, 5).pairs.size() == expect);
}
