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
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bioret/corpus.hpp"
#include "bioret/error.hpp"
#include "bioret/fixture.hpp"
#include "bioret/lexical.hpp"
#include "bioret/pretrain.hpp"
#include "bioret/text.hpp"
#include "helpers.hpp"

using namespace bioret;

namespace {

std::vector<Document> small_corpus() {
  return {
      {"d1", "Autophagy in neurons", "Autophagy clears damaged organelles. Neurons rely on autophagy heavily."},
      {"d2", "Kinase signaling", "The kinase cascade is activated. Signaling spreads quickly. Cells respond."},
      {"d3", "Receptor binding", "Ligands bind the receptor. The receptor changes shape."},
  };
}

// Reference uniform draw written out from the documented recipe.
std::uint64_t ref_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
std::uint64_t ref_fnv(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
std::size_t ref_first_draw(std::uint64_t seed, const std::string& key, std::size_t n) {
  const std::uint64_t state = ref_mix(seed) ^ ref_fnv(key);
  const std::uint64_t x = ref_mix(state + 0x9e3779b97f4a7c15ULL);
  return static_cast<std::size_t>((static_cast<unsigned __int128>(x) * n) >> 64);
}

bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& full) {
  std::size_t j = 0;
  for (const auto& t : full)
    if (j < sub.size() && sub[j] == t) ++j;
  return j == sub.size();
}

}  // namespace

TEST_CASE("task names round trip") {
  for (Task t : {Task::kEtm, Task::kRsm, Task::kIct, Task::kTempQG, Task::kSupervised})
    CHECK(parse_task(task_name(t)) == t);
  CHECK(parse_task("rsm") == Task::kRsm);
  CHECK_THROWS_AS(parse_task("bfs"), ConfigError);
}

TEST_CASE("ETM: one pair per document, title prefix, keyword boundary") {
  auto docs = small_corpus();
  const auto st = compute_stats(std::span<const Document>(docs));
  const auto batch = build_etm_pairs(docs, st, 10);
  REQUIRE(batch.pairs.size() == 3);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(batch.pairs[i].query_text.rfind(docs[i].title, 0) == 0);
    CHECK(batch.pairs[i].positive_text == docs[i].abstract);
    CHECK(batch.pairs[i].task == Task::kEtm);
  }
  // m beyond the abstract vocabulary: every distinct abstract term.
  const auto et = expand_title(docs[2], st, 100);
  std::set<std::string> distinct;
  for (const auto& t : tokenize(docs[2].abstract)) distinct.insert(t);
  CHECK(et.keywords.size() == distinct.size());
  CHECK(std::set<std::string>(et.keywords.begin(), et.keywords.end()) == distinct);

  // "autophagy" appears twice in d1 and nowhere else: top weight.
  const auto top = top_keywords(docs[0].abstract, st, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0] == "autophagy");
  const auto e1 = expand_title(docs[0], st, 3);
  CHECK(std::find(e1.keywords.begin(), e1.keywords.end(), "autophagy") != e1.keywords.end());
  CHECK(e1.rendered == docs[0].title + " " + join(e1.keywords, " "));

  docs.push_back({"d4", "Empty abstract", ""});
  const auto b2 = build_etm_pairs(docs, st, 5);
  CHECK(b2.pairs.size() == 3);
  CHECK(b2.skipped == 1);
  CHECK(b2.skipped_ids == std::vector<std::string>{"d4"});
  CHECK_THROWS_AS(build_etm_pairs(docs, st, 0), ConfigError);
}

TEST_CASE("RSM: reduced sentence contract") {
  const std::vector<TextUnit> units = {{"u1", "alpha beta gamma delta epsilon"}, {"u2", "alpha beta"},
                                       {"u3", "alpha gamma"}, {"u4", "zeta"}};
  const auto st = compute_stats(units);
  // Weights for the 5-word sentence (N = 4): alpha 0, beta ln(4/3), gamma ln(4/3),
  // delta ln 2, epsilon ln 2. Top 3 by weight, stable: delta, epsilon, beta.
  const auto r = reduce_sentence("alpha beta gamma delta epsilon", st, 3);
  CHECK(r == std::vector<std::string>{"beta", "delta", "epsilon"});
  CHECK(reduce_sentence("alpha beta gamma delta epsilon", st, 5) ==
        tokenize("alpha beta gamma delta epsilon"));
  CHECK(reduce_sentence("alpha beta gamma delta epsilon", st, 50).size() == 5);
  // Repeated selected term contributes once, at its first occurrence.
  CHECK(reduce_sentence("delta alpha delta", st, 2) == std::vector<std::string>{"delta", "alpha"});

  const auto docs = small_corpus();
  const auto dst = compute_stats(std::span<const Document>(docs));
  const auto batch = build_rsm_pairs(docs, dst, 3);
  CHECK(batch.pairs.size() == 7);  // 2 + 3 + 2 sentences
  for (const auto& p : batch.pairs) {
    CHECK(p.task == Task::kRsm);
    const auto it = std::find_if(docs.begin(), docs.end(), [&](const Document& d) { return d.id == p.source_doc_id; });
    REQUIRE(it != docs.end());
    CHECK(p.positive_text == expand_title(*it, dst, kDefaultEtmKeywords).rendered);
  }
}

TEST_CASE("ICT: draws match a reference implementation of the seeded uniform draw") {
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i) {
    std::string abs;
    for (int s = 0; s <= i % 4 + 1; ++s) abs += "Sentence " + std::to_string(s) + " of doc " + std::to_string(i) + ". ";
    docs.push_back({"doc" + std::to_string(i), "T", trim(abs)});
  }
  const auto batch = build_ict_pairs(docs, 7);
  REQUIRE(batch.pairs.size() == 10);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto sentences = split_sentences(docs[i].abstract);
    const auto pick = ref_first_draw(7, docs[i].id, sentences.size());
    CHECK(batch.pairs[i].query_text == sentences[pick]);
  }
  // Order of the corpus does not change a document's draw.
  auto reversed = docs;
  std::reverse(reversed.begin(), reversed.end());
  const auto rb = build_ict_pairs(reversed, 7);
  for (std::size_t i = 0; i < docs.size(); ++i) CHECK(rb.pairs[docs.size() - 1 - i].query_text == batch.pairs[i].query_text);

  const std::vector<Document> two = {{"x", "", "First sentence here. Second one there."}, {"y", "", "Only one sentence."}};
  const auto tb = build_ict_pairs(two, 3);
  REQUIRE(tb.pairs.size() == 1);
  CHECK(tb.skipped == 1);
  const bool a = tb.pairs[0].query_text == "First sentence here." && tb.pairs[0].positive_text == "Second one there.";
  const bool b = tb.pairs[0].query_text == "Second one there." && tb.pairs[0].positive_text == "First sentence here.";
  CHECK((a || b));
}

TEST_CASE("pairs file round trip and errors") {
  testing::TempDir dir;
  const auto docs = small_corpus();
  const auto batch = build_ict_pairs(docs, 1);
  write_pairs(dir / "p.jsonl", batch.pairs);
  const auto back = load_pairs(dir / "p.jsonl");
  REQUIRE(back.size() == batch.pairs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].query_text == batch.pairs[i].query_text);
    CHECK(back[i].positive_text == batch.pairs[i].positive_text);
    CHECK(back[i].task == Task::kIct);
    CHECK(back[i].source_doc_id == batch.pairs[i].source_doc_id);
  }
  testing::write_file(dir / "bad.jsonl", "{\"query\":\"q\",\"positive\":\"p\",\"task\":\"ETM\"}\n{\"query\":\"q\"}\n");
  try {
    load_pairs(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("property: generator invariants over a generated corpus") {
  FixtureOptions opt;
  opt.n_docs = 60;
  const auto docs = make_synthetic_fixture(opt).docs;
  const auto st = compute_stats(std::span<const Document>(docs));

  const auto etm = build_etm_pairs(docs, st, 10);
  for (std::size_t i = 0; i < etm.pairs.size(); ++i) {
    const auto et = expand_title(docs[i], st, 10);
    CHECK(etm.pairs[i].query_text.rfind(docs[i].title, 0) == 0);
    std::set<std::string> distinct;
    for (const auto& t : tokenize(docs[i].abstract)) distinct.insert(t);
    CHECK(et.keywords.size() == std::min<std::size_t>(10, distinct.size()));
    CHECK(std::set<std::string>(et.keywords.begin(), et.keywords.end()).size() == et.keywords.size());
  }

  for (const auto& d : docs)
    for (const auto& s : split_sentences(d.abstract)) {
      const auto full = tokenize(s);
      const auto red = reduce_sentence(s, st, 8);
      const std::set<std::string> distinct(full.begin(), full.end());
      CHECK(red.size() == std::min<std::size_t>(8, distinct.size()));
      CHECK(is_subsequence(red, full));
    }

  const auto ict = build_ict_pairs(docs, 11);
  for (const auto& p : ict.pairs) {
    const auto it = std::find_if(docs.begin(), docs.end(), [&](const Document& d) { return d.id == p.source_doc_id; });
    const auto sentences = split_sentences(it->abstract);
    const auto rest = split_sentences(p.positive_text);
    CHECK(rest.size() + 1 == sentences.size());
    CHECK(std::find(rest.begin(), rest.end(), p.query_text) == rest.end());
    std::multiset<std::string> joined(rest.begin(), rest.end());
    joined.insert(p.query_text);
    CHECK(joined == std::multiset<std::string>(sentences.begin(), sentences.end()));
  }

  const auto again = build_ict_pairs(docs, 11);
  REQUIRE(again.pairs.size() == ict.pairs.size());
  for (std::size_t i = 0; i < ict.pairs.size(); ++i) CHECK(again.pairs[i].query_text == ict.pairs[i].query_text);
  const auto rsm1 = build_rsm_pairs(docs, st, 8), rsm2 = build_rsm_pairs(docs, st, 8);
  REQUIRE(rsm1.pairs.size() == rsm2.pairs.size());
  for (std::size_t i = 0; i < rsm1.pairs.size(); ++i) CHECK(rsm1.pairs[i].query_text == rsm2.pairs[i].query_text);
}
