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
#include <map>
#include <string>
#include <vector>

#include "bioret/error.hpp"
#include "bioret/fusion.hpp"
#include "bioret/random.hpp"
#include "helpers.hpp"

using namespace bioret;

namespace {

RunList make_run(const std::string& qid, std::vector<ScoredHit> hits, const std::string& tag = "t") {
  RunList r{qid, std::move(hits), tag};
  canonicalize(r);
  return r;
}

std::vector<double> scores_of(const std::vector<ScoredHit>& hits) {
  std::vector<double> s;
  for (const auto& h : hits) s.push_back(h.score);
  return s;
}

std::vector<std::string> refs_of(const RunList& r) {
  std::vector<std::string> s;
  for (const auto& h : r.hits) s.push_back(h.ref);
  return s;
}

RunList random_run(Rng& rng, const std::string& qid, int n, int pool) {
  std::map<std::string, double> hits;
  while (static_cast<int>(hits.size()) < n) hits["d" + std::to_string(rng.uniform_index(pool))] = rng.normal();
  std::vector<ScoredHit> v;
  for (auto& [r, s] : hits) v.push_back({r, s});
  return make_run(qid, v);
}

}  // namespace

TEST_CASE("normalize_scores examples") {
  CHECK(scores_of(normalize_scores(std::vector<ScoredHit>{{"a", 4}, {"b", 2}})) == std::vector<double>{1.0, 0.0});
  CHECK(scores_of(normalize_scores(std::vector<ScoredHit>{{"a", 3}, {"b", 3}})) == std::vector<double>{1.0, 1.0});
  const auto n = scores_of(normalize_scores(std::vector<ScoredHit>{{"a", 4}, {"b", 2}, {"c", 1}}));
  CHECK(n[0] == 1.0);
  CHECK(n[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(n[2] == 0.0);
  CHECK(normalize_scores(std::vector<ScoredHit>{}).empty());
}

TEST_CASE("hybrid_fuse examples") {
  const auto bm = make_run("q", {{"a", 10}, {"b", 7}, {"c", 4}});
  const auto empty = make_run("q", {});
  const auto h = hybrid_fuse(bm, empty);
  CHECK(refs_of(h) == refs_of(bm));
  CHECK(scores_of(h.hits) == scores_of(normalize_scores(bm.hits)));
  CHECK(h.tag == "hybrid");

  const auto dn = make_run("q", {{"a", 0.9}, {"d", 0.5}, {"b", 0.1}});
  const auto f = hybrid_fuse(bm, dn);
  // a: 1 + 1, b: 0.5 + 0, c: 0 + absent, d: absent + 0.5
  REQUIRE(f.hits.size() == 4);
  CHECK(f.hits[0] == ScoredHit{"a", 2.0});
  CHECK(f.hits[1].ref == "b");
  CHECK(f.hits[1].score == doctest::Approx(0.5));
  CHECK(f.hits[2].ref == "d");
  CHECK(f.hits[2].score == doctest::Approx(0.5));
  CHECK(f.hits[3] == ScoredHit{"c", 0.0});
  CHECK_THROWS_AS(hybrid_fuse(bm, make_run("other", {})), ValidationError);
}

TEST_CASE("property: fusion range, symmetry and affine invariance") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_run(rng, "q", 1 + static_cast<int>(rng.uniform_index(30)), 60);
    const auto b = random_run(rng, "q", 1 + static_cast<int>(rng.uniform_index(30)), 60);
    const auto ab = hybrid_fuse(a, b), ba = hybrid_fuse(b, a);
    CHECK(ab.hits == ba.hits);
    for (const auto& h : ab.hits) {
      CHECK(h.score >= 0.0);
      CHECK(h.score <= 2.0);
    }
    // Rescaling raw scores by a positive affine map keeps the ordering.
    auto a2 = a, b2 = b;
    for (auto& h : a2.hits) h.score = 3.0 * h.score + 11.0;
    for (auto& h : b2.hits) h.score = 0.25 * h.score - 4.0;
    CHECK(refs_of(hybrid_fuse(a2, b2)) == refs_of(ab));
    const auto n1 = scores_of(normalize_scores(a.hits)), n2 = scores_of(normalize_scores(a2.hits));
    for (std::size_t i = 0; i < n1.size(); ++i) CHECK(n1[i] == doctest::Approx(n2[i]).epsilon(1e-12));
  }
}

TEST_CASE("aggregate_documents") {
  const std::map<std::string, std::string> seg2doc = {{"s1", "d1"}, {"s2", "d1"}, {"s3", "d2"}, {"s4", "d3"}};
  const auto r = make_run("q", {{"s1", 0.2}, {"s2", 0.9}, {"s3", 0.5}, {"s4", 0.9}});
  const auto agg = aggregate_documents(r, seg2doc, 10);
  CHECK(agg.hits == std::vector<ScoredHit>{{"d1", 0.9}, {"d3", 0.9}, {"d2", 0.5}});
  CHECK(aggregate_documents(r, seg2doc, 1).hits.size() == 1);
  CHECK_THROWS_AS(aggregate_documents(make_run("q", {{"zz", 1.0}}), seg2doc), ValidationError);

  const std::map<std::string, std::string> identity = {{"a", "a"}, {"b", "b"}, {"c", "c"}};
  const auto pass = make_run("q", {{"a", 3}, {"b", 2}, {"c", 1}});
  CHECK(aggregate_documents(pass, identity, 2).hits == std::vector<ScoredHit>{{"a", 3}, {"b", 2}});
}

TEST_CASE("property: aggregation equals brute-force max and ignores input order") {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    std::map<std::string, std::string> seg2doc;
    std::vector<ScoredHit> hits;
    for (int d = 0; d < 3; ++d)
      for (int s = 0; s < 3; ++s) {
        const std::string ref = "d" + std::to_string(d) + "#" + std::to_string(s);
        seg2doc[ref] = "d" + std::to_string(d);
        hits.push_back({ref, static_cast<double>(rng.uniform_index(5))});
      }
    std::map<std::string, double> best;
    for (const auto& h : hits) best[seg2doc[h.ref]] = std::max(best.count(seg2doc[h.ref]) ? best[seg2doc[h.ref]] : -1e300, h.score);
    std::vector<ScoredHit> expect;
    for (auto& [d, s] : best) expect.push_back({d, s});
    std::sort(expect.begin(), expect.end(), hit_before);

    RunList shuffled{"q", hits, "t"};
    std::reverse(shuffled.hits.begin(), shuffled.hits.end());
    CHECK(aggregate_documents(shuffled, seg2doc, 10).hits == expect);
    CHECK(aggregate_documents(make_run("q", hits), seg2doc, 10).hits == expect);
  }
}

TEST_CASE("trec run files") {
  testing::TempDir dir;
  Run run;
  run["q1"] = make_run("q1", {{"d1", 2.5}, {"d2", 1.25}}, "bm25");
  run["q2"] = make_run("q2", {{"d9", 0.1}}, "bm25");
  write_trec_run(dir / "r.trec", run);
  CHECK(testing::read_file(dir / "r.trec").rfind("q1 Q0 d1 1 ", 0) == 0);
  const auto back = load_trec_run(dir / "r.trec");
  REQUIRE(back.size() == 2);
  CHECK(back.at("q1").hits == run["q1"].hits);
  CHECK(back.at("q1").tag == "bm25");

  testing::write_file(dir / "bad.trec", "q1 Q0 d1 1 1.0 x\nq1 Q0 d2 two 1.0 x\n");
  CHECK_THROWS_AS(load_trec_run(dir / "bad.trec"), ParseError);
  testing::write_file(dir / "dup.trec", "q1 Q0 d1 1 1.0 x\nq1 Q0 d1 2 0.5 x\n");
  CHECK_THROWS_AS(load_trec_run(dir / "dup.trec"), DataError);
}
