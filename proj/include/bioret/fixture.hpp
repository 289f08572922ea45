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

#ifndef BIORET_FIXTURE_HPP_
#define BIORET_FIXTURE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bioret/corpus.hpp"
#include "bioret/eval.hpp"
#include "bioret/templates.hpp"

namespace bioret {

struct FixtureOptions {
  std::uint64_t seed = 1;
  int n_docs = 200;
  int vocab_size = 2000;  // content words, Zipf distributed
  int sentences_per_doc = 6;
  double filler_rate = 0.65;  // share of background-sentence words drawn from a closed filler list
};

/// A synthetic biomedical-style corpus with planted rare entities.
///
/// Every document carries two unique entity codes ("KXR-417") planted in
/// two consecutive abstract sentences together with a few topic words.
/// Every second document gets a test query built from its planted span
/// (entities plus topic words), so each query references exactly one
/// document. A separate question set with unrelated entity codes feeds
/// template extraction, and the lexicon lists every entity code.
struct Fixture {
  std::vector<Document> docs;
  std::vector<Question> queries;
  Qrels qrels;
  std::vector<Question> train_questions;
  EntityLexicon lexicon;
  // Planted entities per document id, for verification.
  std::map<std::string, std::vector<std::string>> planted;
};

/// Throws ConfigError when n_docs < 10 or vocab_size < 50.
Fixture make_synthetic_fixture(const FixtureOptions& options);

/// Writes corpus.jsonl, queries.jsonl, qrels.tsv, questions.jsonl and
/// lexicon.tsv into `dir`.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

}  // namespace bioret

#endif  // BIORET_FIXTURE_HPP_
