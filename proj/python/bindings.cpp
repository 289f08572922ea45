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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bioret/corpus.hpp"
#include "bioret/embedding.hpp"
#include "bioret/error.hpp"
#include "bioret/eval.hpp"
#include "bioret/fixture.hpp"
#include "bioret/fusion.hpp"
#include "bioret/lexical.hpp"
#include "bioret/pipeline.hpp"
#include "bioret/polydpr.hpp"
#include "bioret/pretrain.hpp"
#include "bioret/templates.hpp"
#include "bioret/trainer.hpp"

namespace py = pybind11;
using namespace bioret;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw ValidationError("ragged matrix rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::vector<std::vector<double>> from_matrix(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

py::list hits_to_list(const std::vector<ScoredHit>& hits) {
  py::list out;
  for (const auto& h : hits) out.append(py::make_tuple(h.ref, h.score));
  return out;
}

std::vector<ScoredHit> list_to_hits(const std::vector<std::pair<std::string, double>>& xs) {
  std::vector<ScoredHit> out;
  for (const auto& [ref, score] : xs) out.push_back({ref, score});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "bioret C++ core";

  auto base = py::register_exception<Error>(m, "Error");
  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto data_error = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", data_error.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", data_error.ptr());
  py::register_exception<LookupError>(m, "LookupError", data_error.ptr());
  py::register_exception<StageError>(m, "StageError", base.ptr());
  (void)config_error;

  py::class_<Document>(m, "Document")
      .def(py::init([](std::string id, std::string title, std::string abstract) {
             return Document{std::move(id), std::move(title), std::move(abstract)};
           }),
           py::arg("id"), py::arg("title") = "", py::arg("abstract") = "")
      .def_readwrite("id", &Document::id)
      .def_readwrite("title", &Document::title)
      .def_readwrite("abstract", &Document::abstract)
      .def("full_text", &Document::full_text);

  py::class_<Segment>(m, "Segment")
      .def_readonly("segment_id", &Segment::segment_id)
      .def_readonly("doc_id", &Segment::doc_id)
      .def_readonly("text", &Segment::text)
      .def_readonly("ordinal", &Segment::ordinal)
      .def_property_readonly("unit_kind", [](const Segment& s) { return std::string(unit_kind_name(s.unit_kind)); });

  m.def("load_corpus", &load_corpus);
  m.def("split_sentences", &split_sentences);
  m.def("tokenize", &tokenize);
  m.def(
      "segment_corpus",
      [](const std::vector<Document>& docs, const std::string& unit, int token_budget, bool include_title) {
        return segment_corpus(docs, SegmentOptions{parse_unit_kind(unit), token_budget, include_title, nullptr});
      },
      py::arg("docs"), py::arg("unit") = "two-sent", py::arg("token_budget") = 0, py::arg("include_title") = false);

  py::class_<CorpusStats>(m, "CorpusStats")
      .def_readonly("num_docs", &CorpusStats::num_docs)
      .def_readonly("avg_doc_len", &CorpusStats::avg_doc_len)
      .def("df", &CorpusStats::df);
  m.def("compute_stats", [](const std::vector<Document>& docs) { return compute_stats(std::span<const Document>(docs)); });
  m.def("top_keywords", &top_keywords, py::arg("text"), py::arg("stats"), py::arg("m"));

  py::class_<Bm25Index>(m, "Bm25Index")
      .def_static(
          "build",
          [](const std::vector<std::pair<std::string, std::string>>& units, double k1, double b) {
            std::vector<TextUnit> tu;
            for (const auto& [id, text] : units) tu.push_back({id, text});
            return Bm25Index::build(std::span<const TextUnit>(tu), {k1, b});
          },
          py::arg("units"), py::arg("k1") = 0.9, py::arg("b") = 0.4)
      .def("search", [](const Bm25Index& idx, const std::string& q, int k) { return hits_to_list(idx.search(q, k)); },
           py::arg("query"), py::arg("top_k") = 100)
      .def("score", [](const Bm25Index& idx, const std::string& q, const std::string& ref) {
             const auto terms = tokenize(q);
             return idx.score(terms, ref);
           })
      .def("idf", &Bm25Index::idf)
      .def("save", &Bm25Index::save)
      .def_static("load", &Bm25Index::load);

  py::class_<TrainingPair>(m, "TrainingPair")
      .def(py::init([](std::string q, std::string p) { return TrainingPair{std::move(q), std::move(p)}; }),
           py::arg("query"), py::arg("positive"))
      .def_readonly("query", &TrainingPair::query_text)
      .def_readonly("positive", &TrainingPair::positive_text)
      .def_readonly("source_doc_id", &TrainingPair::source_doc_id)
      .def_property_readonly("task", [](const TrainingPair& p) { return std::string(task_name(p.task)); });

  m.def("build_pretrain_pairs",
        [](const std::string& task, const std::vector<Document>& docs, int mm, std::uint64_t seed) {
          const auto stats = compute_stats(std::span<const Document>(docs));
          switch (parse_task(task)) {
            case Task::kEtm: return build_etm_pairs(docs, stats, mm < 0 ? kDefaultEtmKeywords : mm).pairs;
            case Task::kRsm: return build_rsm_pairs(docs, stats, mm < 0 ? kDefaultRsmWords : mm).pairs;
            case Task::kIct: return build_ict_pairs(docs, seed).pairs;
            default: throw ConfigError("task must be etm, rsm or ict");
          }
        },
        py::arg("task"), py::arg("docs"), py::arg("m") = -1, py::arg("seed") = 0);

  py::class_<EntityLexicon>(m, "EntityLexicon")
      .def(py::init<>())
      .def("add", &EntityLexicon::add, py::arg("surface"), py::arg("is_verb") = false)
      .def_static("load", &EntityLexicon::load)
      .def("__len__", &EntityLexicon::size);

  py::class_<Template>(m, "Template")
      .def(py::init([](std::string pattern) { return Template{std::move(pattern), {}, std::nullopt}; }))
      .def_readonly("pattern", &Template::pattern)
      .def_readonly("source_question_ids", &Template::source_question_ids)
      .def_readonly("cluster_id", &Template::cluster_id);

  m.def("extract_templates",
        [](const std::vector<std::pair<std::string, std::string>>& questions, const EntityLexicon& lex, int df) {
          std::vector<Question> qs;
          for (const auto& [id, text] : questions) qs.push_back({id, text});
          return extract_templates(qs, lex, df);
        },
        py::arg("questions"), py::arg("lexicon"), py::arg("df_threshold") = kDefaultDfThreshold);
  m.def("cluster_pool",
        [](const std::vector<Template>& templates, double threshold, const std::string& rule) {
          const auto clusters = cluster_templates(templates, threshold);
          return representative_pool(templates, clusters, parse_representative(rule));
        },
        py::arg("templates"), py::arg("threshold") = kDefaultClusterThreshold, py::arg("representative") = "smallest");
  m.def("fill_template",
        [](const std::string& pattern, const std::string& context, const EntityLexicon& lex) {
          return fill_template(Template{pattern, {}, std::nullopt}, context, lex);
        });

  py::class_<HashingEmbedder>(m, "HashingEmbedder")
      .def(py::init<int, std::uint64_t, int>(), py::arg("dim") = 64, py::arg("seed") = 0, py::arg("nnz") = 4)
      .def_property_readonly("id", &HashingEmbedder::id)
      .def("query_vector", &HashingEmbedder::query_vector)
      .def("token_vectors", [](const HashingEmbedder& e, const std::string& t) { return from_matrix(e.token_vectors(t)); });

  py::class_<PolyDprModel>(m, "PolyDprModel")
      .def_static("initialize", &PolyDprModel::initialize, py::arg("k") = kDefaultCodes, py::arg("dim") = 64,
                  py::arg("seed") = 0, py::arg("projection_scale") = kDefaultProjectionScale)
      .def_property_readonly("k", &PolyDprModel::num_codes)
      .def_property_readonly("dim", &PolyDprModel::dimension)
      .def_property_readonly("codes", [](const PolyDprModel& mm) { return from_matrix(mm.codes); })
      .def("save", &PolyDprModel::save)
      .def_static("load", &PolyDprModel::load);

  m.def("encode_context", [](const std::vector<std::vector<double>>& tokens, const std::vector<std::vector<double>>& codes) {
    return from_matrix(encode_context(to_matrix(tokens), to_matrix(codes)));
  });
  m.def("train_similarity", [](const std::vector<double>& q, const std::vector<std::vector<double>>& v) {
    return train_similarity(q, to_matrix(v));
  });
  m.def("infer_similarity", [](const std::vector<double>& q, const std::vector<std::vector<double>>& v) {
    return infer_similarity(q, to_matrix(v));
  });
  m.def("nll_loss", [](const std::vector<std::vector<double>>& s) { return nll_loss(to_matrix(s)); });

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("steps", &TrainReport::steps)
      .def_readonly("epoch_losses", &TrainReport::epoch_losses)
      .def_readonly("skipped_pairs", &TrainReport::skipped_pairs);
  m.def("train",
        [](PolyDprModel& model, const HashingEmbedder& emb, const std::vector<TrainingPair>& pairs,
           const std::vector<TrainingPair>& pretrain, double lr, double projection_lr, int epochs, int batch,
           std::uint64_t seed, const std::string& schedule) {
          TrainConfig tc;
          tc.learning_rate = lr;
          tc.projection_learning_rate = projection_lr;
          tc.epochs = epochs;
          tc.batch_size = batch;
          tc.seed = seed;
          tc.schedule = parse_schedule(schedule);
          return train(model, emb, tc, pairs, pretrain);
        },
        py::arg("model"), py::arg("embedder"), py::arg("pairs"), py::arg("pretrain_pairs") = std::vector<TrainingPair>{},
        py::arg("learning_rate") = 1.0, py::arg("projection_learning_rate") = 100.0, py::arg("epochs") = 1,
        py::arg("batch_size") = 32, py::arg("seed") = 0, py::arg("schedule") = "sequential");
  m.def("grad_check",
        [](int batch, int k, int dim, double eps, std::uint64_t seed, bool corrupt) {
          auto model = PolyDprModel::initialize(k, dim, seed, 1.0);
          std::optional<GradientCorruption> c;
          if (corrupt) c = GradientCorruption{};
          return grad_check(model, random_batch(batch, dim, 2, 6, seed), eps, c).max_relative_error;
        },
        py::arg("batch") = 4, py::arg("k") = 6, py::arg("dim") = 16, py::arg("epsilon") = 1e-5, py::arg("seed") = 0,
        py::arg("corrupt") = false);

  py::class_<DenseIndex>(m, "DenseIndex")
      .def_static(
          "build",
          [](const std::vector<std::pair<std::string, std::string>>& units, const HashingEmbedder& emb,
             const PolyDprModel& model) {
            std::vector<TextUnit> tu;
            for (const auto& [id, text] : units) tu.push_back({id, text});
            return build_dense_index(std::span<const TextUnit>(tu), emb, model);
          })
      .def("search",
           [](const DenseIndex& idx, const std::string& q, const HashingEmbedder& emb, const PolyDprModel& model,
              int k) { return hits_to_list(search_dense(idx, q, emb, model, k)); },
           py::arg("query"), py::arg("embedder"), py::arg("model"), py::arg("top_k") = 100)
      .def("__len__", &DenseIndex::size)
      .def("save", &DenseIndex::save)
      .def_static("load", &DenseIndex::load);

  m.def("normalize_scores", [](const std::vector<std::pair<std::string, double>>& hits) {
    return hits_to_list(normalize_scores(list_to_hits(hits)));
  });
  m.def("hybrid_fuse", [](const std::string& qid, const std::vector<std::pair<std::string, double>>& bm25,
                          const std::vector<std::pair<std::string, double>>& dense) {
    return hits_to_list(hybrid_fuse(RunList{qid, list_to_hits(bm25), "bm25"}, RunList{qid, list_to_hits(dense), "dense"}).hits);
  });
  m.def("aggregate_documents",
        [](const std::vector<std::pair<std::string, double>>& hits, const std::map<std::string, std::string>& seg_to_doc,
           int top_n) { return hits_to_list(aggregate_documents(RunList{"q", list_to_hits(hits), ""}, seg_to_doc, top_n).hits); },
        py::arg("hits"), py::arg("segment_to_doc"), py::arg("top_n") = 10);
  m.def("average_precision",
        [](const std::vector<std::string>& ranked, const std::set<std::string>& relevant, int cutoff) {
          return average_precision(ranked, relevant, cutoff);
        },
        py::arg("ranked"), py::arg("relevant"), py::arg("cutoff") = 10);
  m.def("recall_at",
        [](const std::vector<std::string>& ranked, const std::set<std::string>& relevant, int cutoff) {
          return recall_at(ranked, relevant, cutoff);
        },
        py::arg("ranked"), py::arg("relevant"), py::arg("cutoff") = 10);

  m.def("write_fixture",
        [](const std::filesystem::path& dir, std::uint64_t seed, int n_docs, int vocab_size) {
          FixtureOptions fo;
          fo.seed = seed;
          fo.n_docs = n_docs;
          fo.vocab_size = vocab_size;
          write_fixture(make_synthetic_fixture(fo), dir);
        },
        py::arg("dir"), py::arg("seed") = 1, py::arg("n_docs") = 200, py::arg("vocab_size") = 2000);

  m.def("run_pipeline",
        [](const std::map<std::string, std::string>& settings, const std::filesystem::path& base_dir) {
          PipelineConfig config;
          config.base_dir = base_dir;
          for (const auto& [k, v] : settings) config.set(k, v);
          const auto result = run_pipeline(config);
          py::dict out;
          for (const auto& [method, report] : result.reports)
            out[py::str(method)] = py::dict(py::arg("map") = report.map, py::arg("recall") = report.recall);
          py::list stages;
          for (const auto& s : result.stages) stages.append(py::make_tuple(s.name, s.cached));
          return py::make_tuple(out, stages);
        },
        py::arg("settings"), py::arg("base_dir") = std::filesystem::path("."));
}
