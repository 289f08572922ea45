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

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

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

namespace {

using namespace bioret;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitStage = 4;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

// Embedder options shared by every dense subcommand.
struct EmbedOptions {
  int dim = 64;
  int nnz = 4;
  std::uint64_t seed = 0;
  std::string vectors;

  void add(CLI::App* app) {
    app->add_option("--dim", dim, "hashing embedder dimension")->capture_default_str();
    app->add_option("--nnz", nnz, "non-zeros per hashed token")->capture_default_str();
    app->add_option("--embed-seed", seed, "hashing seed")->capture_default_str();
    app->add_option("--vectors", vectors, "precomputed vector file instead of hashing");
  }
  std::unique_ptr<EmbeddingProvider> make() const {
    if (!vectors.empty()) return std::make_unique<VectorFileProvider>(VectorFileProvider::load(vectors));
    return std::make_unique<HashingEmbedder>(dim, seed, nnz);
  }
};

std::map<std::string, std::string> segment_map(const std::string& path) {
  std::map<std::string, std::string> out;
  for (const auto& s : load_segments(path)) out[s.segment_id] = s.doc_id;
  return out;
}

void print_eval(const EvalReport& r) {
  std::printf("map@%d\t%.6f\nrecall@%d\t%.6f\nqueries\t%zu\n", r.cutoff, r.map, r.cutoff, r.recall,
              r.per_query.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bioret: biomedical passage retrieval toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "key=value pipeline config");
  app.add_option("--seed", g.seed, "global seed override");
  app.add_flag("-v,--verbose", g.verbose, "progress on stderr");

  std::function<void()> action;
  auto seed_or = [&](std::uint64_t fallback) { return g.seed.value_or(fallback); };

  // segment
  std::string corpus, out, unit = "two-sent", abbreviations;
  int token_budget = 0;
  bool include_title = false;
  auto* seg = app.add_subcommand("segment", "split a corpus into retrieval units");
  seg->add_option("--corpus", corpus)->required();
  seg->add_option("--out", out)->required();
  seg->add_option("--unit", unit, "two-sent|chunk128|chunk256|full-doc|single-sent")->capture_default_str();
  seg->add_option("--token-budget", token_budget, "chunk budget; 0 uses the unit default");
  seg->add_flag("--include-title", include_title);
  seg->add_option("--abbreviations", abbreviations, "one guarded abbreviation per line");
  seg->callback([&] {
    action = [&] {
      std::optional<SentenceSplitter> splitter;
      if (!abbreviations.empty()) splitter = SentenceSplitter::from_file(abbreviations);
      SegmentOptions opt{parse_unit_kind(unit), token_budget, include_title, splitter ? &*splitter : nullptr};
      const auto docs = load_corpus(corpus);
      const auto segs = segment_corpus(docs, opt);
      write_segments(out, segs);
      if (g.verbose) std::cerr << segs.size() << " segments\n";
    };
  });

  // stats
  std::string segments;
  auto* st = app.add_subcommand("stats", "term statistics over documents or segments");
  st->add_option("--corpus", corpus);
  st->add_option("--segments", segments);
  st->add_option("--out", out)->required();
  st->callback([&] {
    action = [&] {
      if (corpus.empty() == segments.empty()) throw ConfigError("give exactly one of --corpus or --segments");
      if (!corpus.empty()) {
        const auto docs = load_corpus(corpus);
        write_stats(out, compute_stats(std::span<const Document>(docs)));
      } else {
        const auto segs = load_segments(segments);
        write_stats(out, compute_stats(std::span<const Segment>(segs)));
      }
    };
  });

  // build-bm25
  double k1 = 0.9, b = 0.4;
  auto* bb = app.add_subcommand("build-bm25", "build a BM25 inverted index");
  bb->add_option("--segments", segments)->required();
  bb->add_option("--out", out)->required();
  bb->add_option("--k1", k1)->capture_default_str();
  bb->add_option("--b", b)->capture_default_str();
  bb->callback([&] {
    action = [&] {
      const auto segs = load_segments(segments);
      Bm25Index::build(std::span<const Segment>(segs), {k1, b}).save(out);
    };
  });

  // search-bm25
  std::string index, queries;
  int top_k = 100;
  auto* sb = app.add_subcommand("search-bm25", "BM25 search, TREC run output");
  sb->add_option("--index", index)->required();
  sb->add_option("--queries", queries)->required();
  sb->add_option("--top-k", top_k)->capture_default_str();
  sb->add_option("--out", out)->required();
  sb->callback([&] {
    action = [&] {
      if (top_k < 1) throw ConfigError("--top-k must be >= 1");
      const auto idx = Bm25Index::load(index);
      Run run;
      for (const auto& q : load_questions(queries)) run[q.id] = RunList{q.id, idx.search(q.text, top_k), "bm25"};
      write_trec_run(out, run);
    };
  });

  // gen-pretrain
  std::string task, stats_path;
  int m = -1;
  std::uint64_t seed = 0;
  auto* gp = app.add_subcommand("gen-pretrain", "ETM, RSM or ICT pre-training pairs");
  gp->add_option("--task", task, "etm|rsm|ict")->required();
  gp->add_option("--corpus", corpus)->required();
  gp->add_option("--out", out)->required();
  gp->add_option("--m", m, "keywords (ETM) or reduced-sentence words (RSM)");
  gp->add_option("--stats", stats_path, "precomputed document statistics");
  gp->add_option("--seed", seed, "ICT sentence sampling seed");
  gp->callback([&] {
    action = [&] {
      const auto docs = load_corpus(corpus);
      const auto stats = stats_path.empty() ? compute_stats(std::span<const Document>(docs)) : load_stats(stats_path);
      const Task t = parse_task(task);
      PairBatch batch;
      switch (t) {
        case Task::kEtm: batch = build_etm_pairs(docs, stats, m < 0 ? kDefaultEtmKeywords : m); break;
        case Task::kRsm: batch = build_rsm_pairs(docs, stats, m < 0 ? kDefaultRsmWords : m); break;
        case Task::kIct: batch = build_ict_pairs(docs, seed_or(seed)); break;
        default: throw ConfigError("--task must be etm, rsm or ict");
      }
      write_pairs(out, batch.pairs);
      if (g.verbose) std::cerr << batch.pairs.size() << " pairs, " << batch.skipped << " skipped\n";
    };
  });

  // extract-templates
  std::string questions, lexicon;
  int df_threshold = kDefaultDfThreshold;
  auto* et = app.add_subcommand("extract-templates", "question templates by entity blanking");
  et->add_option("--questions", questions)->required();
  et->add_option("--lexicon", lexicon)->required();
  et->add_option("--df-threshold", df_threshold)->capture_default_str();
  et->add_option("--out", out)->required();
  et->callback([&] {
    action = [&] {
      if (df_threshold < 1) throw ConfigError("--df-threshold must be >= 1");
      write_template_pool(out, extract_templates(load_questions(questions), EntityLexicon::load(lexicon), df_threshold));
    };
  });

  // cluster-templates
  std::string templates, representative = "smallest";
  double threshold = kDefaultClusterThreshold;
  auto* ct = app.add_subcommand("cluster-templates", "cluster templates, keep one representative each");
  ct->add_option("--templates", templates)->required();
  ct->add_option("--threshold", threshold)->capture_default_str();
  ct->add_option("--representative", representative, "smallest|second")->capture_default_str();
  ct->add_option("--out", out)->required();
  ct->callback([&] {
    action = [&] {
      const auto all = load_template_pool(templates);
      const auto clusters = cluster_templates(all, threshold);
      write_template_pool(out, representative_pool(all, clusters, parse_representative(representative)));
    };
  });

  // gen-questions
  std::string pool, scorer_name = "lexical", model_path;
  int n_templates = 10;
  EmbedOptions embed;
  auto* gq = app.add_subcommand("gen-questions", "fill selected templates for each segment");
  gq->add_option("--segments", segments)->required();
  gq->add_option("--pool", pool)->required();
  gq->add_option("--lexicon", lexicon)->required();
  gq->add_option("--n-templates", n_templates)->capture_default_str();
  gq->add_option("--scorer", scorer_name, "lexical|dense")->capture_default_str();
  gq->add_option("--model", model_path, "model for the dense scorer");
  embed.add(gq);
  gq->add_option("--out", out)->required();
  gq->callback([&] {
    action = [&] {
      const auto pool_t = load_template_pool(pool);
      const auto lex = EntityLexicon::load(lexicon);
      std::unique_ptr<TemplateScorer> scorer;
      std::unique_ptr<EmbeddingProvider> provider;
      std::optional<PolyDprModel> model;
      if (scorer_name == "lexical") {
        scorer = std::make_unique<LexicalTemplateScorer>(pool_t);
      } else if (scorer_name == "dense") {
        if (model_path.empty()) throw ConfigError("--scorer dense needs --model");
        provider = embed.make();
        model = PolyDprModel::load(model_path);
        scorer = std::make_unique<DenseTemplateScorer>(pool_t, *provider, *model);
      } else {
        throw ConfigError("--scorer must be lexical or dense");
      }
      write_generated_questions(out, generate_questions(load_segments(segments), pool_t, *scorer, lex, n_templates));
    };
  });

  // build-tempqg
  auto* bt = app.add_subcommand("build-tempqg", "pair generated questions with their segments");
  bt->add_option("--questions", questions, "generated questions")->required();
  bt->add_option("--segments", segments)->required();
  bt->add_option("--corpus", corpus, "pair with whole documents (long setting)");
  bt->add_option("--out", out)->required();
  bt->callback([&] {
    action = [&] {
      std::vector<Document> docs;
      if (!corpus.empty()) docs = load_corpus(corpus);
      write_pairs(out, tempqg_pairs(load_generated_questions(questions), load_segments(segments), docs).pairs);
    };
  });

  // train
  std::string pairs, pretrain_pairs, schedule = "sequential";
  int k = kDefaultCodes;
  TrainConfig tc;
  double projection_scale = kDefaultProjectionScale;
  auto* tr = app.add_subcommand("train", "train Poly-DPR codes and query projection");
  tr->add_option("--pairs", pairs)->required();
  tr->add_option("--pretrain-pairs", pretrain_pairs);
  tr->add_option("--schedule", schedule, "sequential|multitask")->capture_default_str();
  tr->add_option("--k", k)->capture_default_str();
  tr->add_option("--batch", tc.batch_size)->capture_default_str();
  tr->add_option("--epochs", tc.epochs)->capture_default_str();
  tr->add_option("--lr", tc.learning_rate)->capture_default_str();
  tr->add_option("--projection-lr", tc.projection_learning_rate)->capture_default_str();
  tr->add_option("--projection-scale", projection_scale)->capture_default_str();
  tr->add_option("--seed", seed)->capture_default_str();
  embed.add(tr);
  tr->add_option("--out", out)->required();
  tr->callback([&] {
    action = [&] {
      tc.seed = seed_or(seed);
      tc.schedule = parse_schedule(schedule);
      const auto provider = embed.make();
      auto model = PolyDprModel::initialize(k, provider->dimension(), tc.seed, projection_scale);
      const auto main = load_pairs(pairs);
      std::vector<TrainingPair> pre;
      if (!pretrain_pairs.empty()) pre = load_pairs(pretrain_pairs);
      const auto report = train(model, *provider, tc, main, pre);
      model.provenance["embedder"] = provider->id();
      model.provenance["training"] = pre.empty() ? "single-task" : schedule;
      model.provenance["steps"] = std::to_string(report.steps);
      model.save(out);
      if (g.verbose)
        for (std::size_t e = 0; e < report.epoch_losses.size(); ++e)
          std::cerr << "epoch " << e << " loss " << report.epoch_losses[e] << "\n";
    };
  });

  // grad-check
  int batches = 20, batch_size = 4, gc_dim = 16;
  double epsilon = 1e-5, tolerance = 1e-4;
  bool corrupt = false;
  auto* gc = app.add_subcommand("grad-check", "analytic versus finite-difference gradients");
  gc->add_option("--batches", batches)->capture_default_str();
  gc->add_option("--batch", batch_size)->capture_default_str();
  gc->add_option("--k", k)->capture_default_str();
  gc->add_option("--dim", gc_dim)->capture_default_str();
  gc->add_option("--epsilon", epsilon)->capture_default_str();
  gc->add_option("--tolerance", tolerance)->capture_default_str();
  gc->add_option("--seed", seed)->capture_default_str();
  gc->add_flag("--corrupt", corrupt, "negative control: add 0.1 to one gradient entry");
  gc->callback([&] {
    action = [&] {
      double worst = 0.0;
      std::string worst_param;
      for (int i = 0; i < batches; ++i) {
        const auto s = seed_or(seed) + static_cast<std::uint64_t>(i);
        auto model = PolyDprModel::initialize(k, gc_dim, s, 1.0);
        const auto batch = random_batch(batch_size, gc_dim, 2, 6, s);
        std::optional<GradientCorruption> c;
        if (corrupt) c = GradientCorruption{};
        const auto r = grad_check(model, batch, epsilon, c);
        if (r.max_relative_error > worst) {
          worst = r.max_relative_error;
          worst_param = r.worst_parameter;
        }
      }
      const bool ok = worst < tolerance;
      std::printf("max_relative_error\t%.3e\nworst_parameter\t%s\nstatus\t%s\n", worst, worst_param.c_str(),
                  ok ? "ok" : "mismatch");
      if (!ok) throw StageError("grad-check", "relative error above tolerance");
    };
  });

  // build-dense
  auto* bd = app.add_subcommand("build-dense", "encode segments into a multi-vector index");
  bd->add_option("--segments", segments)->required();
  bd->add_option("--model", model_path)->required();
  embed.add(bd);
  bd->add_option("--out", out)->required();
  bd->callback([&] {
    action = [&] {
      const auto model = PolyDprModel::load(model_path);
      const auto provider = embed.make();
      const auto segs = load_segments(segments);
      build_dense_index(std::span<const Segment>(segs), *provider, model).save(out);
    };
  });

  // search-dense
  auto* sd = app.add_subcommand("search-dense", "exact max-sim search over a dense index");
  sd->add_option("--index", index)->required();
  sd->add_option("--model", model_path)->required();
  sd->add_option("--queries", queries)->required();
  sd->add_option("--top-k", top_k)->capture_default_str();
  embed.add(sd);
  sd->add_option("--out", out)->required();
  sd->callback([&] {
    action = [&] {
      if (top_k < 1) throw ConfigError("--top-k must be >= 1");
      const auto model = PolyDprModel::load(model_path);
      const auto idx = DenseIndex::load(index);
      const auto provider = embed.make();
      if (idx.embedder_id != provider->id())
        throw ConfigError("index was built with embedder " + idx.embedder_id + ", not " + provider->id());
      if (idx.codes_checksum != model.codes_checksum()) throw ConfigError("index was built with a different model");
      Run run;
      for (const auto& q : load_questions(queries))
        run[q.id] = RunList{q.id, search_dense(idx, q.text, *provider, model, top_k), "dense"};
      write_trec_run(out, run);
    };
  });

  // hybrid
  std::string bm25_run, dense_run;
  auto* hy = app.add_subcommand("hybrid", "sum of min-max normalized BM25 and dense scores");
  hy->add_option("--bm25-run", bm25_run)->required();
  hy->add_option("--dense-run", dense_run)->required();
  hy->add_option("--out", out)->required();
  hy->callback([&] {
    action = [&] {
      const auto a = load_trec_run(bm25_run);
      const auto b2 = load_trec_run(dense_run);
      Run fused;
      for (const auto& [qid, list] : a) {
        auto it = b2.find(qid);
        fused[qid] = hybrid_fuse(list, it == b2.end() ? RunList{qid, {}, "dense"} : it->second);
      }
      for (const auto& [qid, list] : b2)
        if (!fused.count(qid)) fused[qid] = hybrid_fuse(RunList{qid, {}, "bm25"}, list);
      write_trec_run(out, fused);
    };
  });

  // aggregate
  std::string run_path;
  int top_n = 10;
  auto* ag = app.add_subcommand("aggregate", "segment run to document run by max score");
  ag->add_option("--run", run_path)->required();
  ag->add_option("--segments", segments)->required();
  ag->add_option("--top-n", top_n)->capture_default_str();
  ag->add_option("--out", out)->required();
  ag->callback([&] {
    action = [&] {
      const auto map = segment_map(segments);
      Run docs;
      for (const auto& [qid, list] : load_trec_run(run_path)) docs[qid] = aggregate_documents(list, map, top_n);
      write_trec_run(out, docs);
    };
  });

  // eval
  std::string qrels;
  int cutoff = 10;
  auto* ev = app.add_subcommand("eval", "MAP and recall at a cutoff");
  ev->add_option("--run", run_path)->required();
  ev->add_option("--qrels", qrels)->required();
  ev->add_option("--cutoff", cutoff)->capture_default_str();
  ev->add_option("--out", out, "JSON report");
  ev->callback([&] {
    action = [&] {
      if (cutoff < 1) throw ConfigError("--cutoff must be >= 1");
      const auto report = evaluate_run(load_trec_run(run_path), load_qrels(qrels), cutoff);
      print_eval(report);
      if (!out.empty()) write_eval_report(out, report);
    };
  });

  // fixture
  FixtureOptions fo;
  auto* fx = app.add_subcommand("fixture", "write the synthetic benchmark corpus");
  fx->add_option("--out", out, "output directory")->required();
  fx->add_option("--n-docs", fo.n_docs)->capture_default_str();
  fx->add_option("--vocab-size", fo.vocab_size)->capture_default_str();
  fx->add_option("--sentences", fo.sentences_per_doc)->capture_default_str();
  fx->add_option("--filler-rate", fo.filler_rate)->capture_default_str();
  fx->callback([&] {
    action = [&] {
      fo.seed = seed_or(fo.seed);
      write_fixture(make_synthetic_fixture(fo), out);
    };
  });

  // pipeline
  std::vector<std::string> overrides;
  auto* pl = app.add_subcommand("pipeline", "run the cached end-to-end pipeline");
  pl->add_option("--set", overrides, "key=value override, repeatable");
  pl->callback([&] {
    action = [&] {
      PipelineConfig config = g.config.empty() ? PipelineConfig{} : PipelineConfig::load(g.config);
      if (g.config.empty()) config.base_dir = ".";
      for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (g.seed) config.set("seed", std::to_string(*g.seed));
      const auto result = run_pipeline(config, g.verbose ? &std::cerr : nullptr);
      for (const auto& [method, report] : result.reports)
        std::printf("%s\tmap@%d\t%.6f\trecall@%d\t%.6f\n", method.c_str(), report.cutoff, report.map,
                    report.cutoff, report.recall);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
}
