#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "apslda/synthetic.hpp"
#include "apslda/trainer.hpp"
#include "support/test_support.hpp"

using namespace apslda;
using namespace apslda::testing;

namespace {

FaultPlan faults(double drop, double dup, uint64_t dmax) {
  FaultPlan p;
  p.drop_prob = drop;
  p.dup_prob = dup;
  p.delay_min_ms = 1;
  p.delay_max_ms = dmax;
  return p;
}

SyntheticSpec small_spec(uint32_t docs, uint32_t vocab, uint32_t topics, uint64_t seed) {
  SyntheticSpec s;
  s.docs = docs;
  s.vocab_size = vocab;
  s.topics = topics;
  s.min_doc_len = 8;
  s.max_doc_len = 16;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("one iteration, one worker, zero loss: model equals a recount") {
  TrainerConfig cfg;
  cfg.topics = 4;
  cfg.iterations = 1;
  cfg.workers = 1;
  cfg.shards = 2;
  cfg.seed = 11;
  cfg.eval_every = 0;

  SimCluster cluster(cfg, make_planted_corpus(small_spec(50, 30, 3, 1)));
  const TrainedModel model = cluster.train();

  const CountMatrix expect = recount(cluster.all_docs(), 30, 4);
  CHECK(counts_equal(model.counts, expect));
}

TEST_CASE("iterations=0 is rejected") {
  TrainerConfig cfg;
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgError);
}

TEST_CASE("fixed seed runs are bit-identical") {
  TrainerConfig cfg;
  cfg.topics = 5;
  cfg.iterations = 4;
  cfg.workers = 2;
  cfg.shards = 2;
  cfg.seed = 21;
  cfg.eval_every = 2;

  const Corpus corpus = make_planted_corpus(small_spec(80, 40, 4, 2));
  auto [train, test] = split_corpus(corpus, 0.9, cfg.seed);

  SimCluster a(cfg, train, faults(0.2, 0.1, 20));
  const TrainedModel ma = a.train(&test);
  SimCluster b(cfg, train, faults(0.2, 0.1, 20));
  const TrainedModel mb = b.train(&test);

  CHECK(counts_equal(ma.counts, mb.counts));
  REQUIRE(ma.history.size() == mb.history.size());
  for (size_t i = 0; i < ma.history.size(); ++i) {
    CHECK(ma.history[i].drained_pushes == mb.history[i].drained_pushes);
    CHECK(ma.history[i].has_perplexity == mb.history[i].has_perplexity);
    if (ma.history[i].has_perplexity)
      CHECK(ma.history[i].perplexity == mb.history[i].perplexity);  // bitwise
  }

  const auto da = a.all_docs(), db = b.all_docs();
  REQUIRE(da.size() == db.size());
  for (size_t i = 0; i < da.size(); ++i) CHECK(da[i].topics == db[i].topics);
}

TEST_CASE("single worker matches the serial reference, any delay schedule") {
  TrainerConfig cfg;
  cfg.topics = 6;
  cfg.iterations = 3;
  cfg.workers = 1;
  cfg.shards = 2;
  cfg.seed = 33;
  cfg.eval_every = 0;

  Corpus corpus = make_planted_corpus(small_spec(60, 25, 3, 3));

  // Reference path: same initialization, same sampler stream.
  Corpus ref_corpus = corpus;
  init_assignments(ref_corpus, cfg.topics, cfg.seed);
  Partition all;
  all.worker_id = 0;
  for (uint32_t i = 0; i < ref_corpus.docs.size(); ++i) all.doc_ids.push_back(i);
  const Hyperparams hp = cfg.hyperparams(ref_corpus.vocab_size);
  const ReferenceResult ref =
      reference_train(build_doc_states(ref_corpus, all, cfg.topics), hp, cfg.iterations,
                      cfg.mh_steps, derive_seed(cfg.seed, Stream::kSampler, 0));

  // Distributed path with jittered delays (responses may arrive out of order;
  // the worker still processes rows in ascending word order).
  SimCluster cluster(cfg, corpus, faults(0, 0, 17));
  const TrainedModel model = cluster.train();

  CHECK(counts_equal(model.counts, ref.counts));
  const auto docs = cluster.all_docs();
  REQUIRE(docs.size() == ref.docs.size());
  for (size_t i = 0; i < docs.size(); ++i) CHECK(docs[i].topics == ref.docs[i].topics);
}

TEST_CASE("conservation holds at every drain barrier under faults") {
  TrainerConfig cfg;
  cfg.topics = 4;
  cfg.iterations = 5;
  cfg.workers = 3;
  cfg.shards = 2;
  cfg.seed = 44;
  cfg.eval_every = 0;

  const Corpus corpus = make_planted_corpus(small_spec(100, 30, 3, 4));
  const std::vector<int64_t> freq = word_frequencies(corpus);
  const int64_t n_tokens = static_cast<int64_t>(corpus.total_tokens);

  SimCluster cluster(cfg, corpus, faults(0.25, 0.15, 25));
  int barriers = 0;
  cluster.on_iteration_end = [&](SimCluster& c, uint32_t) {
    ++barriers;
    const CountMatrix server = server_counts(c);
    int64_t nk_sum = 0;
    for (int64_t v : server.topic_totals) {
      CHECK(v >= 0);
      nk_sum += v;
    }
    CHECK(nk_sum == n_tokens);
    for (uint32_t w = 0; w < server.vocab_size; ++w) {
      int64_t row_sum = 0;
      for (uint32_t k = 0; k < server.num_topics; ++k) {
        CHECK(server.wt(w, k) >= 0);
        row_sum += server.wt(w, k);
      }
      CHECK(row_sum == freq[w]);
    }
    // Cell-exact against a recount of the live assignments.
    CHECK(counts_equal(server, recount(c.all_docs(), server.vocab_size, server.num_topics)));
  };
  cluster.train();
  CHECK(barriers == 5);
}

TEST_CASE("training perplexity trends downward on a planted corpus") {
  TrainerConfig cfg;
  cfg.topics = 5;
  cfg.iterations = 12;
  cfg.workers = 2;
  cfg.shards = 2;
  cfg.seed = 55;
  cfg.eval_every = 1;

  const Corpus corpus = make_planted_corpus(small_spec(300, 60, 3, 5));
  auto [train, test] = split_corpus(corpus, 0.9, cfg.seed);
  SimCluster cluster(cfg, train);
  const TrainedModel model = cluster.train(&test);

  REQUIRE(model.history.size() == 12);
  std::vector<double> first, last;
  for (size_t i = 0; i < 5; ++i) first.push_back(model.history[i].perplexity);
  for (size_t i = 7; i < 12; ++i) last.push_back(model.history[i].perplexity);
  std::sort(first.begin(), first.end());
  std::sort(last.begin(), last.end());
  CHECK(last[2] < first[2]);  // median of last five < median of first five
}

TEST_CASE("progress line format") {
  IterationStats s;
  s.iteration = 3;
  s.drained_pushes = 12;
  CHECK(progress_line(s) == "iter=3 drained_pushes=12 perplexity=-");
  s.has_perplexity = true;
  s.perplexity = 123.456789;
  CHECK(progress_line(s) == "iter=3 drained_pushes=12 perplexity=123.457");
}

TEST_CASE("iteration progress lines go to the stream") {
  TrainerConfig cfg;
  cfg.topics = 3;
  cfg.iterations = 2;
  cfg.seed = 66;
  cfg.eval_every = 0;
  SimCluster cluster(cfg, make_planted_corpus(small_spec(20, 10, 2, 6)));
  std::ostringstream oss;
  cluster.train(nullptr, &oss);
  CHECK(oss.str().find("iter=1 drained_pushes=") == 0);
  CHECK(oss.str().find("perplexity=-") != std::string::npos);
}

TEST_CASE("top words: uniform ties resolve to lowest word ids") {
  CountMatrix m;
  m.vocab_size = 6;
  m.num_topics = 2;
  m.word_topic.assign(12, 0);
  m.topic_totals.assign(2, 0);
  const auto top = top_words_from(m, 3);
  REQUIRE(top.size() == 2);
  for (const auto& t : top) {
    REQUIRE(t.size() == 3);
    CHECK(t[0].first == 0);
    CHECK(t[1].first == 1);
    CHECK(t[2].first == 2);
  }
  // n > V clamps to all words.
  CHECK(top_words_from(m, 100)[0].size() == 6);
  CHECK_THROWS_AS(top_words_from(m, 0), ArgError);
}

TEST_CASE("drained runs leave no dedup state behind") {
  TrainerConfig cfg;
  cfg.topics = 3;
  cfg.iterations = 3;
  cfg.workers = 2;
  cfg.shards = 2;
  cfg.seed = 77;
  cfg.eval_every = 0;
  SimCluster cluster(cfg, make_planted_corpus(small_spec(40, 20, 2, 7)));
  cluster.train();
  for (uint32_t s = 0; s < cluster.num_shards(); ++s)
    CHECK(cluster.shard_state(s).applied_txid_count() == 0);
}
