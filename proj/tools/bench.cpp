// Throughput comparison: serial in-memory training vs the asynchronous
// cluster (simulated and threaded), plus serial vs OpenMP fold-in.
#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "apslda/cluster.hpp"
#include "apslda/eval.hpp"
#include "apslda/reference.hpp"
#include "apslda/synthetic.hpp"
#include "apslda/trainer.hpp"
#include "apslda/worker.hpp"

using namespace apslda;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double tokens_per_sec(uint64_t tokens, uint32_t iters, double secs) {
  return static_cast<double>(tokens) * iters / secs;
}

}  // namespace

int main(int argc, char** argv) {
  SyntheticSpec spec;
  spec.vocab_size = 500;
  spec.docs = 2000;
  spec.topics = 10;
  spec.seed = 42;
  uint32_t iters = 10;
  if (argc > 1) spec.docs = static_cast<uint32_t>(std::stoul(argv[1]));
  if (argc > 2) iters = static_cast<uint32_t>(std::stoul(argv[2]));

  TrainerConfig cfg;
  cfg.topics = 20;
  cfg.iterations = iters;
  cfg.seed = 42;
  cfg.eval_every = 0;

  Corpus corpus = make_planted_corpus(spec);
  std::printf("corpus: %u docs, %llu tokens, V=%u, K=%u, %u iterations\n", spec.docs,
              static_cast<unsigned long long>(corpus.total_tokens), corpus.vocab_size, cfg.topics,
              iters);

  {
    Corpus c = corpus;
    init_assignments(c, cfg.topics, cfg.seed);
    Partition all;
    all.worker_id = 0;
    for (uint32_t i = 0; i < c.docs.size(); ++i) all.doc_ids.push_back(i);
    auto docs = build_doc_states(c, all, cfg.topics);
    const Hyperparams hp = cfg.hyperparams(c.vocab_size);
    const auto t0 = std::chrono::steady_clock::now();
    reference_train(std::move(docs), hp, iters, cfg.mh_steps,
                    derive_seed(cfg.seed, Stream::kSampler, 0));
    const double secs = seconds_since(t0);
    std::printf("serial reference      : %7.2fs  %10.0f tokens/s\n", secs,
                tokens_per_sec(corpus.total_tokens, iters, secs));
  }

  {
    cfg.workers = 1;
    cfg.shards = 1;
    const auto t0 = std::chrono::steady_clock::now();
    train_in_simulator(cfg, corpus);
    const double secs = seconds_since(t0);
    std::printf("simulated, 1 worker   : %7.2fs  %10.0f tokens/s\n", secs,
                tokens_per_sec(corpus.total_tokens, iters, secs));
  }

  for (uint32_t workers : {2u, 4u}) {
    cfg.workers = workers;
    cfg.shards = 2;
    const auto t0 = std::chrono::steady_clock::now();
    train_threaded(cfg, corpus);
    const double secs = seconds_since(t0);
    std::printf("threaded, %u workers   : %7.2fs  %10.0f tokens/s\n", workers, secs,
                tokens_per_sec(corpus.total_tokens, iters, secs));
  }

  {
    cfg.workers = 1;
    cfg.shards = 1;
    auto [train, test] = split_corpus(corpus, 0.9, cfg.seed);
    const TrainedModel model = train_in_simulator(cfg, std::move(train));
    const TopicModelEstimate est = make_estimate(model.counts, model.hp);
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    auto t0 = std::chrono::steady_clock::now();
    const double pp1 = perplexity(est, test.docs, model.hp, cfg.seed);
    const double serial_secs = seconds_since(t0);
#ifdef _OPENMP
    omp_set_num_threads(max_threads);
    t0 = std::chrono::steady_clock::now();
    const double pp2 = perplexity(est, test.docs, model.hp, cfg.seed);
    const double par_secs = seconds_since(t0);
    std::printf("fold-in eval          : %7.2fs serial, %.2fs with %d threads (pp %.4g / %.4g)\n",
                serial_secs, par_secs, max_threads, pp1, pp2);
#else
    std::printf("fold-in eval          : %7.2fs serial (pp %.4g)\n", serial_secs, pp1);
#endif
  }
  return 0;
}
