#include "apslda/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "apslda/error.hpp"
#include "apslda/log.hpp"

namespace apslda {

void TrainerConfig::validate() const {
  if (topics < 1) throw ArgError("topics must be >= 1");
  if (iterations < 1) throw ArgError("iterations must be >= 1");
  if (mh_steps < 1) throw ArgError("mh-steps must be >= 1");
  if (workers < 1) throw ArgError("workers must be >= 1");
  if (shards < 1) throw ArgError("shards must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ArgError("alpha and beta must be > 0");
  if (foldin_passes < 1 || foldin_burnin >= foldin_passes)
    throw ArgError("fold-in needs passes >= 1 and burnin < passes");
}

Hyperparams TrainerConfig::hyperparams(uint32_t vocab_size) const {
  Hyperparams hp;
  hp.num_topics = topics;
  hp.alpha = alpha;
  hp.beta = beta;
  hp.vocab_size = vocab_size;
  return hp;
}

std::string progress_line(const IterationStats& s) {
  char buf[96];
  if (s.has_perplexity)
    std::snprintf(buf, sizeof(buf), "iter=%u drained_pushes=%llu perplexity=%.6g", s.iteration,
                  static_cast<unsigned long long>(s.drained_pushes), s.perplexity);
  else
    std::snprintf(buf, sizeof(buf), "iter=%u drained_pushes=%llu perplexity=-", s.iteration,
                  static_cast<unsigned long long>(s.drained_pushes));
  return buf;
}

SimCluster::SimCluster(const TrainerConfig& cfg, Corpus corpus, FaultPlan plan)
    : cfg_(cfg), corpus_(std::move(corpus)) {
  cfg_.validate();
  if (corpus_.vocab_size == 0) corpus_.vocab_size = 1;  // degenerate empty corpus
  hp_ = cfg_.hyperparams(corpus_.vocab_size);

  plan.seed = cfg_.seed;
  sim_ = std::make_unique<SimTransport>(plan);

  topo_.rows = RowPartitioning(corpus_.vocab_size, cfg_.shards);
  topo_.num_topics = cfg_.topics;
  for (uint32_t s = 0; s < cfg_.shards; ++s) topo_.shard_nodes.push_back(s);

  for (uint32_t s = 0; s < cfg_.shards; ++s) {
    shards_.push_back(std::make_unique<ShardNode>(sim_.get(), s, topo_.rows, cfg_.topics));
    sim_->add_node(s, shards_.back().get());
  }

  init_assignments(corpus_, cfg_.topics, cfg_.seed);
  const std::vector<Partition> parts = partition(corpus_, cfg_.workers);
  for (uint32_t w = 0; w < cfg_.workers; ++w) {
    const NodeId id = cfg_.shards + w;
    workers_.push_back(std::make_unique<WorkerNode>(
        sim_.get(), id, topo_, cfg_.backoff, hp_, build_doc_states(corpus_, parts[w], cfg_.topics),
        cfg_.mh_steps, derive_seed(cfg_.seed, Stream::kSampler, w), cfg_.pull_window,
        cfg_.inflight_cap));
    sim_->add_node(id, workers_.back().get());
  }

  const NodeId aux_id = cfg_.shards + cfg_.workers;
  aux_ = std::make_unique<ClientNode>(sim_.get(), aux_id, topo_, cfg_.backoff);
  sim_->add_node(aux_id, aux_.get());
}

void SimCluster::push_initial() {
  size_t done = 0;
  bool ok = true;
  for (auto& w : workers_)
    w->push_initial_counts([&](bool pushed) {
      ok = ok && pushed;
      ++done;
    });
  pump_until(*sim_, [&] { return done == workers_.size(); });
  if (!ok) throw TransportError("initial count push failed");
}

IterationStats SimCluster::run_iteration(uint32_t iteration) {
  size_t done = 0;
  uint64_t pushes = 0;
  std::string error;
  for (auto& w : workers_)
    w->begin_iteration([&](const IterationOutcome& out) {
      ++done;
      pushes += out.pushes;
      if (!out.ok && error.empty()) error = out.error;
    });
  // Drain barrier: every worker has processed its words and completed all
  // pushes; server state is quiescent.
  pump_until(*sim_, [&] { return done == workers_.size(); });
  if (!error.empty()) throw TransportError("iteration " + std::to_string(iteration) +
                                           " aborted: " + error);
  IterationStats stats;
  stats.iteration = iteration;
  stats.drained_pushes = pushes;
  return stats;
}

CountMatrix SimCluster::pull_model() {
  std::vector<uint32_t> rows(corpus_.vocab_size);
  for (uint32_t w = 0; w < corpus_.vocab_size; ++w) rows[w] = w;
  rows.push_back(kTopicCountsRow);

  PullResult r = pull_blocking(aux_->client(), std::move(rows), [this] {
    if (!sim_->advance_next()) throw TransportError("simulation deadlock during model pull");
  });
  if (!r.ok) throw TransportError("model pull failed: " + r.error);

  CountMatrix m;
  m.vocab_size = corpus_.vocab_size;
  m.num_topics = cfg_.topics;
  m.word_topic.assign(r.values.begin(), r.values.begin() + size_t(corpus_.vocab_size) * cfg_.topics);
  m.topic_totals.assign(r.values.end() - cfg_.topics, r.values.end());
  return m;
}

std::vector<std::vector<std::pair<uint32_t, int64_t>>> SimCluster::top_words(uint32_t n) {
  return top_words_from(pull_model(), n);
}

std::vector<DocState> SimCluster::all_docs() const {
  std::vector<DocState> out;
  for (const auto& w : workers_)
    for (const DocState& d : w->docs()) out.push_back(d);
  return out;
}

TrainedModel SimCluster::train(const Corpus* test, std::ostream* progress) {
  push_initial();

  TrainedModel model;
  model.hp = hp_;
  const bool eval_on = test != nullptr && !test->docs.empty() && cfg_.eval_every > 0;
  for (uint32_t iter = 1; iter <= cfg_.iterations; ++iter) {
    IterationStats stats = run_iteration(iter);
    if (on_iteration_end) on_iteration_end(*this, iter);
    if (eval_on && iter % cfg_.eval_every == 0) {
      const TopicModelEstimate est = make_estimate(pull_model(), hp_);
      stats.has_perplexity = true;
      stats.perplexity =
          perplexity(est, test->docs, hp_, cfg_.seed, cfg_.foldin_passes, cfg_.foldin_burnin);
    }
    if (progress) *progress << progress_line(stats) << "\n";
    model.history.push_back(stats);
  }

  model.counts = pull_model();
  if (eval_on) {
    if (!model.history.empty() && model.history.back().has_perplexity) {
      model.final_perplexity = model.history.back().perplexity;
    } else {
      const TopicModelEstimate est = make_estimate(model.counts, hp_);
      model.final_perplexity =
          perplexity(est, test->docs, hp_, cfg_.seed, cfg_.foldin_passes, cfg_.foldin_burnin);
    }
    model.has_final_perplexity = true;
  }
  return model;
}

TrainedModel train_in_simulator(const TrainerConfig& cfg, Corpus corpus, const Corpus* test,
                                FaultPlan plan, std::ostream* progress) {
  SimCluster cluster(cfg, std::move(corpus), plan);
  return cluster.train(test, progress);
}

}  // namespace apslda
