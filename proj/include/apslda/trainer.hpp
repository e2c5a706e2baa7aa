#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "apslda/client_node.hpp"
#include "apslda/corpus.hpp"
#include "apslda/eval.hpp"
#include "apslda/paramserver.hpp"
#include "apslda/psclient.hpp"
#include "apslda/reference.hpp"
#include "apslda/sim_transport.hpp"
#include "apslda/worker.hpp"

namespace apslda {

struct TrainerConfig {
  uint32_t topics = 20;
  double alpha = 0.05;
  double beta = 0.01;
  uint32_t iterations = 50;
  uint32_t mh_steps = 2;
  uint32_t workers = 1;
  uint32_t shards = 1;
  uint64_t seed = 0;
  uint32_t eval_every = 1;  // iterations between perplexity reports; 0 = off
  uint32_t top_n = 10;
  uint32_t pull_window = 16;    // outstanding row pulls per worker
  uint32_t inflight_cap = 256;  // outstanding pushes per worker
  // Training runs keep the spec'd schedule but allow deeper retry chains;
  // with the library default of 8 a long faulty run would abort with near
  // certainty even though every individual loss is recoverable.
  BackoffPolicy backoff{50, 2.0, 48};
  uint32_t foldin_passes = kFoldinPasses;
  uint32_t foldin_burnin = kFoldinBurnin;

  void validate() const;
  Hyperparams hyperparams(uint32_t vocab_size) const;
};

struct IterationStats {
  uint32_t iteration = 0;
  uint64_t drained_pushes = 0;
  bool has_perplexity = false;
  double perplexity = 0.0;
};

struct TrainedModel {
  CountMatrix counts;
  Hyperparams hp;
  std::vector<IterationStats> history;
  bool has_final_perplexity = false;
  double final_perplexity = 0.0;
};

// Formats the per-iteration progress line: iter=<i> drained_pushes=<n>
// perplexity=<p|->  (6 significant digits).
std::string progress_line(const IterationStats& s);

// All-in-one deterministic cluster on the simulated transport: `shards`
// shard nodes, `workers` worker nodes and one auxiliary client, single
// threaded, driven by the virtual clock. Every run with the same config,
// corpus and fault plan is bit-identical.
class SimCluster {
 public:
  SimCluster(const TrainerConfig& cfg, Corpus corpus, FaultPlan plan = {});

  // Full run: initial counts, `iterations` x (resample + drain barrier +
  // optional evaluation), final model pull.
  TrainedModel train(const Corpus* test = nullptr, std::ostream* progress = nullptr);

  // Individual phases, exposed for tests and the top-words view.
  void push_initial();
  IterationStats run_iteration(uint32_t iteration);  // includes the drain barrier
  CountMatrix pull_model();
  std::vector<std::vector<std::pair<uint32_t, int64_t>>> top_words(uint32_t n);

  SimTransport& transport() { return *sim_; }
  uint32_t num_shards() const { return static_cast<uint32_t>(shards_.size()); }
  ShardState& shard_state(uint32_t shard) { return shards_.at(shard)->state(); }
  const WorkerNode& worker(uint32_t i) const { return *workers_.at(i); }
  std::vector<DocState> all_docs() const;  // corpus order (partitions are blocks)
  const Hyperparams& hyperparams() const { return hp_; }
  uint64_t seed() const { return cfg_.seed; }

  // Fires after each iteration's drain barrier, before evaluation.
  std::function<void(SimCluster&, uint32_t iteration)> on_iteration_end;

 private:
  TrainerConfig cfg_;
  Corpus corpus_;
  Hyperparams hp_;
  PsTopology topo_;
  std::unique_ptr<SimTransport> sim_;
  std::vector<std::unique_ptr<ShardNode>> shards_;
  std::vector<std::unique_ptr<WorkerNode>> workers_;
  std::unique_ptr<ClientNode> aux_;
};

// Convenience wrapper: split if a ratio is requested, train, evaluate.
TrainedModel train_in_simulator(const TrainerConfig& cfg, Corpus corpus,
                                const Corpus* test = nullptr, FaultPlan plan = {},
                                std::ostream* progress = nullptr);

}  // namespace apslda
