#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "apslda/corpus.hpp"
#include "apslda/trainer.hpp"

namespace apslda {

// All-in-one training with real threads: shards, workers and the driver-side
// client live on one in-process transport, each node on its own dispatcher
// thread. Not deterministic (thread interleavings pick the schedule); the
// protocol guarantees still make every drain barrier quiescent and exact.
class ThreadedCluster {
 public:
  ThreadedCluster(const TrainerConfig& cfg, Corpus corpus);
  ~ThreadedCluster();

  ThreadedCluster(const ThreadedCluster&) = delete;
  ThreadedCluster& operator=(const ThreadedCluster&) = delete;

  TrainedModel train(const Corpus* test = nullptr, std::ostream* progress = nullptr);

  // Safe from any thread, including while train() runs on another: rows are
  // per-row snapshots, possibly mid-iteration.
  CountMatrix pull_model();
  std::vector<std::vector<std::pair<uint32_t, int64_t>>> top_words(uint32_t n);

  bool finished() const;
  uint32_t vocab_size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

TrainedModel train_threaded(const TrainerConfig& cfg, Corpus corpus, const Corpus* test = nullptr,
                            std::ostream* progress = nullptr);

// One process of a multi-process run. All processes must be launched with the
// same dataset and trainer flags; the driver only coordinates.
struct ProcessConfig {
  TrainerConfig trainer;
  std::string listen_addr;  // this process
  std::string driver_addr;  // driver's listen address (server/worker/observer)
  std::string dataset;
  uint32_t declared_vocab = 0;
  double split_ratio = 0.0;  // 0 = train on everything, no evaluation
  std::string out_csv;       // driver: model export path ("" = none)
};

int run_server_process(const ProcessConfig& cfg);
int run_worker_process(const ProcessConfig& cfg);
int run_driver_process(const ProcessConfig& cfg, std::ostream& out, std::ostream& err);

// Attaches to a running driver and prints the top-n words per topic every
// interval_ms until the run shuts down.
int run_topwords_observer(const std::string& driver_addr, const std::string& listen_addr,
                          uint32_t top_n, uint64_t interval_ms, std::ostream& out);

// Registration roles use node ids in this range; real ids are assigned by
// the driver.
NodeId random_bootstrap_id();

}  // namespace apslda
