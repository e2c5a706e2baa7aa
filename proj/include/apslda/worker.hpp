#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "apslda/corpus.hpp"
#include "apslda/psclient.hpp"
#include "apslda/sampler.hpp"
#include "apslda/transport.hpp"
#include "apslda/types.hpp"

namespace apslda {

struct IterationOutcome {
  bool ok = false;
  uint64_t pushes = 0;  // pushes drained during this iteration
  std::string error;
};

// One logical worker: owns a partition of documents exclusively and runs one
// iteration as an event-driven pipeline. It synchronously pulls the topic
// totals, then streams word rows through a bounded pull window; rows are
// processed in ascending word order, each arrival building an alias table
// and resampling that word's tokens, with net count changes pushed while
// later rows are still in flight. The iteration completes when every word is
// processed and all pushes are Done.
class WorkerNode : public Node {
 public:
  WorkerNode(Transport* transport, NodeId id, PsTopology topo, BackoffPolicy backoff,
             Hyperparams hp, std::vector<DocState> docs, uint32_t mh_steps,
             uint64_t sampler_seed, uint32_t pull_window = 16, uint32_t inflight_cap = 256);

  // Pushes the +1 deltas implied by the current assignments through the
  // exactly-once path. cb fires once the push is Done.
  void push_initial_counts(std::function<void(bool)> cb);

  void begin_iteration(std::function<void(const IterationOutcome&)> on_done);

  void on_message(NodeId src, const Message& m) override;
  void on_timer(uint64_t token) override;

  // Control messages not consumed by the pull/push client (cluster mode).
  void set_control_handler(std::function<void(NodeId, const Message&)> h) {
    control_handler_ = std::move(h);
  }

  const std::vector<DocState>& docs() const { return docs_; }
  PsClient& client() { return client_; }
  bool failed() const { return failed_; }
  const std::string& failure() const { return failure_; }
  NodeId id() const { return id_; }

 private:
  void fail(const std::string& why);
  void issue_pulls();
  void try_process();
  void process_word(uint32_t word, std::vector<int64_t> row);
  void check_done();

  Transport* transport_;
  NodeId id_;
  Hyperparams hp_;
  std::vector<DocState> docs_;
  uint32_t mh_steps_;
  Rng rng_;
  uint32_t pull_window_;
  PsClient client_;

  // Tokens grouped by word; words ascending, tokens in (doc, position) order.
  std::vector<uint32_t> words_;
  std::vector<std::vector<TokenRef>> tokens_by_word_;

  enum class Phase { kIdle, kPullingTotals, kRunning, kDone } phase_ = Phase::kIdle;
  std::vector<int64_t> totals_live_;  // n_k view: iteration snapshot + own deltas
  size_t next_issue_ = 0;
  size_t next_process_ = 0;
  size_t outstanding_pulls_ = 0;
  std::map<uint32_t, std::vector<int64_t>> arrived_;
  uint64_t iter_push_base_ = 0;
  std::function<void(const IterationOutcome&)> on_done_;
  bool failed_ = false;
  std::string failure_;
  std::function<void(NodeId, const Message&)> control_handler_;
};

// Builds per-worker DocStates for a partition of the corpus (assignments
// must already be initialized).
std::vector<DocState> build_doc_states(const Corpus& corpus, const Partition& part,
                                       uint32_t num_topics);

}  // namespace apslda
