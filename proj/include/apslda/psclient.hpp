#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "apslda/paramserver.hpp"
#include "apslda/transport.hpp"
#include "apslda/types.hpp"

namespace apslda {

// timeout(i) = initial * multiplier^i for the i-th attempt (0-based); the
// operation fails once max_retries attempts have all timed out.
struct BackoffPolicy {
  uint64_t initial_timeout_ms = 50;
  double multiplier = 2.0;
  uint32_t max_retries = 8;

  uint64_t timeout_for_attempt(uint32_t attempt) const;
};

// Dimensions plus shard placement of the shared state: the V x K word-topic
// matrix (rows 0..V-1) and the length-K topic-count vector (the designated
// row on shard 0).
struct PsTopology {
  RowPartitioning rows;               // over V word rows
  std::vector<NodeId> shard_nodes;    // index = shard id
  uint32_t num_topics = 1;

  uint32_t vocab_size() const { return rows.rows(); }
};

struct PullResult {
  bool ok = false;
  std::string error;
  std::vector<int64_t> values;  // row-major, K per row, caller's row order
};

struct PushResult {
  bool ok = false;
  // True when a failed sub-push may or may not have been applied (retry
  // exhaustion in the data phase). Acquire-phase failures are known
  // unapplied.
  bool indeterminate = false;
  std::string error;
};

// Client side of the pull/push protocol. Owned by a Node and driven from its
// serialized context: the owner forwards messages/timers via handle_message /
// handle_timer. Pulls retry under the backoff policy (safe: they never mutate
// server state); pushes run a per-shard transaction FSM
// (AcquiringId -> Sending -> Done) with dedup on the server, so each delta
// applies exactly once no matter how deliveries are lost or duplicated.
class PsClient {
 public:
  PsClient(Transport* transport, NodeId self, uint32_t client_id, PsTopology topo,
           BackoffPolicy backoff, uint32_t inflight_cap = 256);

  // Full rows, assembled in the caller's row order; at most one wire request
  // per shard. cb fires in the owner's context.
  void pull_rows(std::vector<uint32_t> rows, std::function<void(PullResult)> cb);

  // Splits the delta per shard and runs one push transaction per shard.
  // Completion fires when every shard transaction is Done (or Failed).
  void push(std::vector<CellDelta> deltas, std::function<void(PushResult)> cb = {});

  // True if the message/timer belonged to this client.
  bool handle_message(NodeId src, const Message& m);
  bool handle_timer(uint64_t token);

  bool can_push() const { return inflight_pushes_ < inflight_cap_; }
  size_t inflight_pushes() const { return inflight_pushes_; }
  size_t inflight_pulls() const { return pull_ops_.size(); }
  bool idle() const { return pull_ops_.empty() && push_ops_.empty(); }
  uint64_t pushes_completed() const { return pushes_completed_; }
  uint64_t pulls_completed() const { return pulls_completed_; }

  const PsTopology& topology() const { return topo_; }
  const BackoffPolicy& backoff() const { return backoff_; }

 private:
  struct PullSub {
    uint64_t req_id = 0;
    uint32_t shard = 0;
    std::vector<uint32_t> rows;
    uint32_t attempt = 0;
    uint64_t timer = 0;
    bool done = false;
    std::vector<int64_t> values;
  };

  struct PullOp {
    uint64_t id = 0;
    std::vector<uint32_t> rows;
    std::vector<std::unique_ptr<PullSub>> subs;
    size_t pending = 0;
    std::function<void(PullResult)> cb;
  };

  enum class TxState { kAcquiring, kSending, kDone, kFailed };

  struct PushTx {
    uint64_t op_id = 0;
    uint32_t shard = 0;
    TxState state = TxState::kAcquiring;
    uint64_t txid = 0;
    std::vector<CellDelta> deltas;
    uint32_t attempt = 0;
    uint64_t timer = 0;
  };

  struct PushOp {
    uint64_t id = 0;
    std::vector<std::unique_ptr<PushTx>> txs;
    size_t pending = 0;
    bool failed = false;
    bool indeterminate = false;
    std::string error;
    std::function<void(PushResult)> cb;
  };

  // Per-shard push channel: txid acquisition is serialized (TxidResp carries
  // no correlation id), binds are monotonic, and the release watermark covers
  // the longest all-Done txid prefix.
  struct ShardChannel {
    std::deque<PushTx*> acquire_queue;
    uint64_t max_bound_txid = 0;
    std::map<uint64_t, PushTx*> active;  // bound, not yet Done
    uint64_t released_upto = 0;
  };

  void send_pull(PullSub& sub);
  void fail_pull(PullOp& op, const std::string& why);
  void finish_pull(PullOp& op);
  void start_acquire(PushTx& tx);
  void start_sending(PushTx& tx);
  void tx_done(PushTx& tx);
  void tx_failed(PushTx& tx, bool indeterminate, const std::string& why);
  void finish_push_part(PushTx& tx);
  void advance_release(uint32_t shard);
  uint64_t arm_timer(uint64_t delay_ms);
  void disarm(uint64_t& timer_field);

  Transport* transport_;
  NodeId self_;
  uint32_t client_id_;
  PsTopology topo_;
  BackoffPolicy backoff_;
  uint32_t inflight_cap_;

  uint64_t next_op_id_ = 1;
  uint64_t next_req_id_ = 1;
  uint64_t next_timer_token_ = 1;

  std::map<uint64_t, PullOp> pull_ops_;
  std::unordered_map<uint64_t, std::pair<uint64_t, PullSub*>> pulls_by_req_;  // req_id -> (op, sub)
  std::map<uint64_t, PushOp> push_ops_;
  std::map<uint32_t, ShardChannel> channels_;
  struct TimerRef {
    enum Kind { kPull, kPush } kind;
    uint64_t op_id;
    void* target;
  };
  std::unordered_map<uint64_t, TimerRef> timers_;  // token -> target
  std::unordered_map<uint64_t, uint64_t> timer_handles_;  // token -> transport timer id

  size_t inflight_pushes_ = 0;
  uint64_t pushes_completed_ = 0;
  uint64_t pulls_completed_ = 0;
};

// Convenience for callers that own the event pump (e.g. the simulator
// driver): loops `pump` until the pull completes.
PullResult pull_blocking(PsClient& client, std::vector<uint32_t> rows,
                         const std::function<void()>& pump);

}  // namespace apslda
