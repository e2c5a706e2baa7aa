#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "apslda/transport.hpp"
#include "apslda/types.hpp"

namespace apslda {

// Contiguous-block mapping of matrix rows [0, rows) onto shards, balanced
// within one row. The topic-count row (kTopicCountsRow) lives on shard 0.
class RowPartitioning {
 public:
  RowPartitioning() = default;
  RowPartitioning(uint32_t rows, uint32_t shards);

  uint32_t shard_of(uint32_t row) const;
  std::pair<uint32_t, uint32_t> row_range(uint32_t shard) const;  // [begin, end)
  uint32_t rows() const { return rows_; }
  uint32_t shards() const { return shards_; }

 private:
  uint32_t rows_ = 0;
  uint32_t shards_ = 1;
};

// One shard's state: dense count rows plus per-client push dedup. Counts are
// signed; non-negativity is a quiescence invariant, not an operation-level
// one (a stale decrement may arrive before its matching increment).
class ShardState {
 public:
  ShardState(uint32_t shard_id, RowPartitioning part, uint32_t num_topics);

  bool owns_row(uint32_t row) const;

  // Per-row atomic snapshot of the requested rows (in request order); cols
  // empty means all K columns. Read-only and idempotent.
  std::vector<int64_t> pull(std::span<const uint32_t> rows,
                            std::span<const uint32_t> cols) const;

  // Fresh id, strictly greater than all previously issued to this client.
  // Allocation never touches count state, so retries are harmless.
  uint64_t acquire_txid(uint32_t client);

  // Applies the delta iff (client, txid) has not been applied or released;
  // returns whether it was applied. The ack is sent either way.
  bool push_data(uint32_t client, uint64_t txid, std::span<const CellDelta> deltas);

  // Prefix release: forgets dedup entries <= txid and rejects any later
  // duplicate with id <= txid as already applied. Idempotent.
  void release_upto(uint32_t client, uint64_t txid);

  int64_t cell(uint32_t row, uint32_t col) const;
  std::vector<int64_t> row_copy(uint32_t row) const;
  size_t applied_txid_count() const;
  uint64_t state_hash() const;  // rows + dedup state; pulls must not change it
  uint32_t shard_id() const { return shard_id_; }
  uint32_t num_topics() const { return num_topics_; }

 private:
  struct ClientTx {
    uint64_t next_txid = 1;
    uint64_t released_upto = 0;
    std::set<uint64_t> applied;
  };

  const std::vector<int64_t>* find_row(uint32_t row) const;
  std::vector<int64_t>& touch_row(uint32_t row);

  uint32_t shard_id_ = 0;
  RowPartitioning part_;
  uint32_t num_topics_ = 1;
  std::unordered_map<uint32_t, std::vector<int64_t>> rows_;
  std::map<uint32_t, ClientTx> clients_;
};

// Message-level wrapper; handler runs in the node's serialized context.
class ShardNode : public Node {
 public:
  ShardNode(Transport* transport, NodeId id, RowPartitioning part, uint32_t num_topics);

  void on_message(NodeId src, const Message& m) override;

  ShardState& state() { return state_; }
  const ShardState& state() const { return state_; }

 private:
  Transport* transport_;
  NodeId id_;
  ShardState state_;
};

}  // namespace apslda
