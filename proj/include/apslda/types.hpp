#pragma once

#include <cstdint>

namespace apslda {

using NodeId = uint32_t;

// Row id of the global topic-count vector n_k. It lives on shard 0, outside
// the word-row keyspace [0, V).
inline constexpr uint32_t kTopicCountsRow = 0xFFFFFFFFu;

// Node id layout in cluster mode: shards take [0, S), workers [S, S+W),
// observers count up from kObserverBase, bootstrap nodes draw random ids
// from [0x80000000, 0xBFFFFFFF], and the driver has a fixed id so that
// processes can reach it before they know the cluster shape.
inline constexpr NodeId kDriverNode = 0xFFFFFFF0u;
inline constexpr NodeId kObserverBase = 0xC0000000u;

// One additive update to a cell of the shared state.
struct CellDelta {
  uint32_t row = 0;
  uint32_t col = 0;
  int64_t inc = 0;

  friend bool operator==(const CellDelta&, const CellDelta&) = default;
};

// LDA priors and dimensions shared across sampler, trainer and eval.
struct Hyperparams {
  uint32_t num_topics = 1;  // K
  double alpha = 0.05;      // document-topic prior
  double beta = 0.01;       // topic-word prior
  uint32_t vocab_size = 1;  // V
};

}  // namespace apslda
