#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "apslda/types.hpp"

namespace apslda {

// ---- parameter server data plane -------------------------------------------

struct PullReq {
  uint64_t req_id = 0;
  std::vector<uint32_t> rows;
  std::vector<uint32_t> cols;  // empty = all columns
};

struct PullResp {
  uint64_t req_id = 0;
  std::vector<int64_t> values;  // row-major in request order
};

struct TxidReq {
  uint32_t client = 0;
};

struct TxidResp {
  uint64_t txid = 0;
};

struct PushData {
  uint32_t client = 0;
  uint64_t txid = 0;
  std::vector<CellDelta> deltas;
};

struct PushAck {
  uint64_t txid = 0;
};

// Prefix release: the client asserts every one of its transactions with id
// <= txid is complete, so the shard may forget their dedup entries and treat
// any later duplicate as already applied.
struct TxidRelease {
  uint32_t client = 0;
  uint64_t txid = 0;
};

// ---- cluster control plane (TCP only; loss-free) ----------------------------

enum class NodeRole : uint8_t { kServer = 0, kWorker = 1, kObserver = 2 };

struct RegisterNode {
  uint8_t role = 0;
  std::string listen_addr;
};

struct AssignNode {
  uint32_t node_id = 0;
};

struct NodeAddr {
  uint32_t node_id = 0;
  std::string addr;

  friend bool operator==(const NodeAddr&, const NodeAddr&) = default;
};

struct ClusterReady {
  uint32_t num_shards = 0;
  uint32_t num_workers = 0;
  uint32_t num_topics = 0;
  uint32_t vocab_size = 0;
  std::vector<NodeAddr> shard_addrs;
};

struct InitDone {
  uint32_t worker = 0;
};

struct StartIteration {
  uint32_t iteration = 0;
};

struct IterationDone {
  uint32_t iteration = 0;
  uint32_t worker = 0;
  uint64_t pushes = 0;
};

struct ShutdownCmd {};

struct AbortRun {
  std::string reason;
};

using Message =
    std::variant<PullReq, PullResp, TxidReq, TxidResp, PushData, PushAck, TxidRelease,
                 RegisterNode, AssignNode, ClusterReady, InitDone, StartIteration, IterationDone,
                 ShutdownCmd, AbortRun>;

// Wire encoding: 1-byte type tag then fixed-width little-endian fields;
// vectors and strings carry a u32 element count. The 4-byte length prefix is
// added by the framing layer.
std::vector<uint8_t> encode_message(const Message& m);
Message decode_message(std::span<const uint8_t> bytes);

// Type tag of an encoded message (first byte); for traces and filters.
uint8_t message_type(std::span<const uint8_t> bytes);
const char* message_type_name(uint8_t tag);

}  // namespace apslda
