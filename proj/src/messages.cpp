#include "apslda/messages.hpp"

#include <cstring>

#include "apslda/error.hpp"

namespace apslda {

namespace {

// Tags are wire format; never renumber.
enum MsgTag : uint8_t {
  kTagPullReq = 1,
  kTagPullResp = 2,
  kTagTxidReq = 3,
  kTagTxidResp = 4,
  kTagPushData = 5,
  kTagPushAck = 6,
  kTagTxidRelease = 7,
  kTagRegisterNode = 8,
  kTagAssignNode = 9,
  kTagClusterReady = 10,
  kTagInitDone = 11,
  kTagStartIteration = 12,
  kTagIterationDone = 13,
  kTagShutdownCmd = 14,
  kTagAbortRun = 15,
};

class Writer {
 public:
  explicit Writer(std::vector<uint8_t>& out) : out_(out) {}

  void u8(uint8_t v) { out_.push_back(v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void vec_u32(const std::vector<uint32_t>& v) {
    u32(static_cast<uint32_t>(v.size()));
    for (uint32_t x : v) u32(x);
  }
  void vec_i64(const std::vector<int64_t>& v) {
    u32(static_cast<uint32_t>(v.size()));
    for (int64_t x : v) i64(x);
  }

 private:
  std::vector<uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> in) : in_(in) {}

  uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  int64_t i64() { return static_cast<int64_t>(u64()); }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<uint32_t> vec_u32() {
    const uint32_t n = u32();
    std::vector<uint32_t> v(n);
    for (uint32_t i = 0; i < n; ++i) v[i] = u32();
    return v;
  }
  std::vector<int64_t> vec_i64() {
    const uint32_t n = u32();
    std::vector<int64_t> v(n);
    for (uint32_t i = 0; i < n; ++i) v[i] = i64();
    return v;
  }
  void done() const {
    if (pos_ != in_.size()) throw Error("trailing bytes in message");
  }

 private:
  void need(size_t n) {
    if (pos_ + n > in_.size()) throw Error("truncated message");
  }

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

}  // namespace

std::vector<uint8_t> encode_message(const Message& m) {
  std::vector<uint8_t> out;
  Writer w(out);
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, PullReq>) {
          w.u8(kTagPullReq);
          w.u64(msg.req_id);
          w.vec_u32(msg.rows);
          w.vec_u32(msg.cols);
        } else if constexpr (std::is_same_v<T, PullResp>) {
          w.u8(kTagPullResp);
          w.u64(msg.req_id);
          w.vec_i64(msg.values);
        } else if constexpr (std::is_same_v<T, TxidReq>) {
          w.u8(kTagTxidReq);
          w.u32(msg.client);
        } else if constexpr (std::is_same_v<T, TxidResp>) {
          w.u8(kTagTxidResp);
          w.u64(msg.txid);
        } else if constexpr (std::is_same_v<T, PushData>) {
          w.u8(kTagPushData);
          w.u32(msg.client);
          w.u64(msg.txid);
          w.u32(static_cast<uint32_t>(msg.deltas.size()));
          for (const CellDelta& d : msg.deltas) {
            w.u32(d.row);
            w.u32(d.col);
            w.i64(d.inc);
          }
        } else if constexpr (std::is_same_v<T, PushAck>) {
          w.u8(kTagPushAck);
          w.u64(msg.txid);
        } else if constexpr (std::is_same_v<T, TxidRelease>) {
          w.u8(kTagTxidRelease);
          w.u32(msg.client);
          w.u64(msg.txid);
        } else if constexpr (std::is_same_v<T, RegisterNode>) {
          w.u8(kTagRegisterNode);
          w.u8(msg.role);
          w.str(msg.listen_addr);
        } else if constexpr (std::is_same_v<T, AssignNode>) {
          w.u8(kTagAssignNode);
          w.u32(msg.node_id);
        } else if constexpr (std::is_same_v<T, ClusterReady>) {
          w.u8(kTagClusterReady);
          w.u32(msg.num_shards);
          w.u32(msg.num_workers);
          w.u32(msg.num_topics);
          w.u32(msg.vocab_size);
          w.u32(static_cast<uint32_t>(msg.shard_addrs.size()));
          for (const NodeAddr& a : msg.shard_addrs) {
            w.u32(a.node_id);
            w.str(a.addr);
          }
        } else if constexpr (std::is_same_v<T, InitDone>) {
          w.u8(kTagInitDone);
          w.u32(msg.worker);
        } else if constexpr (std::is_same_v<T, StartIteration>) {
          w.u8(kTagStartIteration);
          w.u32(msg.iteration);
        } else if constexpr (std::is_same_v<T, IterationDone>) {
          w.u8(kTagIterationDone);
          w.u32(msg.iteration);
          w.u32(msg.worker);
          w.u64(msg.pushes);
        } else if constexpr (std::is_same_v<T, ShutdownCmd>) {
          w.u8(kTagShutdownCmd);
        } else if constexpr (std::is_same_v<T, AbortRun>) {
          w.u8(kTagAbortRun);
          w.str(msg.reason);
        }
      },
      m);
  return out;
}

Message decode_message(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  const uint8_t tag = r.u8();
  Message m;
  switch (tag) {
    case kTagPullReq: {
      PullReq msg;
      msg.req_id = r.u64();
      msg.rows = r.vec_u32();
      msg.cols = r.vec_u32();
      m = std::move(msg);
      break;
    }
    case kTagPullResp: {
      PullResp msg;
      msg.req_id = r.u64();
      msg.values = r.vec_i64();
      m = std::move(msg);
      break;
    }
    case kTagTxidReq: {
      TxidReq msg;
      msg.client = r.u32();
      m = msg;
      break;
    }
    case kTagTxidResp: {
      TxidResp msg;
      msg.txid = r.u64();
      m = msg;
      break;
    }
    case kTagPushData: {
      PushData msg;
      msg.client = r.u32();
      msg.txid = r.u64();
      const uint32_t n = r.u32();
      msg.deltas.resize(n);
      for (uint32_t i = 0; i < n; ++i) {
        msg.deltas[i].row = r.u32();
        msg.deltas[i].col = r.u32();
        msg.deltas[i].inc = r.i64();
      }
      m = std::move(msg);
      break;
    }
    case kTagPushAck: {
      PushAck msg;
      msg.txid = r.u64();
      m = msg;
      break;
    }
    case kTagTxidRelease: {
      TxidRelease msg;
      msg.client = r.u32();
      msg.txid = r.u64();
      m = msg;
      break;
    }
    case kTagRegisterNode: {
      RegisterNode msg;
      msg.role = r.u8();
      msg.listen_addr = r.str();
      m = std::move(msg);
      break;
    }
    case kTagAssignNode: {
      AssignNode msg;
      msg.node_id = r.u32();
      m = msg;
      break;
    }
    case kTagClusterReady: {
      ClusterReady msg;
      msg.num_shards = r.u32();
      msg.num_workers = r.u32();
      msg.num_topics = r.u32();
      msg.vocab_size = r.u32();
      const uint32_t n = r.u32();
      msg.shard_addrs.resize(n);
      for (uint32_t i = 0; i < n; ++i) {
        msg.shard_addrs[i].node_id = r.u32();
        msg.shard_addrs[i].addr = r.str();
      }
      m = std::move(msg);
      break;
    }
    case kTagInitDone: {
      InitDone msg;
      msg.worker = r.u32();
      m = msg;
      break;
    }
    case kTagStartIteration: {
      StartIteration msg;
      msg.iteration = r.u32();
      m = msg;
      break;
    }
    case kTagIterationDone: {
      IterationDone msg;
      msg.iteration = r.u32();
      msg.worker = r.u32();
      msg.pushes = r.u64();
      m = msg;
      break;
    }
    case kTagShutdownCmd:
      m = ShutdownCmd{};
      break;
    case kTagAbortRun: {
      AbortRun msg;
      msg.reason = r.str();
      m = std::move(msg);
      break;
    }
    default:
      throw Error("unknown message tag " + std::to_string(tag));
  }
  r.done();
  return m;
}

uint8_t message_type(std::span<const uint8_t> bytes) {
  if (bytes.empty()) throw Error("empty message");
  return bytes[0];
}

const char* message_type_name(uint8_t tag) {
  switch (tag) {
    case kTagPullReq: return "PullReq";
    case kTagPullResp: return "PullResp";
    case kTagTxidReq: return "TxidReq";
    case kTagTxidResp: return "TxidResp";
    case kTagPushData: return "PushData";
    case kTagPushAck: return "PushAck";
    case kTagTxidRelease: return "TxidRelease";
    case kTagRegisterNode: return "RegisterNode";
    case kTagAssignNode: return "AssignNode";
    case kTagClusterReady: return "ClusterReady";
    case kTagInitDone: return "InitDone";
    case kTagStartIteration: return "StartIteration";
    case kTagIterationDone: return "IterationDone";
    case kTagShutdownCmd: return "ShutdownCmd";
    case kTagAbortRun: return "AbortRun";
    default: return "Unknown";
  }
}

}  // namespace apslda
