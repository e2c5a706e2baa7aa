#include "apslda/paramserver.hpp"

#include <algorithm>

#include "apslda/error.hpp"
#include "apslda/log.hpp"

namespace apslda {

RowPartitioning::RowPartitioning(uint32_t rows, uint32_t shards) : rows_(rows), shards_(shards) {
  if (shards < 1) throw ArgError("shard count must be >= 1");
}

uint32_t RowPartitioning::shard_of(uint32_t row) const {
  if (row == kTopicCountsRow) return 0;
  if (row >= rows_) throw ArgError("row out of range");
  const uint32_t base = rows_ / shards_;
  const uint32_t rem = rows_ % shards_;
  // First `rem` shards hold base+1 rows. row >= boundary implies base > 0.
  const uint32_t boundary = rem * (base + 1);
  if (row < boundary) return row / (base + 1);
  return rem + (row - boundary) / base;
}

std::pair<uint32_t, uint32_t> RowPartitioning::row_range(uint32_t shard) const {
  if (shard >= shards_) throw ArgError("shard out of range");
  const uint32_t base = rows_ / shards_;
  const uint32_t rem = rows_ % shards_;
  uint32_t begin, end;
  if (shard < rem) {
    begin = shard * (base + 1);
    end = begin + base + 1;
  } else {
    begin = rem * (base + 1) + (shard - rem) * base;
    end = begin + base;
  }
  return {begin, std::min(end, rows_)};
}

ShardState::ShardState(uint32_t shard_id, RowPartitioning part, uint32_t num_topics)
    : shard_id_(shard_id), part_(part), num_topics_(num_topics) {
  if (num_topics < 1) throw ArgError("topic count must be >= 1");
}

bool ShardState::owns_row(uint32_t row) const { return part_.shard_of(row) == shard_id_; }

const std::vector<int64_t>* ShardState::find_row(uint32_t row) const {
  auto it = rows_.find(row);
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<int64_t>& ShardState::touch_row(uint32_t row) {
  auto [it, inserted] = rows_.try_emplace(row);
  if (inserted) it->second.assign(num_topics_, 0);
  return it->second;
}

std::vector<int64_t> ShardState::pull(std::span<const uint32_t> rows,
                                      std::span<const uint32_t> cols) const {
  for (uint32_t c : cols)
    if (c >= num_topics_) throw ArgError("column out of range");
  const size_t width = cols.empty() ? num_topics_ : cols.size();
  std::vector<int64_t> out;
  out.reserve(rows.size() * width);
  for (uint32_t row : rows) {
    if (!owns_row(row)) throw ArgError("row not owned by this shard");
    const std::vector<int64_t>* data = find_row(row);
    if (cols.empty()) {
      if (data)
        out.insert(out.end(), data->begin(), data->end());
      else
        out.insert(out.end(), num_topics_, 0);
    } else {
      for (uint32_t c : cols) out.push_back(data ? (*data)[c] : 0);
    }
  }
  return out;
}

uint64_t ShardState::acquire_txid(uint32_t client) { return clients_[client].next_txid++; }

bool ShardState::push_data(uint32_t client, uint64_t txid, std::span<const CellDelta> deltas) {
  ClientTx& ct = clients_[client];
  if (txid <= ct.released_upto || ct.applied.count(txid) > 0) return false;
  for (const CellDelta& d : deltas) {
    if (!owns_row(d.row)) throw ArgError("push delta row not owned by this shard");
    if (d.col >= num_topics_) throw ArgError("push delta column out of range");
    touch_row(d.row)[d.col] += d.inc;
  }
  ct.applied.insert(txid);
  return true;
}

void ShardState::release_upto(uint32_t client, uint64_t txid) {
  auto it = clients_.find(client);
  if (it == clients_.end()) return;
  ClientTx& ct = it->second;
  ct.released_upto = std::max(ct.released_upto, txid);
  ct.applied.erase(ct.applied.begin(), ct.applied.upper_bound(ct.released_upto));
}

int64_t ShardState::cell(uint32_t row, uint32_t col) const {
  const std::vector<int64_t>* data = find_row(row);
  return data ? (*data)[col] : 0;
}

std::vector<int64_t> ShardState::row_copy(uint32_t row) const {
  const std::vector<int64_t>* data = find_row(row);
  if (data) return *data;
  return std::vector<int64_t>(num_topics_, 0);
}

size_t ShardState::applied_txid_count() const {
  size_t n = 0;
  for (const auto& [client, ct] : clients_) n += ct.applied.size();
  return n;
}

uint64_t ShardState::state_hash() const {
  // FNV-1a over a deterministic traversal.
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  std::vector<uint32_t> keys;
  keys.reserve(rows_.size());
  for (const auto& [row, data] : rows_) keys.push_back(row);
  std::sort(keys.begin(), keys.end());
  for (uint32_t row : keys) {
    mix(row);
    for (int64_t v : rows_.at(row)) mix(static_cast<uint64_t>(v));
  }
  for (const auto& [client, ct] : clients_) {
    mix(client);
    mix(ct.next_txid);
    mix(ct.released_upto);
    for (uint64_t t : ct.applied) mix(t);
  }
  return h;
}

ShardNode::ShardNode(Transport* transport, NodeId id, RowPartitioning part, uint32_t num_topics)
    : transport_(transport), id_(id), state_(id, part, num_topics) {}

void ShardNode::on_message(NodeId src, const Message& m) {
  if (const auto* req = std::get_if<PullReq>(&m)) {
    PullResp resp;
    resp.req_id = req->req_id;
    resp.values = state_.pull(req->rows, req->cols);
    transport_->send(id_, src, resp);
  } else if (const auto* req = std::get_if<TxidReq>(&m)) {
    TxidResp resp;
    resp.txid = state_.acquire_txid(req->client);
    transport_->send(id_, src, resp);
  } else if (const auto* data = std::get_if<PushData>(&m)) {
    state_.push_data(data->client, data->txid, data->deltas);
    transport_->send(id_, src, PushAck{data->txid});
  } else if (const auto* rel = std::get_if<TxidRelease>(&m)) {
    state_.release_upto(rel->client, rel->txid);
  } else {
    LOG_DEBUG("shard " << id_ << ": ignoring unexpected message from " << src);
  }
}

}  // namespace apslda
