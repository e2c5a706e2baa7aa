#include "apslda/psclient.hpp"

#include <algorithm>
#include <cmath>

#include "apslda/error.hpp"
#include "apslda/log.hpp"

namespace apslda {

uint64_t BackoffPolicy::timeout_for_attempt(uint32_t attempt) const {
  const double t = static_cast<double>(initial_timeout_ms) * std::pow(multiplier, attempt);
  if (!(t < 9.0e15)) return 9'000'000'000'000'000ULL;  // saturate far-future deadlines
  return t < 1.0 ? 1 : static_cast<uint64_t>(t);
}

PsClient::PsClient(Transport* transport, NodeId self, uint32_t client_id, PsTopology topo,
                   BackoffPolicy backoff, uint32_t inflight_cap)
    : transport_(transport),
      self_(self),
      client_id_(client_id),
      topo_(std::move(topo)),
      backoff_(backoff),
      inflight_cap_(inflight_cap) {
  if (topo_.shard_nodes.empty()) throw ArgError("topology needs at least one shard");
  // Timer tokens live in the top half of the token space so they never
  // collide with the owning node's own tokens.
  next_timer_token_ = (1ULL << 63) + 1;
}

uint64_t PsClient::arm_timer(uint64_t delay_ms) {
  const uint64_t token = next_timer_token_++;
  timer_handles_[token] = transport_->set_timer(self_, delay_ms, token);
  return token;
}

void PsClient::disarm(uint64_t& timer_field) {
  if (timer_field == 0) return;
  auto hit = timer_handles_.find(timer_field);
  if (hit != timer_handles_.end()) {
    transport_->cancel_timer(hit->second);
    timer_handles_.erase(hit);
  }
  timers_.erase(timer_field);
  timer_field = 0;
}

// ---- pulls ------------------------------------------------------------------

void PsClient::send_pull(PullSub& sub) {
  PullReq req;
  req.req_id = sub.req_id;
  req.rows = sub.rows;
  transport_->send(self_, topo_.shard_nodes[sub.shard], req);
  sub.timer = arm_timer(backoff_.timeout_for_attempt(sub.attempt));
  timers_[sub.timer] = TimerRef{TimerRef::kPull, 0, &sub};
}

void PsClient::pull_rows(std::vector<uint32_t> rows, std::function<void(PullResult)> cb) {
  if (rows.empty()) {
    PullResult r;
    r.ok = true;
    if (cb) cb(std::move(r));
    return;
  }
  const uint64_t op_id = next_op_id_++;
  PullOp& op = pull_ops_[op_id];
  op.id = op_id;
  op.rows = rows;
  op.cb = std::move(cb);

  // Group rows per shard; at most one wire request per parameter server.
  std::map<uint32_t, std::vector<uint32_t>> groups;
  for (uint32_t row : rows) groups[topo_.rows.shard_of(row)].push_back(row);
  op.pending = groups.size();
  for (auto& [shard, shard_rows] : groups) {
    auto sub = std::make_unique<PullSub>();
    sub->req_id = next_req_id_++;
    sub->shard = shard;
    sub->rows = std::move(shard_rows);
    pulls_by_req_[sub->req_id] = {op_id, sub.get()};
    op.subs.push_back(std::move(sub));
  }
  for (auto& sub : op.subs) send_pull(*sub);
}

void PsClient::fail_pull(PullOp& op, const std::string& why) {
  for (auto& sub : op.subs) {
    disarm(sub->timer);
    pulls_by_req_.erase(sub->req_id);
  }
  auto cb = std::move(op.cb);
  pull_ops_.erase(op.id);
  PullResult r;
  r.ok = false;
  r.error = why;
  if (cb) cb(std::move(r));
}

void PsClient::finish_pull(PullOp& op) {
  // Assemble caller row order from per-shard responses.
  const uint32_t width = topo_.num_topics;
  std::unordered_map<uint32_t, const int64_t*> row_data;
  for (auto& sub : op.subs)
    for (size_t i = 0; i < sub->rows.size(); ++i)
      row_data[sub->rows[i]] = sub->values.data() + i * width;

  PullResult r;
  r.ok = true;
  r.values.reserve(op.rows.size() * width);
  for (uint32_t row : op.rows) {
    const int64_t* data = row_data.at(row);
    r.values.insert(r.values.end(), data, data + width);
  }
  for (auto& sub : op.subs) pulls_by_req_.erase(sub->req_id);
  auto cb = std::move(op.cb);
  pull_ops_.erase(op.id);
  ++pulls_completed_;
  if (cb) cb(std::move(r));
}

// ---- pushes -----------------------------------------------------------------

void PsClient::push(std::vector<CellDelta> deltas, std::function<void(PushResult)> cb) {
  if (deltas.empty()) {
    PushResult r;
    r.ok = true;
    if (cb) cb(std::move(r));
    return;
  }
  const uint64_t op_id = next_op_id_++;
  PushOp& op = push_ops_[op_id];
  op.id = op_id;
  op.cb = std::move(cb);
  ++inflight_pushes_;

  std::map<uint32_t, std::vector<CellDelta>> groups;
  for (const CellDelta& d : deltas) groups[topo_.rows.shard_of(d.row)].push_back(d);
  op.pending = groups.size();
  for (auto& [shard, shard_deltas] : groups) {
    auto tx = std::make_unique<PushTx>();
    tx->op_id = op_id;
    tx->shard = shard;
    tx->deltas = std::move(shard_deltas);
    PushTx* raw = tx.get();
    op.txs.push_back(std::move(tx));
    ShardChannel& ch = channels_[shard];
    ch.acquire_queue.push_back(raw);
    if (ch.acquire_queue.size() == 1) start_acquire(*raw);
  }
}

void PsClient::start_acquire(PushTx& tx) {
  tx.state = TxState::kAcquiring;
  tx.attempt = 0;
  transport_->send(self_, topo_.shard_nodes[tx.shard], TxidReq{client_id_});
  tx.timer = arm_timer(backoff_.timeout_for_attempt(0));
  timers_[tx.timer] = TimerRef{TimerRef::kPush, 0, &tx};
}

void PsClient::start_sending(PushTx& tx) {
  tx.state = TxState::kSending;
  tx.attempt = 0;
  PushData data;
  data.client = client_id_;
  data.txid = tx.txid;
  data.deltas = tx.deltas;
  transport_->send(self_, topo_.shard_nodes[tx.shard], data);
  tx.timer = arm_timer(backoff_.timeout_for_attempt(0));
  timers_[tx.timer] = TimerRef{TimerRef::kPush, 0, &tx};
}

void PsClient::advance_release(uint32_t shard) {
  ShardChannel& ch = channels_[shard];
  const uint64_t watermark =
      ch.active.empty() ? ch.max_bound_txid : ch.active.begin()->first - 1;
  if (watermark > ch.released_upto) {
    ch.released_upto = watermark;
    transport_->send(self_, topo_.shard_nodes[shard], TxidRelease{client_id_, watermark});
  }
}

void PsClient::tx_done(PushTx& tx) {
  disarm(tx.timer);
  tx.state = TxState::kDone;
  channels_[tx.shard].active.erase(tx.txid);
  advance_release(tx.shard);
  finish_push_part(tx);
}

void PsClient::tx_failed(PushTx& tx, bool indeterminate, const std::string& why) {
  tx.state = TxState::kFailed;
  auto oit = push_ops_.find(tx.op_id);
  if (oit != push_ops_.end()) {
    oit->second.failed = true;
    oit->second.indeterminate |= indeterminate;
    if (oit->second.error.empty()) oit->second.error = why;
  }
  finish_push_part(tx);
}

void PsClient::finish_push_part(PushTx& tx) {
  auto it = push_ops_.find(tx.op_id);
  if (it == push_ops_.end()) return;
  PushOp& op = it->second;
  if (--op.pending > 0) return;

  // A failed Sending-phase transaction may still have copies in flight; leave
  // a tombstone so the release watermark never passes its txid.
  for (auto& txp : op.txs) {
    if (txp->state == TxState::kFailed && txp->txid != 0) {
      ShardChannel& ch = channels_[txp->shard];
      auto ait = ch.active.find(txp->txid);
      if (ait != ch.active.end()) ait->second = nullptr;
    }
  }
  PushResult r;
  r.ok = !op.failed;
  r.indeterminate = op.indeterminate;
  r.error = op.error;
  auto cb = std::move(op.cb);
  push_ops_.erase(it);
  --inflight_pushes_;
  if (r.ok) ++pushes_completed_;
  if (cb) cb(std::move(r));
}

// ---- dispatch ---------------------------------------------------------------

bool PsClient::handle_message(NodeId src, const Message& m) {
  if (const auto* resp = std::get_if<PullResp>(&m)) {
    auto it = pulls_by_req_.find(resp->req_id);
    if (it == pulls_by_req_.end()) return true;  // late or duplicate response
    auto [op_id, sub] = it->second;
    if (sub->done) return true;
    disarm(sub->timer);
    sub->done = true;
    sub->values = resp->values;
    PullOp& op = pull_ops_.at(op_id);
    if (--op.pending == 0) finish_pull(op);
    return true;
  }

  if (const auto* resp = std::get_if<TxidResp>(&m)) {
    const auto shard_it = std::find(topo_.shard_nodes.begin(), topo_.shard_nodes.end(), src);
    if (shard_it == topo_.shard_nodes.end()) return true;
    const uint32_t shard = static_cast<uint32_t>(shard_it - topo_.shard_nodes.begin());
    ShardChannel& ch = channels_[shard];
    if (ch.acquire_queue.empty()) return true;  // nobody waiting: late duplicate
    // Allocation is monotonic per client; anything at or below the bind
    // watermark is a stale or duplicated response for an already-bound (or
    // orphaned) id and must not be bound twice.
    if (resp->txid <= ch.max_bound_txid) return true;
    PushTx* tx = ch.acquire_queue.front();
    if (tx->state != TxState::kAcquiring) return true;
    disarm(tx->timer);
    ch.acquire_queue.pop_front();
    ch.max_bound_txid = resp->txid;
    tx->txid = resp->txid;
    ch.active[resp->txid] = tx;
    start_sending(*tx);
    if (!ch.acquire_queue.empty()) start_acquire(*ch.acquire_queue.front());
    return true;
  }

  if (const auto* ack = std::get_if<PushAck>(&m)) {
    const auto shard_it = std::find(topo_.shard_nodes.begin(), topo_.shard_nodes.end(), src);
    if (shard_it == topo_.shard_nodes.end()) return true;
    const uint32_t shard = static_cast<uint32_t>(shard_it - topo_.shard_nodes.begin());
    ShardChannel& ch = channels_[shard];
    auto it = ch.active.find(ack->txid);
    if (it == ch.active.end() || it->second == nullptr) return true;  // duplicate ack
    PushTx* tx = it->second;
    if (tx->state != TxState::kSending) return true;
    tx_done(*tx);
    return true;
  }

  return false;
}

bool PsClient::handle_timer(uint64_t token) {
  auto it = timers_.find(token);
  if (it == timers_.end()) return false;
  const TimerRef ref = it->second;
  timers_.erase(it);
  timer_handles_.erase(token);

  if (ref.kind == TimerRef::kPull) {
    PullSub& sub = *static_cast<PullSub*>(ref.target);
    sub.timer = 0;
    if (sub.attempt + 1 >= backoff_.max_retries) {
      auto oit = pulls_by_req_.find(sub.req_id);
      if (oit != pulls_by_req_.end()) fail_pull(pull_ops_.at(oit->second.first),
                                                "pull retries exhausted to shard " +
                                                    std::to_string(sub.shard));
      return true;
    }
    ++sub.attempt;
    send_pull(sub);
    return true;
  }

  PushTx& tx = *static_cast<PushTx*>(ref.target);
  tx.timer = 0;
  if (tx.state == TxState::kAcquiring) {
    ShardChannel& ch = channels_[tx.shard];
    if (tx.attempt + 1 >= backoff_.max_retries) {
      // Known unapplied: no data was ever attached to an id.
      if (!ch.acquire_queue.empty() && ch.acquire_queue.front() == &tx)
        ch.acquire_queue.pop_front();
      tx_failed(tx, false, "txid acquisition retries exhausted");
      if (!ch.acquire_queue.empty()) start_acquire(*ch.acquire_queue.front());
      return true;
    }
    ++tx.attempt;
    transport_->send(self_, topo_.shard_nodes[tx.shard], TxidReq{client_id_});
    tx.timer = arm_timer(backoff_.timeout_for_attempt(tx.attempt));
    timers_[tx.timer] = TimerRef{TimerRef::kPush, 0, &tx};
    return true;
  }
  if (tx.state == TxState::kSending) {
    if (tx.attempt + 1 >= backoff_.max_retries) {
      tx_failed(tx, true, "push data retries exhausted");
      return true;
    }
    ++tx.attempt;
    PushData data;
    data.client = client_id_;
    data.txid = tx.txid;
    data.deltas = tx.deltas;
    transport_->send(self_, topo_.shard_nodes[tx.shard], data);
    tx.timer = arm_timer(backoff_.timeout_for_attempt(tx.attempt));
    timers_[tx.timer] = TimerRef{TimerRef::kPush, 0, &tx};
    return true;
  }
  return true;
}

PullResult pull_blocking(PsClient& client, std::vector<uint32_t> rows,
                         const std::function<void()>& pump) {
  PullResult out;
  bool done = false;
  client.pull_rows(std::move(rows), [&](PullResult r) {
    out = std::move(r);
    done = true;
  });
  while (!done) pump();
  return out;
}

}  // namespace apslda
