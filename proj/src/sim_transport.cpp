#include "apslda/sim_transport.hpp"

#include "apslda/error.hpp"
#include "apslda/log.hpp"

namespace apslda {

SimTransport::SimTransport(FaultPlan plan)
    : plan_(plan), net_rng_(derive_seed(plan.seed, Stream::kNetwork)) {
  if (plan_.delay_max_ms < plan_.delay_min_ms) plan_.delay_max_ms = plan_.delay_min_ms;
}

void SimTransport::add_node(NodeId id, Node* node) {
  if (!nodes_.emplace(id, node).second) throw Error("duplicate node id");
}

uint64_t SimTransport::delay_sample() {
  const uint64_t span = plan_.delay_max_ms - plan_.delay_min_ms + 1;
  return plan_.delay_min_ms + net_rng_.bounded64(span);
}

void SimTransport::schedule_delivery(Envelope env, uint64_t at) {
  const uint64_t seq = next_seq_++;
  Event ev;
  ev.kind = Event::kDeliver;
  ev.env = std::move(env);
  events_.emplace(EventKey{at, seq}, std::move(ev));
}

void SimTransport::send(NodeId src, NodeId dst, const Message& m) {
  if (nodes_.find(dst) == nodes_.end())
    throw Error("send to unknown node " + std::to_string(dst));

  Envelope env;
  env.src = src;
  env.dst = dst;
  env.msg_id = next_seq_++;
  env.payload = encode_message(m);
  if (trace_enabled_)
    trace_.push_back({TraceEntry::kSend, now_, src, dst, env.msg_id, env.payload[0]});

  // Primary copy plus at most one duplicate, each independently dropped and
  // delayed. The RNG is consumed in a fixed send-order sequence.
  const bool drop_primary = net_rng_.uniform() < plan_.drop_prob;
  const bool duplicate = net_rng_.uniform() < plan_.dup_prob;
  const uint64_t delay_primary = delay_sample();
  for (int copy = 0; copy < (duplicate ? 2 : 1); ++copy) {
    bool dropped;
    uint64_t delay;
    if (copy == 0) {
      dropped = drop_primary;
      delay = delay_primary;
    } else {
      dropped = net_rng_.uniform() < plan_.drop_prob;
      delay = delay_sample();
    }
    if (!dropped && filter_ && !filter_(env)) dropped = true;
    if (dropped) {
      if (trace_enabled_)
        trace_.push_back({TraceEntry::kDrop, now_, src, dst, env.msg_id, env.payload[0]});
      continue;
    }
    schedule_delivery(env, now_ + delay);
  }
}

uint64_t SimTransport::set_timer(NodeId owner, uint64_t delay_ms, uint64_t token) {
  const uint64_t seq = next_seq_++;
  Event ev;
  ev.kind = Event::kTimer;
  ev.owner = owner;
  ev.token = token;
  ev.timer_id = seq;
  // Saturate far-future deadlines instead of wrapping.
  uint64_t at = now_ + delay_ms;
  if (at < now_) at = UINT64_MAX - 1;
  events_.emplace(EventKey{at, seq}, std::move(ev));
  timer_index_[seq] = EventKey{at, seq};
  return seq;
}

void SimTransport::cancel_timer(uint64_t timer_id) {
  auto it = timer_index_.find(timer_id);
  if (it == timer_index_.end()) return;
  events_.erase(it->second);
  timer_index_.erase(it);
}

void SimTransport::post(NodeId owner, std::function<void()> fn) {
  // Single-threaded driver: the caller already is the serialized context.
  (void)owner;
  fn();
}

void SimTransport::execute(Event&& ev) {
  ++events_processed_;
  if (ev.kind == Event::kTimer) {
    timer_index_.erase(ev.timer_id);
    auto it = nodes_.find(ev.owner);
    if (it != nodes_.end()) it->second->on_timer(ev.token);
    return;
  }
  auto it = nodes_.find(ev.env.dst);
  if (it == nodes_.end()) return;
  if (trace_enabled_)
    trace_.push_back(
        {TraceEntry::kDeliver, now_, ev.env.src, ev.env.dst, ev.env.msg_id, ev.env.payload[0]});
  const Message m = decode_message(ev.env.payload);
  it->second->on_message(ev.env.src, m);
}

size_t SimTransport::advance_clock(uint64_t dt) {
  const uint64_t target = now_ + dt;
  size_t delivered = 0;
  while (!events_.empty() && events_.begin()->first.first <= target) {
    auto it = events_.begin();
    now_ = it->first.first;
    Event ev = std::move(it->second);
    events_.erase(it);
    if (ev.kind == Event::kDeliver) ++delivered;
    execute(std::move(ev));
  }
  now_ = target;
  return delivered;
}

bool SimTransport::advance_next() {
  if (events_.empty()) return false;
  auto it = events_.begin();
  now_ = std::max(now_, it->first.first);
  Event ev = std::move(it->second);
  events_.erase(it);
  execute(std::move(ev));
  return true;
}

void pump_until(SimTransport& sim, const std::function<bool()>& done, uint64_t max_events) {
  uint64_t budget = max_events;
  while (!done()) {
    if (!sim.advance_next()) throw TransportError("simulation deadlock: no pending events");
    if (budget-- == 0) throw TransportError("simulation runaway: event budget exhausted");
  }
}

}  // namespace apslda
