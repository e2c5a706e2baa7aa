#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <vector>

#include "apslda/rng.hpp"
#include "apslda/transport.hpp"

namespace apslda {

// Seeded network behavior. Identical seed and send sequence produce an
// identical delivery schedule. Duplication adds at most one extra copy per
// dup event; reordering arises from the randomized delays.
struct FaultPlan {
  double drop_prob = 0.0;
  double dup_prob = 0.0;
  uint64_t delay_min_ms = 1;
  uint64_t delay_max_ms = 1;
  uint64_t seed = 0;
};

// Single-threaded deterministic simulator driven by advance_clock /
// advance_next. Events (deliveries and timers) execute in (time, sequence)
// order; messages scheduled for the same instant deliver in msg_id order.
class SimTransport : public Transport {
 public:
  explicit SimTransport(FaultPlan plan);

  void add_node(NodeId id, Node* node) override;
  void send(NodeId src, NodeId dst, const Message& m) override;
  uint64_t set_timer(NodeId owner, uint64_t delay_ms, uint64_t token) override;
  void cancel_timer(uint64_t timer_id) override;
  uint64_t now() const override { return now_; }
  void post(NodeId owner, std::function<void()> fn) override;

  // Advances virtual time by dt, executing everything due in order.
  // Returns the number of messages delivered.
  size_t advance_clock(uint64_t dt);

  // Jumps to the next pending event and executes it. False when idle.
  bool advance_next();

  bool pending() const { return !events_.empty(); }
  size_t events_processed() const { return events_processed_; }

  // Test hook: return false to force-drop a would-be delivery copy.
  using DeliveryFilter = std::function<bool(const Envelope&)>;
  void set_delivery_filter(DeliveryFilter f) { filter_ = std::move(f); }

  struct TraceEntry {
    enum Kind : uint8_t { kSend, kDrop, kDeliver } kind;
    uint64_t time;
    NodeId src, dst;
    uint64_t msg_id;
    uint8_t msg_type;
  };
  void enable_trace(bool on) { trace_enabled_ = on; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  struct Event {
    enum Kind : uint8_t { kDeliver, kTimer } kind;
    Envelope env;          // kDeliver
    NodeId owner = 0;      // kTimer
    uint64_t token = 0;    // kTimer
    uint64_t timer_id = 0;
  };

  using EventKey = std::pair<uint64_t, uint64_t>;  // (time, seq)

  void schedule_delivery(Envelope env, uint64_t at);
  void execute(Event&& ev);
  uint64_t delay_sample();

  FaultPlan plan_;
  Rng net_rng_;
  uint64_t now_ = 0;
  uint64_t next_seq_ = 1;
  std::map<EventKey, Event> events_;
  std::unordered_map<uint64_t, EventKey> timer_index_;
  std::unordered_map<NodeId, Node*> nodes_;
  DeliveryFilter filter_;
  bool trace_enabled_ = false;
  std::vector<TraceEntry> trace_;
  size_t events_processed_ = 0;
};

// Pumps the simulator until done() holds. Throws TransportError on deadlock
// (no pending events) or when max_events is exceeded.
void pump_until(SimTransport& sim, const std::function<bool()>& done,
                uint64_t max_events = 500'000'000);

}  // namespace apslda
