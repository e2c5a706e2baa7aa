#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "apslda/messages.hpp"
#include "apslda/types.hpp"

namespace apslda {

struct Envelope {
  NodeId src = 0;
  NodeId dst = 0;
  uint64_t msg_id = 0;               // unique per run
  std::vector<uint8_t> payload;      // encoded Message
};

// A participant in the message layer. Handlers for one node are never run
// concurrently; state owned by a node needs no locking.
class Node {
 public:
  virtual ~Node() = default;
  virtual void on_message(NodeId src, const Message& m) = 0;
  virtual void on_timer(uint64_t token) { (void)token; }
};

// Message layer contract: at-most-once delivery per transmitted copy, no
// corruption, no FIFO guarantee. Time is milliseconds on a transport-owned
// clock (virtual in the simulator, steady in the socket transport).
class Transport {
 public:
  virtual ~Transport() = default;

  virtual void add_node(NodeId id, Node* node) = 0;

  // Serializes and hands the message to the delivery layer. Throws Error if
  // dst has no known address/registration.
  virtual void send(NodeId src, NodeId dst, const Message& m) = 0;

  // Arms a one-shot timer; owner->on_timer(token) fires after delay ms.
  // Returns a handle for cancel_timer.
  virtual uint64_t set_timer(NodeId owner, uint64_t delay_ms, uint64_t token) = 0;
  virtual void cancel_timer(uint64_t timer_id) = 0;

  virtual uint64_t now() const = 0;

  // Runs fn in the owner node's serialized context.
  virtual void post(NodeId owner, std::function<void()> fn) = 0;
};

}  // namespace apslda
