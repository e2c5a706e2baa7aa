#pragma once

#include <functional>

#include "apslda/psclient.hpp"
#include "apslda/transport.hpp"

namespace apslda {

// A node whose only job is hosting a PsClient (driver-side model pulls,
// observers, test harnesses). Control messages fall through to the handler.
class ClientNode : public Node {
 public:
  ClientNode(Transport* transport, NodeId id, PsTopology topo, BackoffPolicy backoff,
             uint32_t inflight_cap = 256)
      : client_(transport, id, id, std::move(topo), backoff, inflight_cap) {}

  void on_message(NodeId src, const Message& m) override {
    if (client_.handle_message(src, m)) return;
    if (control_handler_) control_handler_(src, m);
  }

  void on_timer(uint64_t token) override {
    if (client_.handle_timer(token)) return;
    if (timer_handler_) timer_handler_(token);
  }

  void set_control_handler(std::function<void(NodeId, const Message&)> h) {
    control_handler_ = std::move(h);
  }
  void set_timer_handler(std::function<void(uint64_t)> h) { timer_handler_ = std::move(h); }

  PsClient& client() { return client_; }

 private:
  PsClient client_;
  std::function<void(NodeId, const Message&)> control_handler_;
  std::function<void(uint64_t)> timer_handler_;
};

}  // namespace apslda
