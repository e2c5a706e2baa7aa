#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "apslda/transport.hpp"

namespace apslda {

// TCP stream transport. One listening socket per process; any number of
// local nodes, each with its own dispatcher thread (handlers for a node run
// serialized). Frames between processes carry (src, dst, msg_id, payload);
// local destinations short-circuit through the inbox without touching the
// network. A connection that cannot be established drops the message, which
// the retry layers above are built to absorb (at-most-once delivery).
class SocketTransport : public Transport {
 public:
  // listen_addr: "host:port", port 0 picks a free port.
  explicit SocketTransport(const std::string& listen_addr);
  ~SocketTransport() override;

  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  std::string listen_addr() const;  // actual address after bind

  void add_node(NodeId id, Node* node) override;
  void add_peer(NodeId id, const std::string& addr);
  void send(NodeId src, NodeId dst, const Message& m) override;
  uint64_t set_timer(NodeId owner, uint64_t delay_ms, uint64_t token) override;
  void cancel_timer(uint64_t timer_id) override;
  uint64_t now() const override;
  void post(NodeId owner, std::function<void()> fn) override;

  // Stops threads and closes sockets; further sends are dropped.
  void stop();

 private:
  struct InboxItem {
    enum Kind : uint8_t { kMessage, kTimer, kFn } kind;
    Envelope env;
    uint64_t token = 0;
    std::function<void()> fn;
  };

  struct LocalNode {
    Node* node = nullptr;
    std::deque<InboxItem> inbox;
    std::mutex mutex;
    std::condition_variable cv;
    std::thread dispatcher;
    bool stopping = false;
  };

  struct Conn {
    int fd = -1;
    std::mutex write_mutex;
    std::thread reader;
  };

  void enqueue_local(NodeId dst, InboxItem&& item);
  void dispatcher_loop(LocalNode* ln);
  void accept_loop();
  void reader_loop(std::shared_ptr<Conn> conn);
  void timer_loop();
  std::shared_ptr<Conn> connection_to(const std::string& addr);
  bool write_frame(Conn& conn, const Envelope& env);
  void learn_peer(NodeId id, const std::string& addr);

  mutable std::mutex mutex_;
  int listen_fd_ = -1;
  std::string listen_addr_;
  std::thread acceptor_;
  std::atomic<bool> stopping_{false};

  std::unordered_map<NodeId, std::unique_ptr<LocalNode>> nodes_;
  std::unordered_map<NodeId, std::string> peers_;
  std::map<std::string, std::shared_ptr<Conn>> conns_;
  std::vector<std::shared_ptr<Conn>> dead_conns_;

  std::atomic<uint64_t> next_msg_id_{1};
  std::chrono::steady_clock::time_point epoch_;

  // Timers: one thread, heap by deadline.
  struct TimerEntry {
    uint64_t at;
    uint64_t id;
    NodeId owner;
    uint64_t token;
  };
  std::mutex timer_mutex_;
  std::condition_variable timer_cv_;
  std::map<std::pair<uint64_t, uint64_t>, TimerEntry> timers_;
  std::unordered_map<uint64_t, std::pair<uint64_t, uint64_t>> timer_index_;
  uint64_t next_timer_id_ = 1;
  std::thread timer_thread_;
};

// Parses "host:port"; throws ArgError on malformed input.
std::pair<std::string, uint16_t> parse_addr(const std::string& addr);

}  // namespace apslda
