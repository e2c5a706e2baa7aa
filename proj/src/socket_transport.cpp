#include "apslda/socket_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

#include "apslda/error.hpp"
#include "apslda/log.hpp"

namespace apslda {

namespace {

// Frame layout: u32 length | u8 kind | body. kind 0 = hello (body: u32 len +
// listen address string), kind 1 = envelope (u32 src | u32 dst | u64 msg_id |
// payload bytes).
constexpr uint8_t kFrameHello = 0;
constexpr uint8_t kFrameEnvelope = 1;
constexpr uint32_t kMaxFrame = 256u << 20;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}
uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

bool read_exact(int fd, uint8_t* buf, size_t n) {
  size_t got = 0;
  while (got < n) {
    const ssize_t r = ::read(fd, buf + got, n - got);
    if (r <= 0) return false;
    got += static_cast<size_t>(r);
  }
  return true;
}

bool write_all(int fd, const uint8_t* buf, size_t n) {
  size_t sent = 0;
  while (sent < n) {
    const ssize_t r = ::send(fd, buf + sent, n - sent, MSG_NOSIGNAL);
    if (r <= 0) return false;
    sent += static_cast<size_t>(r);
  }
  return true;
}

}  // namespace

std::pair<std::string, uint16_t> parse_addr(const std::string& addr) {
  const size_t colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= addr.size())
    throw ArgError("address must be host:port, got '" + addr + "'");
  const std::string host = addr.substr(0, colon);
  unsigned long port = 0;
  try {
    port = std::stoul(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw ArgError("bad port in address '" + addr + "'");
  }
  if (port > 65535) throw ArgError("bad port in address '" + addr + "'");
  return {host, static_cast<uint16_t>(port)};
}

SocketTransport::SocketTransport(const std::string& listen_addr)
    : epoch_(std::chrono::steady_clock::now()) {
  const auto [host, port] = parse_addr(listen_addr);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1)
    throw ArgError("bad listen host '" + host + "' (numeric IPv4 only)");
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    ::close(listen_fd_);
    throw TransportError("bind failed for " + listen_addr);
  }
  if (::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    throw TransportError("listen failed for " + listen_addr);
  }
  sockaddr_in actual{};
  socklen_t len = sizeof(actual);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&actual), &len);
  char buf[64];
  ::inet_ntop(AF_INET, &actual.sin_addr, buf, sizeof(buf));
  listen_addr_ = std::string(buf) + ":" + std::to_string(ntohs(actual.sin_port));

  acceptor_ = std::thread([this] { accept_loop(); });
  timer_thread_ = std::thread([this] { timer_loop(); });
}

SocketTransport::~SocketTransport() { stop(); }

std::string SocketTransport::listen_addr() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return listen_addr_;
}

uint64_t SocketTransport::now() const {
  using namespace std::chrono;
  return static_cast<uint64_t>(duration_cast<milliseconds>(steady_clock::now() - epoch_).count());
}

void SocketTransport::add_node(NodeId id, Node* node) {
  auto ln = std::make_unique<LocalNode>();
  ln->node = node;
  LocalNode* raw = ln.get();
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (stopping_) throw Error("transport stopped");
    if (!nodes_.emplace(id, std::move(ln)).second) throw Error("duplicate node id");
  }
  raw->dispatcher = std::thread([this, raw] { dispatcher_loop(raw); });
}

void SocketTransport::add_peer(NodeId id, const std::string& addr) {
  std::lock_guard<std::mutex> lock(mutex_);
  peers_[id] = addr;
}

void SocketTransport::learn_peer(NodeId id, const std::string& addr) {
  std::lock_guard<std::mutex> lock(mutex_);
  peers_.emplace(id, addr);  // first mapping wins; explicit add_peer overrides
}

void SocketTransport::enqueue_local(NodeId dst, InboxItem&& item) {
  LocalNode* ln = nullptr;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = nodes_.find(dst);
    if (it == nodes_.end()) return;
    ln = it->second.get();
  }
  {
    std::lock_guard<std::mutex> lock(ln->mutex);
    ln->inbox.push_back(std::move(item));
  }
  ln->cv.notify_one();
}

void SocketTransport::dispatcher_loop(LocalNode* ln) {
  for (;;) {
    InboxItem item;
    {
      std::unique_lock<std::mutex> lock(ln->mutex);
      ln->cv.wait(lock, [&] { return ln->stopping || !ln->inbox.empty(); });
      if (ln->stopping && ln->inbox.empty()) return;
      item = std::move(ln->inbox.front());
      ln->inbox.pop_front();
    }
    try {
      switch (item.kind) {
        case InboxItem::kMessage: {
          const Message m = decode_message(item.env.payload);
          ln->node->on_message(item.env.src, m);
          break;
        }
        case InboxItem::kTimer:
          ln->node->on_timer(item.token);
          break;
        case InboxItem::kFn:
          item.fn();
          break;
      }
    } catch (const std::exception& e) {
      LOG_ERROR("node handler threw: " << e.what());
    }
  }
}

void SocketTransport::send(NodeId src, NodeId dst, const Message& m) {
  Envelope env;
  env.src = src;
  env.dst = dst;
  env.msg_id = next_msg_id_.fetch_add(1, std::memory_order_relaxed);
  env.payload = encode_message(m);

  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (stopping_) return;
    if (nodes_.find(dst) != nodes_.end()) {
      // Local short-circuit keeps the same inbox serialization as remote
      // delivery.
      InboxItem item;
      item.kind = InboxItem::kMessage;
      item.env = std::move(env);
      auto it = nodes_.find(dst);
      LocalNode* ln = it->second.get();
      {
        std::lock_guard<std::mutex> nl(ln->mutex);
        ln->inbox.push_back(std::move(item));
      }
      ln->cv.notify_one();
      return;
    }
  }

  std::string addr;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = peers_.find(dst);
    if (it == peers_.end()) throw Error("send to unknown node " + std::to_string(dst));
    addr = it->second;
  }
  std::shared_ptr<Conn> conn = connection_to(addr);
  if (!conn) {
    LOG_DEBUG("drop message to " << dst << " (" << addr << " unreachable)");
    return;  // at-most-once: an unreachable peer is a lost message
  }
  if (!write_frame(*conn, env)) LOG_DEBUG("drop message to " << dst << " (write failed)");
}

bool SocketTransport::write_frame(Conn& conn, const Envelope& env) {
  std::vector<uint8_t> frame;
  frame.reserve(4 + 1 + 16 + env.payload.size());
  put_u32(frame, static_cast<uint32_t>(1 + 4 + 4 + 8 + env.payload.size()));
  frame.push_back(kFrameEnvelope);
  put_u32(frame, env.src);
  put_u32(frame, env.dst);
  put_u64(frame, env.msg_id);
  frame.insert(frame.end(), env.payload.begin(), env.payload.end());
  std::lock_guard<std::mutex> lock(conn.write_mutex);
  return write_all(conn.fd, frame.data(), frame.size());
}

std::shared_ptr<SocketTransport::Conn> SocketTransport::connection_to(const std::string& addr) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = conns_.find(addr);
    if (it != conns_.end()) return it->second;
  }

  const auto [host, port] = parse_addr(addr);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return nullptr;
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1 ||
      ::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    ::close(fd);
    return nullptr;
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

  auto conn = std::make_shared<Conn>();
  conn->fd = fd;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (stopping_) {
      ::close(fd);
      return nullptr;
    }
    auto [it, inserted] = conns_.emplace(addr, conn);
    if (!inserted) {
      ::close(fd);  // raced with another connector; reuse theirs
      return it->second;
    }
  }

  // Introduce ourselves so the peer can route replies to our listen address.
  std::vector<uint8_t> hello;
  const std::string self = listen_addr();
  put_u32(hello, static_cast<uint32_t>(1 + 4 + self.size()));
  hello.push_back(kFrameHello);
  put_u32(hello, static_cast<uint32_t>(self.size()));
  hello.insert(hello.end(), self.begin(), self.end());
  {
    std::lock_guard<std::mutex> lock(conn->write_mutex);
    if (!write_all(fd, hello.data(), hello.size())) return nullptr;
  }

  std::shared_ptr<Conn> reader_ref = conn;
  conn->reader = std::thread([this, reader_ref] { reader_loop(reader_ref); });
  return conn;
}

void SocketTransport::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) return;  // listener closed
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    auto conn = std::make_shared<Conn>();
    conn->fd = fd;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (stopping_) {
        ::close(fd);
        return;
      }
      dead_conns_.push_back(conn);  // owned until the hello names its address
    }
    conn->reader = std::thread([this, conn] { reader_loop(conn); });
  }
}

void SocketTransport::reader_loop(std::shared_ptr<Conn> conn) {
  std::string remote_addr;
  std::vector<uint8_t> buf;
  for (;;) {
    uint8_t len_bytes[4];
    if (!read_exact(conn->fd, len_bytes, 4)) break;
    const uint32_t len = get_u32(len_bytes);
    if (len == 0 || len > kMaxFrame) break;
    buf.resize(len);
    if (!read_exact(conn->fd, buf.data(), len)) break;

    const uint8_t kind = buf[0];
    if (kind == kFrameHello) {
      if (len < 5) break;
      const uint32_t n = get_u32(buf.data() + 1);
      if (5 + n != len) break;
      remote_addr.assign(reinterpret_cast<const char*>(buf.data() + 5), n);
      std::lock_guard<std::mutex> lock(mutex_);
      conns_.emplace(remote_addr, conn);  // reuse inbound connection for replies
      continue;
    }
    if (kind != kFrameEnvelope || len < 17) break;
    Envelope env;
    env.src = get_u32(buf.data() + 1);
    env.dst = get_u32(buf.data() + 5);
    env.msg_id = get_u64(buf.data() + 9);
    env.payload.assign(buf.begin() + 17, buf.end());
    const NodeId src = env.src;
    const NodeId dst = env.dst;
    if (!remote_addr.empty()) learn_peer(src, remote_addr);
    InboxItem item;
    item.kind = InboxItem::kMessage;
    item.env = std::move(env);
    enqueue_local(dst, std::move(item));
  }
  ::shutdown(conn->fd, SHUT_RDWR);
}

uint64_t SocketTransport::set_timer(NodeId owner, uint64_t delay_ms, uint64_t token) {
  std::lock_guard<std::mutex> lock(timer_mutex_);
  const uint64_t id = next_timer_id_++;
  uint64_t at = now() + delay_ms;
  if (at < delay_ms) at = UINT64_MAX - 1;
  timers_.emplace(std::make_pair(at, id), TimerEntry{at, id, owner, token});
  timer_index_[id] = {at, id};
  timer_cv_.notify_one();
  return id;
}

void SocketTransport::cancel_timer(uint64_t timer_id) {
  std::lock_guard<std::mutex> lock(timer_mutex_);
  auto it = timer_index_.find(timer_id);
  if (it == timer_index_.end()) return;
  timers_.erase(it->second);
  timer_index_.erase(it);
}

void SocketTransport::timer_loop() {
  std::unique_lock<std::mutex> lock(timer_mutex_);
  for (;;) {
    if (stopping_) return;
    if (timers_.empty()) {
      timer_cv_.wait(lock);
      continue;
    }
    const uint64_t next_at = timers_.begin()->first.first;
    const uint64_t t = now();
    if (t < next_at) {
      timer_cv_.wait_for(lock, std::chrono::milliseconds(next_at - t));
      continue;
    }
    TimerEntry e = timers_.begin()->second;
    timer_index_.erase(e.id);
    timers_.erase(timers_.begin());
    lock.unlock();
    InboxItem item;
    item.kind = InboxItem::kTimer;
    item.token = e.token;
    enqueue_local(e.owner, std::move(item));
    lock.lock();
  }
}

void SocketTransport::post(NodeId owner, std::function<void()> fn) {
  InboxItem item;
  item.kind = InboxItem::kFn;
  item.fn = std::move(fn);
  enqueue_local(owner, std::move(item));
}

void SocketTransport::stop() {
  std::vector<std::shared_ptr<Conn>> conns;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (stopping_.exchange(true)) return;
    for (auto& [addr, c] : conns_) conns.push_back(c);
    for (auto& c : dead_conns_) conns.push_back(c);
    conns_.clear();
    dead_conns_.clear();
  }
  std::sort(conns.begin(), conns.end());
  conns.erase(std::unique(conns.begin(), conns.end()), conns.end());
  {
    std::lock_guard<std::mutex> lock(timer_mutex_);
    timers_.clear();
    timer_index_.clear();
  }
  timer_cv_.notify_all();
  if (timer_thread_.joinable()) timer_thread_.join();

  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();

  for (auto& c : conns) {
    ::shutdown(c->fd, SHUT_RDWR);
    if (c->reader.joinable()) c->reader.join();
    ::close(c->fd);
  }

  std::vector<LocalNode*> locals;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& [id, ln] : nodes_) locals.push_back(ln.get());
  }
  for (LocalNode* ln : locals) {
    {
      std::lock_guard<std::mutex> lock(ln->mutex);
      ln->stopping = true;
    }
    ln->cv.notify_all();
    if (ln->dispatcher.joinable()) ln->dispatcher.join();
  }
}

}  // namespace apslda
