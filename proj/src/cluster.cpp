#include "apslda/cluster.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <future>
#include <mutex>
#include <ostream>
#include <random>

#include "apslda/error.hpp"
#include "apslda/log.hpp"
#include "apslda/socket_transport.hpp"
#include "apslda/worker.hpp"

namespace apslda {

namespace {

// Counts completions across worker callbacks running on other threads.
class Latch {
 public:
  void arrive(bool ok, const std::string& err) {
    std::lock_guard<std::mutex> lock(m_);
    ++count_;
    if (!ok && error_.empty()) error_ = err.empty() ? "unknown failure" : err;
    cv_.notify_all();
  }

  void add(uint64_t n) {
    std::lock_guard<std::mutex> lock(m_);
    sum_ += n;
  }

  std::string wait_for(size_t n) {
    std::unique_lock<std::mutex> lock(m_);
    cv_.wait(lock, [&] { return count_ >= n; });
    return error_;
  }

  uint64_t sum() const {
    std::lock_guard<std::mutex> lock(m_);
    return sum_;
  }

 private:
  mutable std::mutex m_;
  std::condition_variable cv_;
  size_t count_ = 0;
  uint64_t sum_ = 0;
  std::string error_;
};

CountMatrix counts_from_pull(const PullResult& r, uint32_t vocab, uint32_t topics) {
  CountMatrix m;
  m.vocab_size = vocab;
  m.num_topics = topics;
  m.word_topic.assign(r.values.begin(), r.values.begin() + size_t(vocab) * topics);
  m.topic_totals.assign(r.values.end() - topics, r.values.end());
  return m;
}

std::vector<uint32_t> all_rows(uint32_t vocab) {
  std::vector<uint32_t> rows(vocab);
  for (uint32_t w = 0; w < vocab; ++w) rows[w] = w;
  rows.push_back(kTopicCountsRow);
  return rows;
}

// Model pull from a node living on another dispatcher thread.
CountMatrix pull_model_blocking(SocketTransport& transport, NodeId aux_id, ClientNode& aux,
                                uint32_t vocab, uint32_t topics) {
  std::promise<PullResult> prom;
  auto fut = prom.get_future();
  transport.post(aux_id, [&] {
    aux.client().pull_rows(all_rows(vocab), [&](PullResult r) { prom.set_value(std::move(r)); });
  });
  PullResult r = fut.get();
  if (!r.ok) throw TransportError("model pull failed: " + r.error);
  return counts_from_pull(r, vocab, topics);
}

}  // namespace

struct ThreadedCluster::Impl {
  TrainerConfig cfg;
  Corpus corpus;
  Hyperparams hp;
  SocketTransport transport{"127.0.0.1:0"};
  PsTopology topo;
  std::vector<std::unique_ptr<ShardNode>> shards;
  std::vector<std::unique_ptr<WorkerNode>> workers;
  std::unique_ptr<ClientNode> aux;
  NodeId aux_id = 0;
  std::atomic<bool> finished{false};
};

ThreadedCluster::ThreadedCluster(const TrainerConfig& cfg, Corpus corpus)
    : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  impl_->cfg = cfg;
  impl_->corpus = std::move(corpus);
  if (impl_->corpus.vocab_size == 0) impl_->corpus.vocab_size = 1;
  impl_->hp = cfg.hyperparams(impl_->corpus.vocab_size);

  impl_->topo.rows = RowPartitioning(impl_->corpus.vocab_size, cfg.shards);
  impl_->topo.num_topics = cfg.topics;
  for (uint32_t s = 0; s < cfg.shards; ++s) impl_->topo.shard_nodes.push_back(s);

  for (uint32_t s = 0; s < cfg.shards; ++s) {
    impl_->shards.push_back(
        std::make_unique<ShardNode>(&impl_->transport, s, impl_->topo.rows, cfg.topics));
    impl_->transport.add_node(s, impl_->shards.back().get());
  }

  init_assignments(impl_->corpus, cfg.topics, cfg.seed);
  const std::vector<Partition> parts = partition(impl_->corpus, cfg.workers);
  for (uint32_t w = 0; w < cfg.workers; ++w) {
    const NodeId id = cfg.shards + w;
    impl_->workers.push_back(std::make_unique<WorkerNode>(
        &impl_->transport, id, impl_->topo, cfg.backoff, impl_->hp,
        build_doc_states(impl_->corpus, parts[w], cfg.topics), cfg.mh_steps,
        derive_seed(cfg.seed, Stream::kSampler, w), cfg.pull_window, cfg.inflight_cap));
    impl_->transport.add_node(id, impl_->workers.back().get());
  }

  impl_->aux_id = cfg.shards + cfg.workers;
  impl_->aux = std::make_unique<ClientNode>(&impl_->transport, impl_->aux_id, impl_->topo,
                                            cfg.backoff);
  impl_->transport.add_node(impl_->aux_id, impl_->aux.get());
}

ThreadedCluster::~ThreadedCluster() {
  // Joins every dispatcher before the nodes go away.
  impl_->transport.stop();
}

bool ThreadedCluster::finished() const { return impl_->finished.load(); }
uint32_t ThreadedCluster::vocab_size() const { return impl_->corpus.vocab_size; }

CountMatrix ThreadedCluster::pull_model() {
  return pull_model_blocking(impl_->transport, impl_->aux_id, *impl_->aux,
                             impl_->corpus.vocab_size, impl_->cfg.topics);
}

std::vector<std::vector<std::pair<uint32_t, int64_t>>> ThreadedCluster::top_words(uint32_t n) {
  return top_words_from(pull_model(), n);
}

TrainedModel ThreadedCluster::train(const Corpus* test, std::ostream* progress) {
  Impl& im = *impl_;
  const TrainerConfig& cfg = im.cfg;
  {
    Latch latch;
    for (auto& worker : im.workers) {
      WorkerNode* node = worker.get();
      im.transport.post(node->id(), [node, &latch] {
        node->push_initial_counts([&latch](bool ok) { latch.arrive(ok, "initial push failed"); });
      });
    }
    const std::string err = latch.wait_for(cfg.workers);
    if (!err.empty()) {
      im.finished.store(true);
      throw TransportError(err);
    }
  }

  TrainedModel model;
  model.hp = im.hp;
  const bool eval_on = test != nullptr && !test->docs.empty() && cfg.eval_every > 0;
  for (uint32_t iter = 1; iter <= cfg.iterations; ++iter) {
    Latch latch;
    for (auto& worker : im.workers) {
      WorkerNode* node = worker.get();
      im.transport.post(node->id(), [node, &latch] {
        node->begin_iteration([&latch](const IterationOutcome& out) {
          latch.add(out.pushes);
          latch.arrive(out.ok, out.error);
        });
      });
    }
    const std::string err = latch.wait_for(cfg.workers);
    if (!err.empty()) {
      im.finished.store(true);
      throw TransportError("iteration " + std::to_string(iter) + " aborted: " + err);
    }

    IterationStats stats;
    stats.iteration = iter;
    stats.drained_pushes = latch.sum();
    if (eval_on && iter % cfg.eval_every == 0) {
      const CountMatrix counts = pull_model();
      stats.has_perplexity = true;
      stats.perplexity = perplexity(make_estimate(counts, im.hp), test->docs, im.hp, cfg.seed,
                                    cfg.foldin_passes, cfg.foldin_burnin);
    }
    if (progress) *progress << progress_line(stats) << "\n";
    model.history.push_back(stats);
  }

  model.counts = pull_model();
  if (eval_on) {
    if (!model.history.empty() && model.history.back().has_perplexity) {
      model.final_perplexity = model.history.back().perplexity;
    } else {
      model.final_perplexity = perplexity(make_estimate(model.counts, im.hp), test->docs, im.hp,
                                          cfg.seed, cfg.foldin_passes, cfg.foldin_burnin);
    }
    model.has_final_perplexity = true;
  }
  im.finished.store(true);
  return model;
}

TrainedModel train_threaded(const TrainerConfig& cfg, Corpus corpus, const Corpus* test,
                            std::ostream* progress) {
  ThreadedCluster cluster(cfg, std::move(corpus));
  return cluster.train(test, progress);
}

// ---- multi-process roles ------------------------------------------------

NodeId random_bootstrap_id() {
  std::random_device rd;
  return 0x80000000u | (static_cast<NodeId>(rd()) & 0x3FFFFFFFu);
}

namespace {

constexpr uint64_t kRegisterRetryMs = 500;
constexpr uint32_t kRegisterMaxRetries = 60;

// Registers with the driver until an AssignNode (and optionally a
// ClusterReady) arrives. Runs its own little node.
class BootstrapNode : public Node {
 public:
  BootstrapNode(SocketTransport* transport, NodeId self, NodeId driver, NodeRole role,
                bool wait_ready)
      : transport_(transport),
        self_(self),
        driver_(driver),
        role_(role),
        wait_ready_(wait_ready),
        shutdown_fut_(shutdown_.get_future()) {}

  void start() {
    transport_->post(self_, [this] {
      send_register();
      timer_ = transport_->set_timer(self_, kRegisterRetryMs, 1);
    });
  }

  void on_message(NodeId src, const Message& m) override {
    (void)src;
    if (const auto* assign = std::get_if<AssignNode>(&m)) {
      assigned_ = assign->node_id;
      maybe_finish();
    } else if (const auto* ready = std::get_if<ClusterReady>(&m)) {
      ready_ = *ready;
      have_ready_ = true;
      maybe_finish();
    } else if (std::get_if<ShutdownCmd>(&m) != nullptr) {
      shutdown_.set_value(0);
    } else if (const auto* abort = std::get_if<AbortRun>(&m)) {
      LOG_ERROR("run aborted: " << abort->reason);
      shutdown_.set_value(2);
    }
  }

  void on_timer(uint64_t) override {
    if (done_) return;
    if (++retries_ > kRegisterMaxRetries) {
      joined_.set_value(false);
      done_ = true;
      return;
    }
    send_register();
    timer_ = transport_->set_timer(self_, kRegisterRetryMs, 1);
  }

  // Blocks until assignment; false on timeout.
  bool wait_joined() { return joined_.get_future().get(); }
  int wait_shutdown() { return shutdown_fut_.get(); }
  std::future<int>& shutdown_future() { return shutdown_fut_; }

  uint32_t assigned_id() const { return assigned_; }
  const ClusterReady& ready() const { return ready_; }

 private:
  void send_register() {
    RegisterNode reg;
    reg.role = static_cast<uint8_t>(role_);
    reg.listen_addr = transport_->listen_addr();
    transport_->send(self_, driver_, reg);
  }

  void maybe_finish() {
    if (done_ || assigned_ == 0) return;
    if (wait_ready_ && !have_ready_) return;
    if (timer_ != 0) transport_->cancel_timer(timer_);
    done_ = true;
    joined_.set_value(true);
  }

  SocketTransport* transport_;
  NodeId self_, driver_;
  NodeRole role_;
  bool wait_ready_;
  uint64_t timer_ = 0;
  uint32_t retries_ = 0;
  uint32_t assigned_ = 0;
  bool have_ready_ = false;
  bool done_ = false;
  ClusterReady ready_;
  std::promise<bool> joined_;
  std::promise<int> shutdown_;
  std::future<int> shutdown_fut_;
};

Corpus load_train_corpus(const ProcessConfig& cfg, Corpus* test_out) {
  Corpus corpus = load_libsvm(cfg.dataset, cfg.declared_vocab);
  if (cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0 && corpus.docs.size() >= 2) {
    auto [train, test] = split_corpus(corpus, cfg.split_ratio, cfg.trainer.seed);
    if (test_out) *test_out = std::move(test);
    return train;
  }
  return corpus;
}

}  // namespace

int run_server_process(const ProcessConfig& cfg) {
  SocketTransport transport(cfg.listen_addr);
  struct StopGuard {
    SocketTransport& t;
    ~StopGuard() { t.stop(); }
  } guard{transport};

  transport.add_peer(kDriverNode, cfg.driver_addr);
  const NodeId boot_id = random_bootstrap_id();
  BootstrapNode boot(&transport, boot_id, kDriverNode, NodeRole::kServer, false);
  transport.add_node(boot_id, &boot);
  boot.start();
  if (!boot.wait_joined()) {
    LOG_ERROR("server registration timed out");
    return 2;
  }

  Corpus corpus = load_train_corpus(cfg, nullptr);
  RowPartitioning rows(corpus.vocab_size == 0 ? 1 : corpus.vocab_size, cfg.trainer.shards);
  ShardNode shard(&transport, boot.assigned_id(), rows, cfg.trainer.topics);
  transport.add_node(boot.assigned_id(), &shard);
  LOG_INFO("server ready as shard " << boot.assigned_id());
  return boot.wait_shutdown();
}

int run_worker_process(const ProcessConfig& cfg) {
  SocketTransport transport(cfg.listen_addr);
  struct StopGuard {
    SocketTransport& t;
    ~StopGuard() { t.stop(); }
  } guard{transport};

  transport.add_peer(kDriverNode, cfg.driver_addr);
  const NodeId boot_id = random_bootstrap_id();
  BootstrapNode boot(&transport, boot_id, kDriverNode, NodeRole::kWorker, true);
  transport.add_node(boot_id, &boot);
  boot.start();
  if (!boot.wait_joined()) {
    LOG_ERROR("worker registration timed out");
    return 2;
  }
  const ClusterReady& ready = boot.ready();
  for (const NodeAddr& a : ready.shard_addrs) transport.add_peer(a.node_id, a.addr);

  Corpus corpus = load_train_corpus(cfg, nullptr);
  if (corpus.vocab_size == 0) corpus.vocab_size = 1;
  const Hyperparams hp = cfg.trainer.hyperparams(corpus.vocab_size);
  init_assignments(corpus, cfg.trainer.topics, cfg.trainer.seed);

  const uint32_t worker_index = boot.assigned_id() - cfg.trainer.shards;
  const std::vector<Partition> parts = partition(corpus, cfg.trainer.workers);

  PsTopology topo;
  topo.rows = RowPartitioning(corpus.vocab_size, cfg.trainer.shards);
  topo.num_topics = cfg.trainer.topics;
  for (uint32_t s = 0; s < cfg.trainer.shards; ++s) topo.shard_nodes.push_back(s);

  WorkerNode worker(&transport, boot.assigned_id(), topo, cfg.trainer.backoff, hp,
                    build_doc_states(corpus, parts[worker_index], cfg.trainer.topics),
                    cfg.trainer.mh_steps,
                    derive_seed(cfg.trainer.seed, Stream::kSampler, worker_index),
                    cfg.trainer.pull_window, cfg.trainer.inflight_cap);

  std::promise<int> done;
  worker.set_control_handler([&](NodeId, const Message& m) {
    if (const auto* start = std::get_if<StartIteration>(&m)) {
      const uint32_t iter = start->iteration;
      worker.begin_iteration([&, iter](const IterationOutcome& out) {
        if (!out.ok) {
          transport.send(worker.id(), kDriverNode, AbortRun{out.error});
          return;
        }
        transport.send(worker.id(), kDriverNode,
                       IterationDone{iter, worker_index, out.pushes});
      });
    } else if (std::get_if<ShutdownCmd>(&m) != nullptr) {
      done.set_value(0);
    } else if (const auto* abort = std::get_if<AbortRun>(&m)) {
      LOG_ERROR("run aborted: " << abort->reason);
      done.set_value(2);
    }
  });
  transport.add_node(worker.id(), &worker);

  transport.post(worker.id(), [&] {
    worker.push_initial_counts([&](bool ok) {
      if (!ok) {
        transport.send(worker.id(), kDriverNode, AbortRun{"initial count push failed"});
        return;
      }
      transport.send(worker.id(), kDriverNode, InitDone{worker_index});
    });
  });
  LOG_INFO("worker " << worker_index << " ready");
  return done.get_future().get();
}

int run_driver_process(const ProcessConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.trainer.validate();
  SocketTransport transport(cfg.listen_addr);
  struct StopGuard {
    SocketTransport& t;
    ~StopGuard() { t.stop(); }
  } guard{transport};

  Corpus test;
  Corpus corpus = load_train_corpus(cfg, &test);
  if (corpus.vocab_size == 0) corpus.vocab_size = 1;
  const Hyperparams hp = cfg.trainer.hyperparams(corpus.vocab_size);
  const bool eval_on = !test.docs.empty() && cfg.trainer.eval_every > 0;

  PsTopology topo;
  topo.rows = RowPartitioning(corpus.vocab_size, cfg.trainer.shards);
  topo.num_topics = cfg.trainer.topics;
  for (uint32_t s = 0; s < cfg.trainer.shards; ++s) topo.shard_nodes.push_back(s);

  const NodeId self = kDriverNode;
  ClientNode node(&transport, self, topo, cfg.trainer.backoff);

  struct Peer {
    NodeId boot;
    NodeId real;
    std::string addr;
  };
  // Driver state machine; all fields touched only on the driver dispatcher.
  struct DriverState {
    std::vector<Peer> servers, workers, observers;
    std::map<NodeId, NodeId> assigned;  // bootstrap id -> real id
    uint32_t init_done = 0;
    uint32_t iter = 0;
    uint32_t iter_done = 0;
    uint64_t iter_pushes = 0;
    bool running = false;
    std::promise<int> exit_code;
    bool exited = false;
  } st;

  auto broadcast_shutdown = [&](const std::string& abort_reason) {
    for (const auto& list : {st.servers, st.workers, st.observers})
      for (const Peer& p : list) {
        if (abort_reason.empty())
          transport.send(self, p.boot, ShutdownCmd{});
        else
          transport.send(self, p.boot, AbortRun{abort_reason});
        if (p.real != 0 && p.real != p.boot) {
          if (abort_reason.empty())
            transport.send(self, p.real, ShutdownCmd{});
          else
            transport.send(self, p.real, AbortRun{abort_reason});
        }
      }
  };
  auto finish = [&](int code, const std::string& abort_reason) {
    if (st.exited) return;
    broadcast_shutdown(abort_reason);
    st.exited = true;
    st.exit_code.set_value(code);
  };

  ClusterReady ready;
  ready.num_shards = cfg.trainer.shards;
  ready.num_workers = cfg.trainer.workers;
  ready.num_topics = cfg.trainer.topics;
  ready.vocab_size = corpus.vocab_size;

  auto start_iteration = [&](uint32_t iter) {
    st.iter = iter;
    st.iter_done = 0;
    st.iter_pushes = 0;
    for (const Peer& p : st.workers) transport.send(self, p.real, StartIteration{iter});
  };

  auto pull_counts = [&](std::function<void(CountMatrix)> cb) {
    node.client().pull_rows(all_rows(corpus.vocab_size), [&, cb = std::move(cb)](PullResult r) {
      if (!r.ok) {
        err << "model pull failed: " << r.error << "\n";
        finish(2, "model pull failed");
        return;
      }
      cb(counts_from_pull(r, corpus.vocab_size, cfg.trainer.topics));
    });
  };

  std::function<void()> after_iteration = [&] {
    IterationStats stats;
    stats.iteration = st.iter;
    stats.drained_pushes = st.iter_pushes;
    auto proceed = [&, stats](IterationStats s) {
      err << progress_line(s) << "\n";
      if (st.iter < cfg.trainer.iterations) {
        start_iteration(st.iter + 1);
        return;
      }
      // Final model: export, report, shut down.
      pull_counts([&](CountMatrix counts) {
        if (!cfg.out_csv.empty()) export_csv(counts, hp, cfg.out_csv);
        if (eval_on) {
          const double pp = perplexity(make_estimate(counts, hp), test.docs, hp,
                                       cfg.trainer.seed, cfg.trainer.foldin_passes,
                                       cfg.trainer.foldin_burnin);
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.6g", pp);
          out << "final_perplexity " << buf << "\n";
        }
        finish(0, "");
      });
    };
    if (eval_on && st.iter % cfg.trainer.eval_every == 0) {
      pull_counts([&, stats, proceed](CountMatrix counts) mutable {
        stats.has_perplexity = true;
        stats.perplexity = perplexity(make_estimate(counts, hp), test.docs, hp, cfg.trainer.seed,
                                      cfg.trainer.foldin_passes, cfg.trainer.foldin_burnin);
        proceed(stats);
      });
    } else {
      proceed(stats);
    }
  };

  node.set_control_handler([&](NodeId src, const Message& m) {
    if (const auto* reg = std::get_if<RegisterNode>(&m)) {
      auto seen = st.assigned.find(src);
      if (seen != st.assigned.end()) {
        transport.send(self, src, AssignNode{seen->second});  // re-register: same answer
        if (static_cast<NodeRole>(reg->role) == NodeRole::kWorker && st.running == false &&
            st.servers.size() == cfg.trainer.shards && st.workers.size() == cfg.trainer.workers)
          transport.send(self, src, ready);
        return;
      }
      const NodeRole role = static_cast<NodeRole>(reg->role);
      NodeId real = 0;
      if (role == NodeRole::kServer) {
        if (st.servers.size() >= cfg.trainer.shards) return;  // full
        real = static_cast<NodeId>(st.servers.size());
        st.servers.push_back({src, real, reg->listen_addr});
      } else if (role == NodeRole::kWorker) {
        if (st.workers.size() >= cfg.trainer.workers) return;
        real = cfg.trainer.shards + static_cast<NodeId>(st.workers.size());
        st.workers.push_back({src, real, reg->listen_addr});
      } else {
        real = kObserverBase + static_cast<NodeId>(st.observers.size());
        st.observers.push_back({src, real, reg->listen_addr});
      }
      st.assigned[src] = real;
      transport.add_peer(real, reg->listen_addr);
      transport.send(self, src, AssignNode{real});
      if (role == NodeRole::kObserver) {
        transport.send(self, src, ready);
        return;
      }
      if (st.servers.size() == cfg.trainer.shards && st.workers.size() == cfg.trainer.workers &&
          ready.shard_addrs.empty()) {
        for (const Peer& p : st.servers) ready.shard_addrs.push_back({p.real, p.addr});
        for (const Peer& p : st.workers) transport.send(self, p.boot, ready);
        LOG_INFO("cluster assembled: " << cfg.trainer.shards << " shards, "
                                       << cfg.trainer.workers << " workers");
      }
      return;
    }
    if (std::get_if<InitDone>(&m) != nullptr) {
      if (++st.init_done == cfg.trainer.workers) {
        st.running = true;
        start_iteration(1);
      }
      return;
    }
    if (const auto* done = std::get_if<IterationDone>(&m)) {
      if (done->iteration != st.iter) return;  // stale
      st.iter_pushes += done->pushes;
      if (++st.iter_done == cfg.trainer.workers) after_iteration();
      return;
    }
    if (const auto* abort = std::get_if<AbortRun>(&m)) {
      err << "run aborted: " << abort->reason << "\n";
      finish(2, abort->reason);
      return;
    }
  });
  transport.add_node(self, &node);
  LOG_INFO("driver listening on " << transport.listen_addr());

  return st.exit_code.get_future().get();
}

int run_topwords_observer(const std::string& driver_addr, const std::string& listen_addr,
                          uint32_t top_n, uint64_t interval_ms, std::ostream& out) {
  if (top_n < 1) throw ArgError("top-word count must be >= 1");
  SocketTransport transport(listen_addr);
  struct StopGuard {
    SocketTransport& t;
    ~StopGuard() { t.stop(); }
  } guard{transport};

  transport.add_peer(kDriverNode, driver_addr);
  const NodeId boot_id = random_bootstrap_id();
  BootstrapNode boot(&transport, boot_id, kDriverNode, NodeRole::kObserver, true);
  transport.add_node(boot_id, &boot);
  boot.start();
  if (!boot.wait_joined()) {
    LOG_ERROR("observer registration timed out");
    return 2;
  }
  const ClusterReady& ready = boot.ready();

  PsTopology topo;
  topo.rows = RowPartitioning(ready.vocab_size, ready.num_shards);
  topo.num_topics = ready.num_topics;
  for (const NodeAddr& a : ready.shard_addrs) {
    topo.shard_nodes.push_back(a.node_id);
    transport.add_peer(a.node_id, a.addr);
  }

  ClientNode client(&transport, boot.assigned_id(), topo, BackoffPolicy{});
  transport.add_node(boot.assigned_id(), &client);

  std::future<int>& shutdown = boot.shutdown_future();
  for (;;) {
    if (shutdown.wait_for(std::chrono::milliseconds(interval_ms)) ==
        std::future_status::ready)
      return shutdown.get();
    std::promise<PullResult> prom;
    auto fut = prom.get_future();
    transport.post(boot.assigned_id(), [&] {
      client.client().pull_rows(all_rows(ready.vocab_size),
                                [&](PullResult r) { prom.set_value(std::move(r)); });
    });
    PullResult r = fut.get();
    if (!r.ok) {
      LOG_ERROR("poll failed: " << r.error);
      return 2;
    }
    const CountMatrix counts = counts_from_pull(r, ready.vocab_size, ready.num_topics);
    print_top_words(counts, top_n, out);
    out.flush();
  }
}

}  // namespace apslda
