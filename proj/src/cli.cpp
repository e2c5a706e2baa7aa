#include "apslda/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "apslda/cluster.hpp"
#include "apslda/error.hpp"
#include "apslda/log.hpp"
#include "apslda/synthetic.hpp"
#include "apslda/trainer.hpp"

namespace apslda {

namespace {

struct CommonFlags {
  std::string dataset;
  uint32_t topics = 20;
  uint32_t iterations = 50;
  double alpha = 0.05;
  double beta = 0.01;
  uint32_t mh_steps = 2;
  uint32_t workers = 1;
  uint32_t shards = 1;
  uint64_t seed = 0;
  double split = 0.9;
  uint32_t eval_every = 1;
  std::string out_path;
  uint32_t vocab = 0;
  bool sim = false;
  double drop = 0.0;
  double dup = 0.0;
  uint32_t threads = 0;
  std::string role;
  std::string listen;
  std::string peers;
  uint32_t top_n = 10;
  double interval = 2.0;
  std::string model_path;
};

void add_trainer_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--dataset", f.dataset, "libsvm-style input file");
  cmd->add_option("--topics", f.topics, "number of topics K");
  cmd->add_option("--iterations", f.iterations, "training iterations");
  cmd->add_option("--alpha", f.alpha, "document-topic prior");
  cmd->add_option("--beta", f.beta, "topic-word prior");
  cmd->add_option("--mh-steps", f.mh_steps, "Metropolis-Hastings cycles per token");
  cmd->add_option("--workers", f.workers, "worker count");
  cmd->add_option("--shards", f.shards, "parameter server shard count");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--split", f.split, "train fraction (0 disables the held-out split)");
  cmd->add_option("--eval-every", f.eval_every, "iterations between perplexity reports");
  cmd->add_option("--out", f.out_path, "write the final model CSV here");
  cmd->add_option("--vocab", f.vocab, "declared vocabulary size (reserves rows)");
  cmd->add_flag("--sim", f.sim, "deterministic simulated transport (default mode)");
  cmd->add_option("--drop", f.drop, "simulated message drop probability");
  cmd->add_option("--dup", f.dup, "simulated message duplication probability");
  cmd->add_option("--threads", f.threads, "run all-in-one on real threads");
  cmd->add_option("--role", f.role, "multi-process role")
      ->check(CLI::IsMember({"server", "worker", "driver"}));
  cmd->add_option("--listen", f.listen, "listen address host:port");
  cmd->add_option("--peers", f.peers, "driver address host:port");
}

TrainerConfig trainer_config(const CommonFlags& f) {
  TrainerConfig cfg;
  cfg.topics = f.topics;
  cfg.alpha = f.alpha;
  cfg.beta = f.beta;
  cfg.iterations = f.iterations;
  cfg.mh_steps = f.mh_steps;
  cfg.workers = f.workers;
  cfg.shards = f.shards;
  cfg.seed = f.seed;
  cfg.eval_every = f.eval_every;
  cfg.top_n = f.top_n;
  return cfg;
}

bool split_requested(const CommonFlags& f) { return f.split > 0.0 && f.split < 1.0; }

void print_series(const TrainedModel& model, std::ostream& out) {
  char buf[64];
  for (const IterationStats& s : model.history) {
    if (!s.has_perplexity) continue;
    std::snprintf(buf, sizeof(buf), "iter=%u perplexity=%.6g", s.iteration, s.perplexity);
    out << buf << "\n";
  }
  if (model.has_final_perplexity) {
    std::snprintf(buf, sizeof(buf), "final_perplexity %.6g", model.final_perplexity);
    out << buf << "\n";
  }
}

int cmd_train(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  if (!f.role.empty()) {
    ProcessConfig pc;
    pc.trainer = trainer_config(f);
    pc.listen_addr = f.listen.empty() ? "127.0.0.1:0" : f.listen;
    pc.driver_addr = f.peers;
    pc.dataset = f.dataset;
    pc.declared_vocab = f.vocab;
    pc.split_ratio = split_requested(f) ? f.split : 0.0;
    pc.out_csv = f.out_path;
    if (f.dataset.empty()) throw ArgError("--dataset is required");
    if (f.role == "driver") {
      if (f.listen.empty()) throw ArgError("driver needs --listen");
      return run_driver_process(pc, out, err);
    }
    if (f.peers.empty()) throw ArgError(f.role + " needs --peers <driver-address>");
    return f.role == "server" ? run_server_process(pc) : run_worker_process(pc);
  }

  if (f.dataset.empty()) throw ArgError("--dataset is required");
  const TrainerConfig cfg = trainer_config(f);
  cfg.validate();
  Corpus corpus = load_libsvm(f.dataset, f.vocab);

  Corpus train = std::move(corpus);
  Corpus test;
  if (split_requested(f) && train.docs.size() >= 2) {
    Corpus full = std::move(train);
    std::tie(train, test) = split_corpus(full, f.split, f.seed);
  }

  TrainedModel model;
  if (f.threads > 0) {
    model = train_threaded(cfg, std::move(train), test.docs.empty() ? nullptr : &test, &err);
  } else {
    set_log_timestamps(false);  // simulated mode output is reproducible
    FaultPlan plan;
    plan.drop_prob = f.drop;
    plan.dup_prob = f.dup;
    plan.delay_min_ms = 1;
    plan.delay_max_ms = 20;
    model = train_in_simulator(cfg, std::move(train), test.docs.empty() ? nullptr : &test, plan,
                               &err);
  }

  print_series(model, out);
  if (!f.out_path.empty()) export_csv(model.counts, model.hp, f.out_path);
  return 0;
}

int cmd_eval(const CommonFlags& f, std::ostream& out, std::ostream&) {
  if (f.model_path.empty()) throw ArgError("--model is required");
  if (f.dataset.empty()) throw ArgError("--dataset is required");

  Corpus corpus = load_libsvm(f.dataset, f.vocab);
  Corpus test;
  if (split_requested(f) && corpus.docs.size() >= 2) {
    auto [train, t] = split_corpus(corpus, f.split, f.seed);
    test = std::move(t);
  } else {
    test = std::move(corpus);
  }
  if (test.docs.empty()) throw ArgError("test set is empty");

  CountMatrix counts = load_model_csv(f.model_path, std::max(test.vocab_size, f.vocab), f.topics);
  Hyperparams hp;
  hp.num_topics = counts.num_topics;
  hp.alpha = f.alpha;
  hp.beta = f.beta;
  hp.vocab_size = counts.vocab_size;

  const double pp = perplexity(make_estimate(counts, hp), test.docs, hp, f.seed);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", pp);
  out << buf << "\n";
  return 0;
}

int cmd_topwords(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  if (f.top_n < 1) throw ArgError("--n must be >= 1");
  const uint64_t interval_ms = static_cast<uint64_t>(f.interval * 1000.0);

  if (!f.peers.empty()) {
    const std::string listen = f.listen.empty() ? "127.0.0.1:0" : f.listen;
    return run_topwords_observer(f.peers, listen, f.top_n, interval_ms, out);
  }

  // All-in-one: train on background threads, poll the live model.
  if (f.dataset.empty()) throw ArgError("--dataset is required (or --peers for a remote run)");
  const TrainerConfig cfg = trainer_config(f);
  cfg.validate();
  Corpus corpus = load_libsvm(f.dataset, f.vocab);

  ThreadedCluster cluster(cfg, std::move(corpus));
  std::exception_ptr train_error;
  std::thread runner([&] {
    try {
      cluster.train(nullptr, &err);
    } catch (...) {
      train_error = std::current_exception();
    }
  });
  while (!cluster.finished()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(interval_ms));
    if (cluster.finished()) break;
    print_top_words(cluster.pull_model(), f.top_n, out);
    out << "\n";
  }
  runner.join();
  if (train_error) std::rethrow_exception(train_error);
  print_top_words(cluster.pull_model(), f.top_n, out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"asynchronous parameter-server LDA trainer"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, top_flags;
  CLI::App* train = app.add_subcommand("train", "train a topic model");
  add_trainer_flags(train, train_flags);

  CLI::App* eval = app.add_subcommand("eval", "held-out perplexity of an exported model");
  eval->add_option("--model", eval_flags.model_path, "model CSV from train --out");
  eval->add_option("--dataset", eval_flags.dataset, "full dataset (the split is recomputed)");
  eval->add_option("--topics", eval_flags.topics, "number of topics K");
  eval->add_option("--alpha", eval_flags.alpha, "document-topic prior");
  eval->add_option("--beta", eval_flags.beta, "topic-word prior");
  eval->add_option("--seed", eval_flags.seed, "run seed used at train time");
  eval->add_option("--split", eval_flags.split, "train fraction used at train time");
  eval->add_option("--vocab", eval_flags.vocab, "declared vocabulary size");

  CLI::App* top = app.add_subcommand("top-words", "watch the top words per topic");
  add_trainer_flags(top, top_flags);
  top->add_option("--n", top_flags.top_n, "words per topic");
  top->add_option("--interval", top_flags.interval, "seconds between refreshes");

  std::vector<std::string> args(argv.rbegin(), argv.rend());  // CLI11 wants reversed
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    err << app.help();
    return 1;
  }

  try {
    if (app.got_subcommand(train)) return cmd_train(train_flags, out, err);
    if (app.got_subcommand(eval)) return cmd_eval(eval_flags, out, err);
    return cmd_topwords(top_flags, out, err);
  } catch (const ArgError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace apslda
