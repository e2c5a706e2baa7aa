#include "apslda/worker.hpp"

#include <algorithm>
#include <map>

#include "apslda/error.hpp"
#include "apslda/log.hpp"

namespace apslda {

std::vector<DocState> build_doc_states(const Corpus& corpus, const Partition& part,
                                       uint32_t num_topics) {
  std::vector<DocState> out;
  out.reserve(part.doc_ids.size());
  for (uint32_t doc_id : part.doc_ids) {
    const Document& d = corpus.docs.at(doc_id);
    if (d.assignments.size() != d.tokens.size())
      throw ArgError("document assignments not initialized");
    out.push_back(make_doc_state(d.doc_id, d.tokens, d.assignments, num_topics));
  }
  return out;
}

WorkerNode::WorkerNode(Transport* transport, NodeId id, PsTopology topo, BackoffPolicy backoff,
                       Hyperparams hp, std::vector<DocState> docs, uint32_t mh_steps,
                       uint64_t sampler_seed, uint32_t pull_window, uint32_t inflight_cap)
    : transport_(transport),
      id_(id),
      hp_(hp),
      docs_(std::move(docs)),
      mh_steps_(mh_steps),
      rng_(sampler_seed),
      pull_window_(pull_window == 0 ? 1 : pull_window),
      client_(transport, id, id, std::move(topo), backoff, inflight_cap) {
  if (mh_steps_ < 1) throw ArgError("mh steps must be >= 1");

  std::map<uint32_t, std::vector<TokenRef>> grouped;
  for (uint32_t di = 0; di < docs_.size(); ++di) {
    const DocState& doc = docs_[di];
    for (uint32_t pos = 0; pos < doc.words.size(); ++pos)
      grouped[doc.words[pos]].push_back(TokenRef{di, pos});
  }
  words_.reserve(grouped.size());
  tokens_by_word_.reserve(grouped.size());
  for (auto& [word, refs] : grouped) {
    words_.push_back(word);
    tokens_by_word_.push_back(std::move(refs));
  }
}

void WorkerNode::push_initial_counts(std::function<void(bool)> cb) {
  std::map<std::pair<uint32_t, uint32_t>, int64_t> cells;
  std::vector<int64_t> topic(hp_.num_topics, 0);
  for (const DocState& doc : docs_)
    for (size_t i = 0; i < doc.words.size(); ++i) {
      ++cells[{doc.words[i], doc.topics[i]}];
      ++topic[doc.topics[i]];
    }
  std::vector<CellDelta> deltas;
  deltas.reserve(cells.size() + hp_.num_topics);
  for (const auto& [cell, count] : cells) deltas.push_back({cell.first, cell.second, count});
  for (uint32_t k = 0; k < hp_.num_topics; ++k)
    if (topic[k] != 0) deltas.push_back({kTopicCountsRow, k, topic[k]});
  client_.push(std::move(deltas), [this, cb = std::move(cb)](PushResult r) {
    if (!r.ok) fail("initial count push failed: " + r.error);
    if (cb) cb(r.ok);
  });
}

void WorkerNode::begin_iteration(std::function<void(const IterationOutcome&)> on_done) {
  if (phase_ != Phase::kIdle && phase_ != Phase::kDone)
    throw Error("iteration already in progress");
  on_done_ = std::move(on_done);
  failed_ = false;
  failure_.clear();
  next_issue_ = next_process_ = 0;
  outstanding_pulls_ = 0;
  arrived_.clear();
  iter_push_base_ = client_.pushes_completed();
  phase_ = Phase::kPullingTotals;

  client_.pull_rows({kTopicCountsRow}, [this](PullResult r) {
    if (!r.ok) {
      fail("topic totals pull failed: " + r.error);
      return;
    }
    totals_live_ = std::move(r.values);
    phase_ = Phase::kRunning;
    issue_pulls();
    check_done();  // empty partition finishes immediately
  });
}

void WorkerNode::fail(const std::string& why) {
  if (failed_) return;
  failed_ = true;
  failure_ = why;
  LOG_ERROR("worker " << id_ << ": " << why);
  phase_ = Phase::kDone;
  if (on_done_) {
    IterationOutcome out;
    out.ok = false;
    out.error = why;
    auto cb = std::move(on_done_);
    on_done_ = {};
    cb(out);
  }
}

void WorkerNode::issue_pulls() {
  if (phase_ != Phase::kRunning || failed_) return;
  while (next_issue_ < words_.size() && outstanding_pulls_ < pull_window_) {
    const uint32_t word = words_[next_issue_++];
    ++outstanding_pulls_;
    client_.pull_rows({word}, [this, word](PullResult r) {
      --outstanding_pulls_;
      if (!r.ok) {
        fail("row pull failed: " + r.error);
        return;
      }
      arrived_.emplace(word, std::move(r.values));
      try_process();
      issue_pulls();
      check_done();
    });
  }
}

void WorkerNode::try_process() {
  if (phase_ != Phase::kRunning || failed_) return;
  // In-order processing over the pipelined window: rows are consumed in
  // ascending word order, and pushes apply backpressure here.
  while (next_process_ < words_.size()) {
    auto it = arrived_.find(words_[next_process_]);
    if (it == arrived_.end()) return;
    if (!client_.can_push()) return;
    std::vector<int64_t> row = std::move(it->second);
    arrived_.erase(it);
    process_word(words_[next_process_], std::move(row));
    ++next_process_;
  }
}

void WorkerNode::process_word(uint32_t word, std::vector<int64_t> row) {
  const size_t word_index = next_process_;
  std::vector<double> proposal(hp_.num_topics);
  for (uint32_t k = 0; k < hp_.num_topics; ++k)
    proposal[k] = static_cast<double>(std::max<int64_t>(row[k], 0)) + hp_.beta;
  const AliasTable alias = AliasTable::build(proposal);

  WordDelta delta;
  resample_word_tokens(tokens_by_word_[word_index], docs_, row, totals_live_, proposal, alias,
                       hp_, rng_, mh_steps_, delta);
  if (!delta.any) return;

  std::vector<CellDelta> cells;
  for (uint32_t k = 0; k < hp_.num_topics; ++k) {
    if (delta.row[k] != 0) cells.push_back({word, k, delta.row[k]});
    if (delta.topic[k] != 0) cells.push_back({kTopicCountsRow, k, delta.topic[k]});
  }
  client_.push(std::move(cells), [this](PushResult r) {
    if (!r.ok) {
      fail("delta push failed: " + r.error);
      return;
    }
    try_process();
    check_done();
  });
}

void WorkerNode::check_done() {
  if (phase_ != Phase::kRunning || failed_) return;
  if (next_process_ < words_.size() || !client_.idle()) return;
  phase_ = Phase::kDone;
  if (on_done_) {
    IterationOutcome out;
    out.ok = true;
    out.pushes = client_.pushes_completed() - iter_push_base_;
    auto cb = std::move(on_done_);
    on_done_ = {};
    cb(out);
  }
}

void WorkerNode::on_message(NodeId src, const Message& m) {
  if (client_.handle_message(src, m)) return;
  if (control_handler_) control_handler_(src, m);
}

void WorkerNode::on_timer(uint64_t token) { client_.handle_timer(token); }

}  // namespace apslda
