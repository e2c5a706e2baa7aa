#pragma once

#include <cstdint>
#include <vector>

#include "apslda/corpus.hpp"
#include "apslda/sampler.hpp"
#include "apslda/types.hpp"

namespace apslda {

// Dense global count state (V x K word-topic matrix plus length-K totals).
struct CountMatrix {
  uint32_t vocab_size = 0;
  uint32_t num_topics = 0;
  std::vector<int64_t> word_topic;   // V * K, row-major
  std::vector<int64_t> topic_totals; // K

  int64_t& wt(uint32_t w, uint32_t k) { return word_topic[size_t(w) * num_topics + k]; }
  int64_t wt(uint32_t w, uint32_t k) const { return word_topic[size_t(w) * num_topics + k]; }
};

// Recounts the exact statistics implied by the documents' assignments.
CountMatrix recount(const std::vector<DocState>& docs, uint32_t vocab_size, uint32_t num_topics);
CountMatrix recount_corpus(const Corpus& corpus, uint32_t num_topics);

struct ReferenceResult {
  CountMatrix counts;
  std::vector<DocState> docs;  // final assignments
};

// Serial in-memory execution of the training loop against perfect (never
// stale) counts: per iteration, words ascending; per word, snapshot the row,
// build the alias table, resample that word's tokens, apply changes
// directly. Consumes the sampler stream exactly like a single worker over
// the same documents, which makes it the equivalence oracle for the
// distributed path as well as the serial baseline for benchmarks.
ReferenceResult reference_train(std::vector<DocState> docs, const Hyperparams& hp,
                                uint32_t iterations, uint32_t mh_steps, uint64_t sampler_seed);

}  // namespace apslda
