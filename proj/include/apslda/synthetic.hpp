#pragma once

#include <cstdint>
#include <vector>

#include "apslda/corpus.hpp"

namespace apslda {

// Planted-topic generator: the vocabulary splits into `topics` equal disjoint
// slices; each document picks one planted topic and draws all tokens
// uniformly from that slice. Used for convergence tests and benchmarks.
struct SyntheticSpec {
  uint32_t vocab_size = 1000;
  uint32_t docs = 5000;
  uint32_t topics = 10;
  uint32_t min_doc_len = 40;
  uint32_t max_doc_len = 60;
  uint64_t seed = 0;
};

Corpus make_planted_corpus(const SyntheticSpec& spec);

// Vocabulary slice [begin, end) owned by one planted topic.
std::pair<uint32_t, uint32_t> planted_slice(const SyntheticSpec& spec, uint32_t topic);

// Planted topic owning a word.
uint32_t planted_topic_of(const SyntheticSpec& spec, uint32_t word);

}  // namespace apslda
