#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apslda/types.hpp"

namespace apslda {

// One bag-of-words document. `assignments` is empty until init_assignments
// runs; afterwards it is index-aligned with `tokens`.
struct Document {
  uint32_t doc_id = 0;
  std::vector<uint32_t> tokens;       // word ids, 0-based
  std::vector<uint32_t> assignments;  // topic ids, 0-based
};

struct Corpus {
  uint32_t vocab_size = 0;  // V
  std::vector<Document> docs;
  uint64_t total_tokens = 0;
};

struct Partition {
  uint32_t worker_id = 0;
  std::vector<uint32_t> doc_ids;
};

// The +1 increments to n_wk and n_k implied by freshly drawn assignments,
// aggregated per cell and sorted by (word, topic).
struct InitialDeltas {
  std::vector<CellDelta> word_topic;
  std::vector<int64_t> topic;  // length K
};

// Loads `label idx:count ...` lines (libsvm convention, 1-based indices).
// Each idx:count pair expands to `count` occurrences of word idx-1; labels
// are parsed and discarded. declared_vocab reserves at least that many rows.
Corpus load_libsvm(const std::string& path, uint32_t declared_vocab = 0);

// Same parser over an in-memory buffer; `origin` names the source in errors.
Corpus parse_libsvm(const std::string& text, uint32_t declared_vocab = 0,
                    const std::string& origin = "<memory>");

// Contiguous blocks of documents, sizes differing by at most one.
std::vector<Partition> partition(const Corpus& corpus, uint32_t workers);

// Draws every token's topic uniformly from {0..K-1} with the seeded stream
// and returns the implied count increments.
InitialDeltas init_assignments(Corpus& corpus, uint32_t num_topics, uint64_t seed);

}  // namespace apslda
