#pragma once

#include <map>
#include <string>
#include <vector>

#include "apslda/corpus.hpp"
#include "apslda/reference.hpp"
#include "apslda/sampler.hpp"
#include "apslda/trainer.hpp"

namespace apslda::testing {

// Word frequencies of a corpus; assignment-independent.
inline std::vector<int64_t> word_frequencies(const Corpus& corpus) {
  std::vector<int64_t> freq(corpus.vocab_size, 0);
  for (const Document& d : corpus.docs)
    for (uint32_t w : d.tokens) ++freq[w];
  return freq;
}

// Server-side counts summed over all shards of a SimCluster.
inline CountMatrix server_counts(SimCluster& cluster) {
  CountMatrix m;
  m.vocab_size = cluster.hyperparams().vocab_size;
  m.num_topics = cluster.hyperparams().num_topics;
  m.word_topic.assign(size_t(m.vocab_size) * m.num_topics, 0);
  m.topic_totals.assign(m.num_topics, 0);
  for (uint32_t s = 0; s < cluster.num_shards(); ++s) {
    const ShardState& st = cluster.shard_state(s);
    for (uint32_t w = 0; w < m.vocab_size; ++w) {
      if (!st.owns_row(w)) continue;
      const std::vector<int64_t> row = st.row_copy(w);
      for (uint32_t k = 0; k < m.num_topics; ++k) m.wt(w, k) += row[k];
    }
    if (st.owns_row(kTopicCountsRow)) {
      const std::vector<int64_t> row = st.row_copy(kTopicCountsRow);
      for (uint32_t k = 0; k < m.num_topics; ++k) m.topic_totals[k] += row[k];
    }
  }
  return m;
}

// Exact equality of two count matrices.
inline bool counts_equal(const CountMatrix& a, const CountMatrix& b) {
  return a.vocab_size == b.vocab_size && a.num_topics == b.num_topics &&
         a.word_topic == b.word_topic && a.topic_totals == b.topic_totals;
}

// Collapsed conditional re-derived from first principles over explicit
// counts; independent of the library implementation.
inline std::vector<double> conditional_by_formula(const std::vector<int64_t>& nd,
                                                  const std::vector<int64_t>& nw,
                                                  const std::vector<int64_t>& nk, double alpha,
                                                  double beta, uint32_t vocab) {
  std::vector<double> w(nd.size());
  for (size_t k = 0; k < nd.size(); ++k)
    w[k] = (static_cast<double>(nd[k]) + alpha) * (static_cast<double>(nw[k]) + beta) /
           (static_cast<double>(nk[k]) + static_cast<double>(vocab) * beta);
  return w;
}

inline std::vector<double> normalized(std::vector<double> w) {
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return tv / 2.0;
}

}  // namespace apslda::testing
