#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "apslda/corpus.hpp"
#include "apslda/reference.hpp"
#include "apslda/types.hpp"

namespace apslda {

// Seeded document-level split; train gets round(ratio * D) documents. Both
// sides keep their original doc ids (per-document fold-in seeds depend on
// them) and their original relative order.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_ratio, uint64_t seed);

// Point estimate of the topic-word distributions:
//   phi[w][k] = (n_wk + beta) / (n_k + V * beta).
// Requires quiescent counts (each column sums to one within 1e-9).
struct TopicModelEstimate {
  uint32_t vocab_size = 0;
  uint32_t num_topics = 0;
  std::vector<double> phi;  // V x K, row-major by word

  double at(uint32_t w, uint32_t k) const { return phi[size_t(w) * num_topics + k]; }
};

TopicModelEstimate make_estimate(const CountMatrix& counts, const Hyperparams& hp);

inline constexpr uint32_t kFoldinPasses = 20;
inline constexpr uint32_t kFoldinBurnin = 10;

// Held-out perplexity by fold-in: phi fixed, each test document's assignments
// are Gibbs-resampled with p(z=k) proportional to (n_dk + alpha) * phi_wk for
// `passes` sweeps; theta_hat averages the post-burn-in counts. Returns
// exp(-mean per-token log likelihood). Per-document seeds derive from
// (seed, doc_id), so the result is independent of document order and safe to
// compute in parallel.
double perplexity(const TopicModelEstimate& model, const std::vector<Document>& test_docs,
                  const Hyperparams& hp, uint64_t seed, uint32_t passes = kFoldinPasses,
                  uint32_t burnin = kFoldinBurnin);

// Writes `word,topic,count,phi` rows for every n_wk > 0 cell, sorted by
// (topic, count descending, word). Deterministic bytes, LF endings.
void export_csv(const CountMatrix& counts, const Hyperparams& hp, const std::string& path);
std::string export_csv_string(const CountMatrix& counts, const Hyperparams& hp);

// Reads the export format back into a dense count matrix. Dimensions grow to
// at least (min_vocab, min_topics).
CountMatrix load_model_csv(const std::string& path, uint32_t min_vocab, uint32_t min_topics);

// The n highest-count words per topic, ties broken by ascending word id.
std::vector<std::vector<std::pair<uint32_t, int64_t>>> top_words_from(const CountMatrix& counts,
                                                                      uint32_t n);

// One line per topic: `topic k: w1(c1) w2(c2) ...`.
void print_top_words(const CountMatrix& counts, uint32_t n, std::ostream& out);

}  // namespace apslda
