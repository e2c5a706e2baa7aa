#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apslda/alias_table.hpp"
#include "apslda/rng.hpp"
#include "apslda/types.hpp"

namespace apslda {

// Per-document sampling state owned by exactly one worker (or the serial
// reference). topic_counts is the dense n_dk vector, kept in lockstep with
// `topics`.
struct DocState {
  uint32_t doc_id = 0;
  std::vector<uint32_t> words;
  std::vector<uint32_t> topics;
  std::vector<int64_t> topic_counts;  // length K

  size_t length() const { return words.size(); }
};

// Builds a DocState with n_dk recounted from the assignments.
DocState make_doc_state(uint32_t doc_id, std::span<const uint32_t> words,
                        std::span<const uint32_t> topics, uint32_t num_topics);

// Exact collapsed conditional p(z = k) up to normalization, with the token's
// stored assignment removed from all three count views:
//   weight[k] = (n_dk[k] + alpha) * (n_wk[k] + beta) / (n_k[k] + V*beta).
// Counts are passed token-inclusive; the exclusion decrements old_topic.
// A negative post-exclusion count means the inputs were inconsistent.
std::vector<double> gibbs_conditional(std::span<const int64_t> doc_topic,
                                      std::span<const int64_t> word_row,
                                      std::span<const int64_t> topic_totals,
                                      const Hyperparams& hp, uint32_t old_topic);

// One token's Metropolis-Hastings resample: `steps` cycles of a word-proposal
// (drawn from `word_alias`, mass proposal_weights[k] = row-snapshot + beta)
// followed by a document-proposal (mass n_dk[k] + alpha, realized as a token
// position draw mixed with a uniform topic). Each proposal is accepted with
// min(1, p(s) q(cur) / (p(cur) q(s))) against the token-excluded conditional
// computed on the live views. Counts may be transiently stale; negative
// post-exclusion values are clamped to zero. Returns the final chain state.
uint32_t mh_resample(uint32_t old_topic, const DocState& doc,
                     std::span<const int64_t> word_row_live,
                     std::span<const int64_t> topic_totals_live,
                     std::span<const double> proposal_weights, const AliasTable& word_alias,
                     const Hyperparams& hp, Rng& rng, uint32_t steps);

// Location of one token inside a worker partition.
struct TokenRef {
  uint32_t doc_index = 0;  // into the partition's DocState vector
  uint32_t position = 0;
};

// Net count changes produced by resampling one word's tokens.
struct WordDelta {
  std::vector<int64_t> row;    // length K, net n_wk change for this word
  std::vector<int64_t> topic;  // length K, net n_k change
  bool any = false;
};

// Resamples every listed token of one word. Live views (word_row_live,
// topic_totals_live, the documents' n_dk and assignments) are updated in
// place so later tokens observe earlier moves; the alias table and
// proposal_weights stay frozen at the pulled snapshot. Appends the net
// changes to `out`.
void resample_word_tokens(std::span<const TokenRef> tokens, std::vector<DocState>& docs,
                          std::span<int64_t> word_row_live, std::span<int64_t> topic_totals_live,
                          std::span<const double> proposal_weights, const AliasTable& word_alias,
                          const Hyperparams& hp, Rng& rng, uint32_t steps, WordDelta& out);

}  // namespace apslda
