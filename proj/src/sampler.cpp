#include "apslda/sampler.hpp"

#include <cmath>

#include "apslda/error.hpp"

namespace apslda {

DocState make_doc_state(uint32_t doc_id, std::span<const uint32_t> words,
                        std::span<const uint32_t> topics, uint32_t num_topics) {
  if (words.size() != topics.size()) throw ArgError("words/topics length mismatch");
  DocState d;
  d.doc_id = doc_id;
  d.words.assign(words.begin(), words.end());
  d.topics.assign(topics.begin(), topics.end());
  d.topic_counts.assign(num_topics, 0);
  for (uint32_t z : topics) {
    if (z >= num_topics) throw ArgError("topic id out of range");
    ++d.topic_counts[z];
  }
  return d;
}

std::vector<double> gibbs_conditional(std::span<const int64_t> doc_topic,
                                      std::span<const int64_t> word_row,
                                      std::span<const int64_t> topic_totals,
                                      const Hyperparams& hp, uint32_t old_topic) {
  const uint32_t k_topics = hp.num_topics;
  if (doc_topic.size() != k_topics || word_row.size() != k_topics ||
      topic_totals.size() != k_topics)
    throw ArgError("count vector length != K");
  if (old_topic >= k_topics) throw ArgError("old topic out of range");

  const double vbeta = static_cast<double>(hp.vocab_size) * hp.beta;
  std::vector<double> weights(k_topics);
  for (uint32_t k = 0; k < k_topics; ++k) {
    const int64_t e = (k == old_topic) ? 1 : 0;
    const int64_t nd = doc_topic[k] - e;
    const int64_t nw = word_row[k] - e;
    const int64_t nk = topic_totals[k] - e;
    if (nd < 0 || nw < 0 || nk < 0)
      throw Error("negative count after token exclusion: inconsistent state");
    weights[k] = (static_cast<double>(nd) + hp.alpha) * (static_cast<double>(nw) + hp.beta) /
                 (static_cast<double>(nk) + vbeta);
  }
  return weights;
}

namespace {

// Token-excluded conditional weight on possibly-stale live views; stale
// exclusion can go negative, clamp at zero.
inline double excluded_weight(uint32_t k, uint32_t old_topic, std::span<const int64_t> doc_topic,
                              std::span<const int64_t> row, std::span<const int64_t> totals,
                              double alpha, double beta, double vbeta) {
  const int64_t e = (k == old_topic) ? 1 : 0;
  const double nd = static_cast<double>(std::max<int64_t>(doc_topic[k] - e, 0));
  const double nw = static_cast<double>(std::max<int64_t>(row[k] - e, 0));
  const double nk = static_cast<double>(std::max<int64_t>(totals[k] - e, 0));
  return (nd + alpha) * (nw + beta) / (nk + vbeta);
}

}  // namespace

uint32_t mh_resample(uint32_t old_topic, const DocState& doc,
                     std::span<const int64_t> word_row_live,
                     std::span<const int64_t> topic_totals_live,
                     std::span<const double> proposal_weights, const AliasTable& word_alias,
                     const Hyperparams& hp, Rng& rng, uint32_t steps) {
  const uint32_t k_topics = hp.num_topics;
  const double alpha = hp.alpha;
  const double beta = hp.beta;
  const double vbeta = static_cast<double>(hp.vocab_size) * beta;
  const double doc_len = static_cast<double>(doc.length());

  auto phat = [&](uint32_t k) {
    return excluded_weight(k, old_topic, doc.topic_counts, word_row_live, topic_totals_live,
                           alpha, beta, vbeta);
  };

  uint32_t cur = old_topic;
  for (uint32_t step = 0; step < steps; ++step) {
    // Word proposal, q(k) = snapshot row + beta.
    {
      const uint32_t cand = word_alias.sample(rng);
      const double num = phat(cand) * proposal_weights[cur];
      const double den = phat(cur) * proposal_weights[cand];
      const double u = rng.uniform();
      if (den > 0.0 && std::isfinite(num / den)) {
        if (u * den < num) cur = cand;
      }
    }
    // Document proposal, q(k) = n_dk + alpha: draw a token position with
    // probability L/(L + K*alpha), else a uniform topic.
    {
      uint32_t cand;
      const double mix = rng.uniform() * (doc_len + static_cast<double>(k_topics) * alpha);
      if (mix < doc_len)
        cand = doc.topics[rng.bounded(static_cast<uint32_t>(doc.length()))];
      else
        cand = rng.bounded(k_topics);
      const double q_cand = static_cast<double>(doc.topic_counts[cand]) + alpha;
      const double q_cur = static_cast<double>(doc.topic_counts[cur]) + alpha;
      const double num = phat(cand) * q_cur;
      const double den = phat(cur) * q_cand;
      const double u = rng.uniform();
      if (den > 0.0 && std::isfinite(num / den)) {
        if (u * den < num) cur = cand;
      }
    }
  }
  return cur;
}

void resample_word_tokens(std::span<const TokenRef> tokens, std::vector<DocState>& docs,
                          std::span<int64_t> word_row_live, std::span<int64_t> topic_totals_live,
                          std::span<const double> proposal_weights, const AliasTable& word_alias,
                          const Hyperparams& hp, Rng& rng, uint32_t steps, WordDelta& out) {
  if (out.row.size() != hp.num_topics) out.row.assign(hp.num_topics, 0);
  if (out.topic.size() != hp.num_topics) out.topic.assign(hp.num_topics, 0);

  for (const TokenRef& ref : tokens) {
    DocState& doc = docs[ref.doc_index];
    const uint32_t z_old = doc.topics[ref.position];
    const uint32_t z_new = mh_resample(z_old, doc, word_row_live, topic_totals_live,
                                       proposal_weights, word_alias, hp, rng, steps);
    if (z_new == z_old) continue;

    doc.topics[ref.position] = z_new;
    --doc.topic_counts[z_old];
    ++doc.topic_counts[z_new];
    --word_row_live[z_old];
    ++word_row_live[z_new];
    --topic_totals_live[z_old];
    ++topic_totals_live[z_new];
    --out.row[z_old];
    ++out.row[z_new];
    --out.topic[z_old];
    ++out.topic[z_new];
    out.any = true;
  }
}

}  // namespace apslda
