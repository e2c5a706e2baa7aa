#include "apslda/reference.hpp"

#include <algorithm>
#include <map>

#include "apslda/alias_table.hpp"
#include "apslda/error.hpp"

namespace apslda {

CountMatrix recount(const std::vector<DocState>& docs, uint32_t vocab_size, uint32_t num_topics) {
  CountMatrix m;
  m.vocab_size = vocab_size;
  m.num_topics = num_topics;
  m.word_topic.assign(size_t(vocab_size) * num_topics, 0);
  m.topic_totals.assign(num_topics, 0);
  for (const DocState& doc : docs)
    for (size_t i = 0; i < doc.words.size(); ++i) {
      if (doc.words[i] >= vocab_size) throw ArgError("word id out of range");
      ++m.wt(doc.words[i], doc.topics[i]);
      ++m.topic_totals[doc.topics[i]];
    }
  return m;
}

CountMatrix recount_corpus(const Corpus& corpus, uint32_t num_topics) {
  CountMatrix m;
  m.vocab_size = corpus.vocab_size;
  m.num_topics = num_topics;
  m.word_topic.assign(size_t(corpus.vocab_size) * num_topics, 0);
  m.topic_totals.assign(num_topics, 0);
  for (const Document& doc : corpus.docs) {
    if (doc.assignments.size() != doc.tokens.size())
      throw ArgError("document assignments not initialized");
    for (size_t i = 0; i < doc.tokens.size(); ++i) {
      ++m.wt(doc.tokens[i], doc.assignments[i]);
      ++m.topic_totals[doc.assignments[i]];
    }
  }
  return m;
}

ReferenceResult reference_train(std::vector<DocState> docs, const Hyperparams& hp,
                                uint32_t iterations, uint32_t mh_steps, uint64_t sampler_seed) {
  if (mh_steps < 1) throw ArgError("mh steps must be >= 1");
  const uint32_t k_topics = hp.num_topics;

  CountMatrix counts = recount(docs, hp.vocab_size, k_topics);
  Rng rng(sampler_seed);

  // Token lists grouped by word, same order contract as the worker.
  std::map<uint32_t, std::vector<TokenRef>> grouped;
  for (uint32_t di = 0; di < docs.size(); ++di)
    for (uint32_t pos = 0; pos < docs[di].words.size(); ++pos)
      grouped[docs[di].words[pos]].push_back(TokenRef{di, pos});

  std::vector<double> proposal(k_topics);
  for (uint32_t iter = 0; iter < iterations; ++iter) {
    for (const auto& [word, refs] : grouped) {
      std::span<int64_t> row(counts.word_topic.data() + size_t(word) * k_topics, k_topics);
      for (uint32_t k = 0; k < k_topics; ++k)
        proposal[k] = static_cast<double>(std::max<int64_t>(row[k], 0)) + hp.beta;
      const AliasTable alias = AliasTable::build(proposal);
      WordDelta delta;
      resample_word_tokens(refs, docs, row, counts.topic_totals, proposal, alias, hp, rng,
                           mh_steps, delta);
    }
  }
  return ReferenceResult{std::move(counts), std::move(docs)};
}

}  // namespace apslda
