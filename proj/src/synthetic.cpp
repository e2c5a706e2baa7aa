#include "apslda/synthetic.hpp"

#include "apslda/error.hpp"
#include "apslda/rng.hpp"

namespace apslda {

std::pair<uint32_t, uint32_t> planted_slice(const SyntheticSpec& spec, uint32_t topic) {
  if (topic >= spec.topics) throw ArgError("planted topic out of range");
  const uint32_t width = spec.vocab_size / spec.topics;
  const uint32_t begin = topic * width;
  const uint32_t end = (topic + 1 == spec.topics) ? spec.vocab_size : begin + width;
  return {begin, end};
}

uint32_t planted_topic_of(const SyntheticSpec& spec, uint32_t word) {
  if (word >= spec.vocab_size) throw ArgError("word out of range");
  const uint32_t width = spec.vocab_size / spec.topics;
  return std::min(word / width, spec.topics - 1);
}

Corpus make_planted_corpus(const SyntheticSpec& spec) {
  if (spec.topics < 1 || spec.vocab_size < spec.topics)
    throw ArgError("need vocab_size >= topics >= 1");
  if (spec.min_doc_len < 1 || spec.max_doc_len < spec.min_doc_len)
    throw ArgError("bad document length range");

  Rng rng(derive_seed(spec.seed, Stream::kSynthetic));
  Corpus corpus;
  corpus.vocab_size = spec.vocab_size;
  corpus.docs.reserve(spec.docs);
  for (uint32_t d = 0; d < spec.docs; ++d) {
    const uint32_t topic = rng.bounded(spec.topics);
    const auto [begin, end] = planted_slice(spec, topic);
    const uint32_t len =
        spec.min_doc_len + rng.bounded(spec.max_doc_len - spec.min_doc_len + 1);
    Document doc;
    doc.doc_id = d;
    doc.tokens.reserve(len);
    for (uint32_t i = 0; i < len; ++i) doc.tokens.push_back(begin + rng.bounded(end - begin));
    corpus.total_tokens += len;
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace apslda
