#include "apslda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "apslda/error.hpp"
#include "apslda/rng.hpp"

namespace apslda {

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_ratio, uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ArgError("split ratio must be in (0,1)");
  const size_t n = corpus.docs.size();
  const size_t n_train = static_cast<size_t>(std::llround(train_ratio * static_cast<double>(n)));

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, Stream::kSplit));
  for (size_t i = n; i > 1; --i) {  // Fisher-Yates
    const uint32_t j = rng.bounded(static_cast<uint32_t>(i));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<uint32_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<uint32_t> test_idx(order.begin() + n_train, order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&](const std::vector<uint32_t>& idx) {
    Corpus out;
    out.vocab_size = corpus.vocab_size;
    out.docs.reserve(idx.size());
    for (uint32_t i : idx) {
      out.docs.push_back(corpus.docs[i]);
      out.total_tokens += corpus.docs[i].tokens.size();
    }
    return out;
  };
  return {take(train_idx), take(test_idx)};
}

TopicModelEstimate make_estimate(const CountMatrix& counts, const Hyperparams& hp) {
  if (counts.num_topics != hp.num_topics || counts.vocab_size != hp.vocab_size)
    throw ArgError("count matrix dimensions disagree with hyperparameters");
  const uint32_t v = counts.vocab_size;
  const uint32_t k_topics = counts.num_topics;
  const double vbeta = static_cast<double>(v) * hp.beta;

  TopicModelEstimate est;
  est.vocab_size = v;
  est.num_topics = k_topics;
  est.phi.resize(size_t(v) * k_topics);
  for (uint32_t w = 0; w < v; ++w)
    for (uint32_t k = 0; k < k_topics; ++k)
      est.phi[size_t(w) * k_topics + k] =
          (static_cast<double>(counts.wt(w, k)) + hp.beta) /
          (static_cast<double>(counts.topic_totals[k]) + vbeta);

  // Valid only over quiescent counts; catches torn or inconsistent pulls.
  for (uint32_t k = 0; k < k_topics; ++k) {
    double col = 0.0;
    for (uint32_t w = 0; w < v; ++w) col += est.at(w, k);
    if (std::abs(col - 1.0) > 1e-9)
      throw Error("phi column " + std::to_string(k) + " sums to " + std::to_string(col));
  }
  return est;
}

namespace {

double doc_log_likelihood(const TopicModelEstimate& model, const Document& doc,
                          const Hyperparams& hp, uint64_t seed, uint32_t passes,
                          uint32_t burnin) {
  const uint32_t k_topics = hp.num_topics;
  const size_t len = doc.tokens.size();
  Rng rng(seed);

  std::vector<uint32_t> z(len);
  std::vector<int64_t> ndk(k_topics, 0);
  for (size_t i = 0; i < len; ++i) {
    z[i] = rng.bounded(k_topics);
    ++ndk[z[i]];
  }

  std::vector<int64_t> acc(k_topics, 0);
  std::vector<double> cdf(k_topics);
  for (uint32_t pass = 0; pass < passes; ++pass) {
    for (size_t i = 0; i < len; ++i) {
      const uint32_t w = doc.tokens[i];
      --ndk[z[i]];
      double total = 0.0;
      for (uint32_t k = 0; k < k_topics; ++k) {
        total += (static_cast<double>(ndk[k]) + hp.alpha) * model.at(w, k);
        cdf[k] = total;
      }
      const double u = rng.uniform() * total;
      uint32_t k_new = 0;
      while (k_new + 1 < k_topics && cdf[k_new] < u) ++k_new;
      z[i] = k_new;
      ++ndk[k_new];
    }
    if (pass >= burnin)
      for (uint32_t k = 0; k < k_topics; ++k) acc[k] += ndk[k];
  }

  const double kept = static_cast<double>(passes - burnin);
  const double denom = static_cast<double>(len) + static_cast<double>(k_topics) * hp.alpha;
  std::vector<double> theta(k_topics);
  for (uint32_t k = 0; k < k_topics; ++k)
    theta[k] = (static_cast<double>(acc[k]) / kept + hp.alpha) / denom;

  double ll = 0.0;
  for (size_t i = 0; i < len; ++i) {
    double p = 0.0;
    for (uint32_t k = 0; k < k_topics; ++k) p += theta[k] * model.at(doc.tokens[i], k);
    ll += std::log(p);
  }
  return ll;
}

}  // namespace

double perplexity(const TopicModelEstimate& model, const std::vector<Document>& test_docs,
                  const Hyperparams& hp, uint64_t seed, uint32_t passes, uint32_t burnin) {
  if (test_docs.empty()) throw ArgError("empty test set");
  if (passes < 1 || burnin >= passes) throw ArgError("need passes >= 1 and burnin < passes");

  uint64_t total_tokens = 0;
  for (const Document& d : test_docs) total_tokens += d.tokens.size();
  if (total_tokens == 0) throw ArgError("test set has no tokens");

  // Per-document log likelihoods land in a vector and are reduced serially,
  // so the result is bitwise identical at any thread count.
  std::vector<double> ll(test_docs.size(), 0.0);
  const int64_t n_docs = static_cast<int64_t>(test_docs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t d = 0; d < n_docs; ++d) {
    const Document& doc = test_docs[static_cast<size_t>(d)];
    if (doc.tokens.empty()) continue;
    ll[static_cast<size_t>(d)] = doc_log_likelihood(
        model, doc, hp, derive_seed(seed, Stream::kFoldin, doc.doc_id), passes, burnin);
  }
  double total = 0.0;
  for (double v : ll) total += v;
  return std::exp(-total / static_cast<double>(total_tokens));
}

namespace {

struct CsvRow {
  uint32_t topic;
  int64_t count;
  uint32_t word;
};

std::vector<CsvRow> sorted_rows(const CountMatrix& counts) {
  std::vector<CsvRow> rows;
  for (uint32_t w = 0; w < counts.vocab_size; ++w)
    for (uint32_t k = 0; k < counts.num_topics; ++k)
      if (counts.wt(w, k) > 0) rows.push_back({k, counts.wt(w, k), w});
  std::sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
    if (a.topic != b.topic) return a.topic < b.topic;
    if (a.count != b.count) return a.count > b.count;
    return a.word < b.word;
  });
  return rows;
}

}  // namespace

std::string export_csv_string(const CountMatrix& counts, const Hyperparams& hp) {
  const double vbeta = static_cast<double>(hp.vocab_size) * hp.beta;
  std::string out = "word,topic,count,phi\n";
  char line[128];
  for (const CsvRow& r : sorted_rows(counts)) {
    const double phi = (static_cast<double>(r.count) + hp.beta) /
                       (static_cast<double>(counts.topic_totals[r.topic]) + vbeta);
    std::snprintf(line, sizeof(line), "%u,%u,%lld,%.17g\n", r.word, r.topic,
                  static_cast<long long>(r.count), phi);
    out += line;
  }
  return out;
}

void export_csv(const CountMatrix& counts, const Hyperparams& hp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgError("cannot open output file: " + path);
  out << export_csv_string(counts, hp);
  if (!out) throw Error("write failed: " + path);
}

CountMatrix load_model_csv(const std::string& path, uint32_t min_vocab, uint32_t min_topics) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgError("cannot open model file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError(path + ":1: empty model file");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != "word,topic,count,phi")
    throw ParseError(path + ":1: unexpected header '" + header + "'");

  std::vector<CellDelta> cells;
  uint32_t max_word = 0, max_topic = 0;
  bool any = false;
  std::string line;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    uint32_t w, k;
    long long count;
    if (std::sscanf(line.c_str(), "%u,%u,%lld", &w, &k, &count) != 3 || count < 0)
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad row '" + line + "'");
    cells.push_back({w, k, count});
    max_word = std::max(max_word, w);
    max_topic = std::max(max_topic, k);
    any = true;
  }

  CountMatrix m;
  m.vocab_size = std::max(min_vocab, any ? max_word + 1 : 0);
  m.num_topics = std::max(min_topics, any ? max_topic + 1 : 1);
  m.word_topic.assign(size_t(m.vocab_size) * m.num_topics, 0);
  m.topic_totals.assign(m.num_topics, 0);
  for (const CellDelta& c : cells) {
    m.wt(c.row, c.col) += c.inc;
    m.topic_totals[c.col] += c.inc;
  }
  return m;
}

std::vector<std::vector<std::pair<uint32_t, int64_t>>> top_words_from(const CountMatrix& counts,
                                                                      uint32_t n) {
  if (n < 1) throw ArgError("top-word count must be >= 1");
  std::vector<std::vector<std::pair<uint32_t, int64_t>>> out(counts.num_topics);
  std::vector<uint32_t> order(counts.vocab_size);
  for (uint32_t k = 0; k < counts.num_topics; ++k) {
    std::iota(order.begin(), order.end(), 0);
    const size_t take = std::min<size_t>(n, counts.vocab_size);
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](uint32_t a, uint32_t b) {
                        const int64_t ca = counts.wt(a, k), cb = counts.wt(b, k);
                        if (ca != cb) return ca > cb;
                        return a < b;
                      });
    out[k].reserve(take);
    for (size_t i = 0; i < take; ++i) out[k].push_back({order[i], counts.wt(order[i], k)});
  }
  return out;
}

void print_top_words(const CountMatrix& counts, uint32_t n, std::ostream& out) {
  const auto top = top_words_from(counts, n);
  for (uint32_t k = 0; k < top.size(); ++k) {
    out << "topic " << k << ":";
    for (const auto& [word, count] : top[k]) out << " " << word << "(" << count << ")";
    out << "\n";
  }
}

}  // namespace apslda
