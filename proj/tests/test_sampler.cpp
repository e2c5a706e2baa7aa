#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "apslda/error.hpp"
#include "apslda/sampler.hpp"
#include "support/test_support.hpp"

using namespace apslda;
using namespace apslda::testing;

namespace {

Hyperparams hp_of(uint32_t k, double alpha, double beta, uint32_t v) {
  Hyperparams hp;
  hp.num_topics = k;
  hp.alpha = alpha;
  hp.beta = beta;
  hp.vocab_size = v;
  return hp;
}

// A consistent random tiny state: document, word row and totals that could
// have arisen from a real corpus, plus a token of that word in the document.
struct TinyState {
  Hyperparams hp;
  DocState doc;
  uint32_t position = 0;
  uint32_t z_old = 0;
  std::vector<int64_t> row;     // includes the token
  std::vector<int64_t> totals;  // includes the token
};

TinyState random_state(Rng& rng, uint32_t max_k = 8, int64_t max_count = 20) {
  TinyState st;
  const uint32_t k = 2 + rng.bounded(max_k - 1);
  st.hp = hp_of(k, 0.05 + rng.uniform() * 0.95, 0.01 + rng.uniform() * 0.99,
                k + rng.bounded(40));

  const uint32_t len = 1 + rng.bounded(static_cast<uint32_t>(max_count));
  st.doc.topic_counts.assign(k, 0);
  for (uint32_t i = 0; i < len; ++i) {
    const uint32_t z = rng.bounded(k);
    st.doc.words.push_back(0);
    st.doc.topics.push_back(z);
    ++st.doc.topic_counts[z];
  }
  st.position = rng.bounded(len);
  st.z_old = st.doc.topics[st.position];

  st.row.resize(k);
  st.totals.resize(k);
  for (uint32_t i = 0; i < k; ++i) {
    st.row[i] = rng.bounded(static_cast<uint32_t>(max_count));
    st.totals[i] = st.row[i] + rng.bounded(static_cast<uint32_t>(max_count));
  }
  if (st.row[st.z_old] < 1) st.row[st.z_old] = 1;
  if (st.totals[st.z_old] < st.row[st.z_old]) st.totals[st.z_old] = st.row[st.z_old];
  return st;
}

// Empirical distribution of mh_resample over fresh chains.
std::vector<double> mh_empirical(const TinyState& st, uint32_t steps, uint32_t chains,
                                 uint64_t seed) {
  std::vector<double> proposal(st.hp.num_topics);
  for (uint32_t i = 0; i < st.hp.num_topics; ++i)
    proposal[i] = static_cast<double>(st.row[i]) + st.hp.beta;
  const AliasTable alias = AliasTable::build(proposal);

  Rng rng(seed);
  std::vector<double> freq(st.hp.num_topics, 0.0);
  for (uint32_t c = 0; c < chains; ++c) {
    const uint32_t z =
        mh_resample(st.z_old, st.doc, st.row, st.totals, proposal, alias, st.hp, rng, steps);
    freq[z] += 1.0;
  }
  for (double& f : freq) f /= chains;
  return freq;
}

std::vector<double> exact_conditional(const TinyState& st) {
  return normalized(
      gibbs_conditional(st.doc.topic_counts, st.row, st.totals, st.hp, st.z_old));
}

}  // namespace

TEST_CASE("collapsed conditional matches the hand-derived example") {
  // alpha=1, beta=1, V=2, K=2; token-inclusive counts chosen so the
  // post-exclusion state is n_dk=[1,0], n_wk=[2,0], n_k=[3,1].
  const Hyperparams hp = hp_of(2, 1.0, 1.0, 2);
  const std::vector<int64_t> nd = {2, 0}, nw = {3, 0}, nk = {4, 1};
  const auto w = gibbs_conditional(nd, nw, nk, hp, 0);
  CHECK(w[0] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const auto p = normalized(w);
  CHECK(p[0] == doctest::Approx(0.7826086956521738).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.21739130434782608).epsilon(1e-12));
}

TEST_CASE("all-zero post-exclusion state is uniform") {
  const Hyperparams hp = hp_of(3, 0.4, 0.2, 5);
  const std::vector<int64_t> nd = {1, 0, 0}, nw = {1, 0, 0}, nk = {1, 0, 0};
  const auto w = gibbs_conditional(nd, nw, nk, hp, 0);
  const double expect = hp.alpha * hp.beta / (5 * hp.beta);
  for (double x : w) CHECK(x == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("K=1 conditional is a singleton") {
  const Hyperparams hp = hp_of(1, 0.3, 0.2, 4);
  const std::vector<int64_t> one = {5};
  const auto w = gibbs_conditional(one, one, one, hp, 0);
  REQUIRE(w.size() == 1);
  CHECK(normalized(w)[0] == doctest::Approx(1.0));
}

TEST_CASE("negative post-exclusion count is an internal error") {
  const Hyperparams hp = hp_of(2, 0.5, 0.5, 2);
  const std::vector<int64_t> nd = {0, 0}, nw = {1, 0}, nk = {1, 0};
  CHECK_THROWS_AS(gibbs_conditional(nd, nw, nk, hp, 0), Error);
}

TEST_CASE("exclusion equals physically removing the token (brute force)") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    // Tiny corpus of <= 20 tokens over a small vocabulary.
    const uint32_t k = 2 + rng.bounded(4);
    const uint32_t v = 2 + rng.bounded(5);
    const Hyperparams hp = hp_of(k, 0.2 + rng.uniform(), 0.05 + rng.uniform(), v);
    const uint32_t n_tokens = 1 + rng.bounded(20);

    std::vector<uint32_t> words(n_tokens), topics(n_tokens);
    for (uint32_t i = 0; i < n_tokens; ++i) {
      words[i] = rng.bounded(v);
      topics[i] = rng.bounded(k);
    }
    const uint32_t pos = rng.bounded(n_tokens);
    const uint32_t w0 = words[pos];
    const uint32_t z0 = topics[pos];

    // Inclusive counts for the one-document corpus.
    std::vector<int64_t> nd(k, 0), nw(k, 0), nk(k, 0);
    for (uint32_t i = 0; i < n_tokens; ++i) {
      ++nd[topics[i]];
      ++nk[topics[i]];
      if (words[i] == w0) ++nw[topics[i]];
    }
    const auto via_exclude = gibbs_conditional(nd, nw, nk, hp, z0);

    // Independent route: rebuild counts from the corpus with the token gone.
    std::vector<int64_t> nd2(k, 0), nw2(k, 0), nk2(k, 0);
    for (uint32_t i = 0; i < n_tokens; ++i) {
      if (i == pos) continue;
      ++nd2[topics[i]];
      ++nk2[topics[i]];
      if (words[i] == w0) ++nw2[topics[i]];
    }
    const auto via_removal = conditional_by_formula(nd2, nw2, nk2, hp.alpha, hp.beta, v);

    for (uint32_t i = 0; i < k; ++i)
      CHECK(via_exclude[i] == doctest::Approx(via_removal[i]).epsilon(1e-12));
  }
}

TEST_CASE("mh_resample with K=1 returns topic 0") {
  const Hyperparams hp = hp_of(1, 0.5, 0.5, 3);
  DocState doc;
  doc.words = {0, 0};
  doc.topics = {0, 0};
  doc.topic_counts = {2};
  const std::vector<int64_t> row = {2}, totals = {2};
  const std::vector<double> proposal = {2.5};
  const AliasTable alias = AliasTable::build(proposal);
  Rng rng(5);
  for (int i = 0; i < 50; ++i)
    CHECK(mh_resample(0, doc, row, totals, proposal, alias, hp, rng, 3) == 0);
}

TEST_CASE("identity proposals leave the chain state unchanged") {
  // Word proposal mass concentrated on the current topic and a document whose
  // tokens all carry it: every proposal equals the current state, acceptance
  // ratio 1, so the chain never moves.
  const Hyperparams hp = hp_of(2, 1e-9, 0.5, 2);
  DocState doc;
  doc.words = {0, 0, 0};
  doc.topics = {1, 1, 1};
  doc.topic_counts = {0, 3};
  const std::vector<int64_t> row = {0, 3}, totals = {0, 3};
  const std::vector<double> proposal = {0.0, 3.5};  // never proposes topic 0
  const AliasTable alias = AliasTable::build(proposal);
  Rng rng(11);
  for (int i = 0; i < 200; ++i)
    CHECK(mh_resample(1, doc, row, totals, proposal, alias, hp, rng, 4) == 1);
}

TEST_CASE("MH empirical distribution approaches the exact conditional (fixed state)") {
  // The hand-derived two-topic state; steps=4 chains as in the contract.
  TinyState st;
  st.hp = hp_of(2, 1.0, 1.0, 2);
  st.doc.words = {0, 0};
  st.doc.topics = {0, 0};
  st.doc.topic_counts = {2, 0};
  st.position = 0;
  st.z_old = 0;
  st.row = {3, 0};
  st.totals = {4, 1};

  const auto exact = exact_conditional(st);
  CHECK(exact[0] == doctest::Approx(0.7826086956521738).epsilon(1e-9));

  const auto freq = mh_empirical(st, 4, 100000, 77);
  CHECK(total_variation(freq, exact) < 0.02);
}

TEST_CASE("MH oracle equivalence over random small states (quick slice)") {
  Rng rng(31337);
  for (int trial = 0; trial < 10; ++trial) {
    const TinyState st = random_state(rng);
    const auto exact = exact_conditional(st);
    const auto freq = mh_empirical(st, 8, 40000, 1000 + trial);
    INFO("trial " << trial << " K=" << st.hp.num_topics);
    CHECK(total_variation(freq, exact) < 0.035);
  }
}

TEST_CASE("a single topic move emits exactly the four expected deltas") {
  Rng seed_scan(1);
  for (uint64_t seed = 1; seed < 200; ++seed) {
    TinyState st = random_state(seed_scan);
    std::vector<double> proposal(st.hp.num_topics);
    for (uint32_t i = 0; i < st.hp.num_topics; ++i)
      proposal[i] = static_cast<double>(st.row[i]) + st.hp.beta;
    const AliasTable alias = AliasTable::build(proposal);

    std::vector<DocState> docs = {st.doc};
    const std::vector<TokenRef> tokens = {{0, st.position}};
    std::vector<int64_t> row = st.row, totals = st.totals;
    WordDelta delta;
    Rng rng(seed);
    resample_word_tokens(tokens, docs, row, totals, proposal, alias, st.hp, rng, 2, delta);

    const uint32_t z_new = docs[0].topics[st.position];
    if (z_new == st.z_old) {
      CHECK_FALSE(delta.any);
      continue;
    }
    // Moved: the delta multiset is {(w,new,+1),(w,old,-1)} and same for n_k.
    CHECK(delta.any);
    for (uint32_t k = 0; k < st.hp.num_topics; ++k) {
      const int64_t expect = (k == z_new) ? 1 : (k == st.z_old ? -1 : 0);
      CHECK(delta.row[k] == expect);
      CHECK(delta.topic[k] == expect);
    }
    return;  // found a moving seed; done
  }
  FAIL("no seed produced a topic move");
}

TEST_CASE("deltas conserve tokens and match a recount") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const uint32_t k = 2 + rng.bounded(5);
    const uint32_t v = 3 + rng.bounded(5);
    const Hyperparams hp = hp_of(k, 0.3, 0.1, v);

    // One small document over word 0 plus background counts.
    std::vector<DocState> docs(1);
    DocState& doc = docs[0];
    const uint32_t len = 3 + rng.bounded(10);
    doc.topic_counts.assign(k, 0);
    for (uint32_t i = 0; i < len; ++i) {
      doc.words.push_back(0);
      doc.topics.push_back(rng.bounded(k));
      ++doc.topic_counts[doc.topics.back()];
    }
    std::vector<int64_t> row(k, 0), totals(k, 0);
    for (uint32_t i = 0; i < len; ++i) ++row[doc.topics[i]];
    for (uint32_t i = 0; i < k; ++i) totals[i] = row[i] + rng.bounded(10);

    std::vector<TokenRef> tokens;
    for (uint32_t i = 0; i < len; ++i) tokens.push_back({0, i});

    std::vector<double> proposal(k);
    for (uint32_t i = 0; i < k; ++i) proposal[i] = static_cast<double>(row[i]) + hp.beta;
    const AliasTable alias = AliasTable::build(proposal);

    const std::vector<int64_t> row_before = row, totals_before = totals;
    WordDelta delta;
    resample_word_tokens(tokens, docs, row, totals, proposal, alias, hp, rng, 2, delta);

    int64_t row_sum = 0, topic_sum = 0;
    for (uint32_t i = 0; i < k; ++i) {
      row_sum += delta.row[i];
      topic_sum += delta.topic[i];
      CHECK(row_before[i] + delta.row[i] == row[i]);
      CHECK(totals_before[i] + delta.topic[i] == totals[i]);
    }
    CHECK(row_sum == 0);
    CHECK(topic_sum == 0);

    // n_dk and the row stay consistent with the stored assignments.
    std::vector<int64_t> recount(k, 0);
    for (uint32_t i = 0; i < len; ++i) ++recount[doc.topics[i]];
    CHECK(recount == doc.topic_counts);
    CHECK(recount == row);
  }
}
