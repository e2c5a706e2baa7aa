#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>

#include "apslda/corpus.hpp"
#include "apslda/error.hpp"
#include "apslda/sampler.hpp"

using namespace apslda;

TEST_CASE("libsvm pairs expand to repeated tokens, 1-based to 0-based") {
  const Corpus c = parse_libsvm("0 3:2 7:1\n");
  REQUIRE(c.docs.size() == 1);
  CHECK(c.docs[0].tokens == std::vector<uint32_t>{2, 2, 6});
  CHECK(c.vocab_size == 7);
  CHECK(c.total_tokens == 3);
  CHECK(c.docs[0].assignments.empty());
}

TEST_CASE("empty file loads as empty corpus") {
  const Corpus c = parse_libsvm("");
  CHECK(c.docs.empty());
  CHECK(c.total_tokens == 0);
  CHECK(c.vocab_size == 0);
}

TEST_CASE("counts sum into total_tokens") {
  const Corpus c = parse_libsvm("1 1:1\n1 1:3\n");
  CHECK(c.docs.size() == 2);
  CHECK(c.total_tokens == 4);
  CHECK(c.vocab_size == 1);
}

TEST_CASE("labels are discarded, blank lines skipped, CRLF tolerated") {
  const Corpus c = parse_libsvm("-1.5 2:1\r\n\n   \n+3 1:2\n");
  REQUIRE(c.docs.size() == 2);
  CHECK(c.docs[0].tokens == std::vector<uint32_t>{1});
  CHECK(c.docs[1].tokens == std::vector<uint32_t>{0, 0});
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_AS(parse_libsvm("0 0:1\n"), ParseError);  // idx must be >= 1
  CHECK_THROWS_AS(parse_libsvm("0 1:0\n"), ParseError);  // count must be >= 1
  CHECK_THROWS_AS(parse_libsvm("abc 1:1\n"), ParseError);
  CHECK_THROWS_AS(parse_libsvm("0 1:1\n0 nope\n"), ParseError);
  try {
    parse_libsvm("0 1:1\n0 bad:pair:x\n", 0, "data.txt");
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("data.txt:2") != std::string::npos);
  }
}

TEST_CASE("declared vocabulary reserves rows and rejects too-small values") {
  const Corpus c = parse_libsvm("0 3:1\n", 10);
  CHECK(c.vocab_size == 10);
  CHECK_THROWS_AS(parse_libsvm("0 3:1\n", 2), ArgError);
}

TEST_CASE("round-trip: total_tokens equals the sum of all counts") {
  const Corpus c = parse_libsvm("0 1:3 2:4\n1 5:2\n0 2:1 9:6\n");
  CHECK(c.total_tokens == 3 + 4 + 2 + 1 + 6);
}

TEST_CASE("partition balances contiguous blocks") {
  Corpus c;
  c.docs.resize(10);

  auto sizes = [](const std::vector<Partition>& parts) {
    std::vector<size_t> s;
    for (const auto& p : parts) s.push_back(p.doc_ids.size());
    return s;
  };

  CHECK(sizes(partition(c, 3)) == std::vector<size_t>{4, 3, 3});
  c.docs.resize(5);
  CHECK(sizes(partition(c, 1)) == std::vector<size_t>{5});
  c.docs.resize(2);
  CHECK(sizes(partition(c, 4)) == std::vector<size_t>{1, 1, 0, 0});
  CHECK_THROWS_AS(partition(c, 0), ArgError);
}

TEST_CASE("partitioning is a set partition for every worker count") {
  Corpus c;
  c.docs.resize(13);
  for (uint32_t p = 1; p <= 13; ++p) {
    const auto parts = partition(c, p);
    std::set<uint32_t> seen;
    size_t max_size = 0, min_size = SIZE_MAX;
    for (const auto& part : parts) {
      for (uint32_t id : part.doc_ids) CHECK(seen.insert(id).second);
      max_size = std::max(max_size, part.doc_ids.size());
      min_size = std::min(min_size, part.doc_ids.size());
    }
    CHECK(seen.size() == 13);
    CHECK(max_size - min_size <= 1);
  }
}

TEST_CASE("init_assignments draws valid topics and exact deltas") {
  Corpus c = parse_libsvm("0 1:3 2:2\n1 3:2\n");  // 7 tokens
  const InitialDeltas d = init_assignments(c, 4, 99);

  int64_t topic_total = std::accumulate(d.topic.begin(), d.topic.end(), int64_t{0});
  CHECK(topic_total == 7);
  int64_t cell_total = 0;
  for (const CellDelta& cd : d.word_topic) {
    CHECK(cd.inc > 0);
    CHECK(cd.row < c.vocab_size);
    CHECK(cd.col < 4);
    cell_total += cd.inc;
  }
  CHECK(cell_total == 7);
  for (const Document& doc : c.docs) {
    REQUIRE(doc.assignments.size() == doc.tokens.size());
    for (uint32_t z : doc.assignments) CHECK(z < 4);
  }
}

TEST_CASE("K=1 assigns topic 0 everywhere") {
  Corpus c = parse_libsvm("0 1:5\n");
  init_assignments(c, 1, 3);
  for (uint32_t z : c.docs[0].assignments) CHECK(z == 0);
}

TEST_CASE("init_assignments is deterministic per seed") {
  Corpus a = parse_libsvm("0 1:10 2:10\n1 3:5\n");
  Corpus b = parse_libsvm("0 1:10 2:10\n1 3:5\n");
  init_assignments(a, 7, 12345);
  init_assignments(b, 7, 12345);
  for (size_t i = 0; i < a.docs.size(); ++i)
    CHECK(a.docs[i].assignments == b.docs[i].assignments);

  Corpus c = parse_libsvm("0 1:10 2:10\n1 3:5\n");
  init_assignments(c, 7, 54321);
  bool all_equal = true;
  for (size_t i = 0; i < a.docs.size(); ++i)
    all_equal = all_equal && a.docs[i].assignments == c.docs[i].assignments;
  CHECK_FALSE(all_equal);
}

TEST_CASE("document topic counts stay in lockstep with assignments") {
  Corpus c = parse_libsvm("0 1:4 2:3 5:1\n1 2:2\n");
  init_assignments(c, 3, 8);
  for (const Document& doc : c.docs) {
    const DocState st = make_doc_state(doc.doc_id, doc.tokens, doc.assignments, 3);
    int64_t sum = 0;
    for (int64_t v : st.topic_counts) sum += v;
    CHECK(sum == static_cast<int64_t>(doc.tokens.size()));
  }
}
