#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "apslda/error.hpp"
#include "apslda/paramserver.hpp"
#include "apslda/rng.hpp"

using namespace apslda;

TEST_CASE("row partitioning is total, contiguous and balanced") {
  for (uint32_t rows : {1u, 2u, 7u, 100u, 101u}) {
    for (uint32_t shards : {1u, 2u, 3u, 8u}) {
      const RowPartitioning part(rows, shards);
      uint32_t covered = 0;
      uint32_t min_size = UINT32_MAX, max_size = 0;
      for (uint32_t s = 0; s < shards; ++s) {
        const auto [begin, end] = part.row_range(s);
        for (uint32_t r = begin; r < end; ++r) CHECK(part.shard_of(r) == s);
        covered += end - begin;
        min_size = std::min(min_size, end - begin);
        max_size = std::max(max_size, end - begin);
      }
      CHECK(covered == rows);
      CHECK(max_size - min_size <= 1);
      CHECK(part.shard_of(kTopicCountsRow) == 0);
    }
  }
  CHECK_THROWS_AS(RowPartitioning(4, 2).shard_of(4), ArgError);
}

TEST_CASE("fresh shard pulls zeros; pushes become visible") {
  ShardState st(0, RowPartitioning(8, 1), 4);
  const std::vector<uint32_t> rows = {3};
  auto vals = st.pull(rows, {});
  CHECK(vals == std::vector<int64_t>{0, 0, 0, 0});

  const std::vector<CellDelta> delta = {{3, 1, 2}};
  CHECK(st.push_data(9, st.acquire_txid(9), delta));
  vals = st.pull(rows, {});
  CHECK(vals == std::vector<int64_t>{0, 2, 0, 0});

  // Idempotent reads.
  CHECK(st.pull(rows, {}) == st.pull(rows, {}));
}

TEST_CASE("column-restricted pulls") {
  ShardState st(0, RowPartitioning(4, 1), 3);
  const std::vector<CellDelta> delta = {{1, 0, 5}, {1, 2, 7}};
  st.push_data(1, st.acquire_txid(1), delta);
  const std::vector<uint32_t> rows = {1, 2};
  const std::vector<uint32_t> cols = {2, 0};
  CHECK(st.pull(rows, cols) == std::vector<int64_t>{7, 5, 0, 0});
  const std::vector<uint32_t> bad_cols = {3};
  CHECK_THROWS_AS(st.pull(rows, bad_cols), ArgError);
}

TEST_CASE("pulling a row the shard does not own is a routing error") {
  ShardState st(1, RowPartitioning(8, 2), 2);
  const std::vector<uint32_t> not_mine = {0};
  CHECK_THROWS_AS(st.pull(not_mine, {}), ArgError);
  const std::vector<CellDelta> delta = {{0, 0, 1}};
  CHECK_THROWS_AS(st.push_data(1, 1, delta), ArgError);
}

TEST_CASE("txids are monotonic per client and independent across clients") {
  ShardState st(0, RowPartitioning(2, 1), 2);
  const uint64_t a1 = st.acquire_txid(1);
  const uint64_t a2 = st.acquire_txid(1);
  const uint64_t b1 = st.acquire_txid(2);
  CHECK(a2 > a1);
  CHECK(b1 == a1);  // per-client counter: (client, txid) pairs stay unique

  // Allocation never touches counts.
  CHECK(st.pull(std::vector<uint32_t>{0}, {}) == std::vector<int64_t>{0, 0});
}

TEST_CASE("duplicate push deliveries apply exactly once") {
  ShardState st(0, RowPartitioning(2, 1), 2);
  const uint64_t tx = st.acquire_txid(5);
  const std::vector<CellDelta> delta = {{0, 0, 1}};
  int applied = 0;
  for (int i = 0; i < 5; ++i) applied += st.push_data(5, tx, delta) ? 1 : 0;
  CHECK(applied == 1);
  CHECK(st.cell(0, 0) == 1);

  // Distinct txids accumulate commutatively.
  st.push_data(5, st.acquire_txid(5), delta);
  CHECK(st.cell(0, 0) == 2);
}

TEST_CASE("stale decrement makes a cell transiently negative") {
  ShardState st(0, RowPartitioning(2, 1), 2);
  const std::vector<CellDelta> delta = {{1, 1, -1}};
  st.push_data(3, st.acquire_txid(3), delta);
  CHECK(st.cell(1, 1) == -1);  // non-negativity is asserted only at quiescence
}

TEST_CASE("release forgets dedup state and blocks late duplicates") {
  ShardState st(0, RowPartitioning(2, 1), 2);
  const std::vector<CellDelta> delta = {{0, 1, 1}};
  const uint64_t t1 = st.acquire_txid(7);
  const uint64_t t2 = st.acquire_txid(7);
  st.push_data(7, t1, delta);
  st.push_data(7, t2, delta);
  CHECK(st.applied_txid_count() == 2);

  st.release_upto(7, t2);
  CHECK(st.applied_txid_count() == 0);
  st.release_upto(7, t2);  // idempotent
  CHECK(st.applied_txid_count() == 0);

  // A duplicate of a released transaction must not re-apply.
  CHECK_FALSE(st.push_data(7, t1, delta));
  CHECK(st.cell(0, 1) == 2);
}

TEST_CASE("release of an unknown transaction is ignored") {
  ShardState st(0, RowPartitioning(2, 1), 2);
  st.release_upto(4, 10);
  CHECK(st.applied_txid_count() == 0);
}

TEST_CASE("pull storms never mutate shard state") {
  ShardState st(0, RowPartitioning(16, 1), 4);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const std::vector<CellDelta> delta = {
        {rng.bounded(16), rng.bounded(4), static_cast<int64_t>(rng.bounded(9)) - 4}};
    st.push_data(1, st.acquire_txid(1), delta);
  }
  const uint64_t before = st.state_hash();
  for (int i = 0; i < 500; ++i) {
    std::vector<uint32_t> rows = {rng.bounded(16)};
    if (i % 7 == 0) rows.push_back(kTopicCountsRow);
    st.pull(rows, {});
  }
  CHECK(st.state_hash() == before);
}

TEST_CASE("exactly-once under a seeded adversarial delivery schedule") {
  // Raw shard-level model of loss, duplication and reordering: every push is
  // delivered between 0 and 3 times in a shuffled order; dedup must make the
  // final value equal the number of logical pushes.
  ShardState st(0, RowPartitioning(2, 1), 1);
  Rng rng(2718);
  const int pushes = 1000;
  std::vector<std::pair<uint32_t, uint64_t>> deliveries;
  for (int i = 0; i < pushes; ++i) {
    const uint32_t client = rng.bounded(4);
    const uint64_t tx = st.acquire_txid(client);
    const uint32_t copies = 1 + rng.bounded(3);
    for (uint32_t c = 0; c < copies; ++c) deliveries.push_back({client, tx});
  }
  for (size_t i = deliveries.size(); i > 1; --i)
    std::swap(deliveries[i - 1], deliveries[rng.bounded(static_cast<uint32_t>(i))]);

  const std::vector<CellDelta> delta = {{0, 0, 1}};
  for (const auto& [client, tx] : deliveries) st.push_data(client, tx, delta);
  CHECK(st.cell(0, 0) == pushes);
}
