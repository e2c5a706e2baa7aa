#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apslda/rng.hpp"

namespace apslda {

// Walker/Vose alias table: O(K) construction, amortized O(1) draws from a
// fixed categorical distribution. Immutable after build; concurrent sampling
// is safe when each caller owns its generator.
class AliasTable {
 public:
  // weights must be finite, >= 0, with at least one strictly positive entry.
  static AliasTable build(std::span<const double> weights);

  // Draws index k with probability weights[k] / total_weight. Consumes
  // exactly one uniform pair (bucket draw + coin) per call.
  uint32_t sample(Rng& rng) const {
    const uint32_t bucket = rng.bounded(size_);
    const double coin = rng.uniform();
    return coin < prob_[bucket] ? bucket : alias_[bucket];
  }

  // Reconstructs the probability the table assigns to k from the prob/alias
  // entries alone. O(K); intended as a verification oracle.
  double prob_of(uint32_t k) const;

  uint32_t size() const { return size_; }
  double total_weight() const { return total_weight_; }
  std::span<const double> prob() const { return prob_; }
  std::span<const uint32_t> alias() const { return alias_; }

 private:
  AliasTable() = default;

  uint32_t size_ = 0;
  double total_weight_ = 0.0;
  std::vector<double> prob_;     // acceptance threshold per bucket, in [0,1]
  std::vector<uint32_t> alias_;  // fallback index per bucket
};

}  // namespace apslda
