#include "apslda/alias_table.hpp"

#include <cmath>

#include "apslda/error.hpp"

namespace apslda {

AliasTable AliasTable::build(std::span<const double> weights) {
  const size_t n = weights.size();
  if (n == 0) throw ArgError("alias table needs at least one weight");

  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ArgError("alias weights must be finite and >= 0");
    total += w;
  }
  if (total <= 0.0) throw ArgError("alias weights must not be all zero");

  AliasTable t;
  t.size_ = static_cast<uint32_t>(n);
  t.total_weight_ = total;
  t.prob_.resize(n);
  t.alias_.resize(n);

  // Scaled weights; small/large worklists as stacks.
  std::vector<double> scaled(n);
  std::vector<uint32_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    if (scaled[i] < 1.0)
      small.push_back(static_cast<uint32_t>(i));
    else
      large.push_back(static_cast<uint32_t>(i));
  }

  while (!small.empty() && !large.empty()) {
    const uint32_t s = small.back();
    const uint32_t l = large.back();
    small.pop_back();
    large.pop_back();
    t.prob_[s] = scaled[s];
    t.alias_[s] = l;
    // (pl + ps) - 1 keeps the residual numerically stable.
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0)
      small.push_back(l);
    else
      large.push_back(l);
  }
  // Leftovers are exactly-1 buckets up to rounding.
  for (uint32_t l : large) {
    t.prob_[l] = 1.0;
    t.alias_[l] = l;
  }
  for (uint32_t s : small) {
    t.prob_[s] = 1.0;
    t.alias_[s] = s;
  }
  return t;
}

double AliasTable::prob_of(uint32_t k) const {
  if (k >= size_) throw ArgError("alias index out of range");
  double mass = prob_[k];
  for (uint32_t i = 0; i < size_; ++i)
    if (alias_[i] == k && i != k) mass += 1.0 - prob_[i];
  return mass / static_cast<double>(size_);
}

}  // namespace apslda
