#pragma once

#include <cstdint>
#include <random>

namespace apslda {

// splitmix64 finalizer, used to derive independent seed streams from one run seed.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Subsystems draw from separate streams so that, e.g., changing the fault plan
// never perturbs the sampler sequence.
enum class Stream : uint64_t {
  kInit = 1,     // initial topic assignments
  kSampler = 2,  // per-worker MH draws
  kNetwork = 3,  // simulator fault plan
  kSplit = 4,    // train/test document split
  kFoldin = 5,   // per-document held-out inference
  kSynthetic = 6,
};

inline uint64_t derive_seed(uint64_t base, Stream stream, uint64_t index = 0) {
  return mix64(mix64(base ^ (static_cast<uint64_t>(stream) * 0xd6e8feb86659fd93ULL)) ^ index);
}

// mt19937_64 with explicitly-coded draw helpers so results do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Multiply-shift; bias is O(n / 2^64).
  uint32_t bounded(uint32_t n) {
    return static_cast<uint32_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  uint64_t bounded64(uint64_t n) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace apslda
