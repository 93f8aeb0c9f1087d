#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "macdec/model.hpp"

namespace macdec {

using Rng = std::mt19937_64;

/// Named sub-streams derived from a run seed.
enum class Stream : std::uint64_t {
  Sampling = 1,
  MonteCarlo = 2,
  Episodes = 3,
  Environment = 4,
  Agent = 5,
  Restart = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the stream at `path` below `base`. Independent of evaluation order,
/// so parallel workers reproduce the serial result.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(base);
  for (auto p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

inline std::size_t sample(const SparseDist& dist, Rng& rng) {
  double u = uniform01(rng);
  for (const auto& e : dist) {
    if (u < e.prob) return e.index;
    u -= e.prob;
  }
  // rounding residue: last entry with positive mass
  for (auto it = dist.rbegin(); it != dist.rend(); ++it)
    if (it->prob > 0.0) return it->index;
  return dist.empty() ? 0 : dist.back().index;
}

}  // namespace macdec
