#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "mmgne/types.hpp"

namespace mmgne {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministically combine a master seed with stream tags, e.g.
/// derive_seed(master, {n_links, trial}). Order of tags matters.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

/// Seeded random source. Uniform and normal draws are computed from the raw
/// mt19937_64 output directly so that sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Complex complex_normal();  // CN(0, 1)
  CVector complex_normal_vector(Eigen::Index n);
  CVector unit_vector(Eigen::Index n);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mmgne
