// rng.hpp - deterministic labeled random streams
//
// Every stochastic draw in the simulator comes from a RandomStream created
// from (master seed, label).  Streams with the same pair always produce the
// same sequence, independent of creation order, which is what makes whole
// simulation runs byte-for-byte reproducible.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sopjam {

// Stable 64-bit hash of a label string (FNV-1a).  Used to derive per-stream
// seeds; must never change once outputs are considered reference data.
std::uint64_t hash_label(std::string_view label);

// Mix a master seed with a label hash into a well-spread 64-bit stream seed.
std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t label_hash);

class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::string_view label);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (explicit implementation so the sequence
  // is identical across standard libraries).
  double gaussian();

  // mean + sigma * standard normal
  double gaussian(double mean, double sigma);

  // Uniform integer in [0, n) for n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::uint64_t next_bits();

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sopjam
