#include "sopjam/rng.hpp"

#include <cmath>

namespace sopjam {

std::uint64_t hash_label(std::string_view label) {
  // FNV-1a, 64-bit variant.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : label) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

// splitmix64 finalizer; spreads low-entropy inputs over the full 64-bit range.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t label_hash) {
  return splitmix64(splitmix64(master_seed) ^ label_hash);
}

RandomStream::RandomStream(std::uint64_t master_seed, std::string_view label)
    : engine_(mix_seed(master_seed, hash_label(label))) {}

std::uint64_t RandomStream::next_bits() { return engine_(); }

double RandomStream::uniform() {
  // Top 53 bits -> double in [0, 1).
  return static_cast<double>(next_bits() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RandomStream::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller with u1 in (0, 1].
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double RandomStream::gaussian(double mean, double sigma) {
  return mean + sigma * gaussian();
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = n * (UINT64_MAX / n);
  std::uint64_t x;
  do {
    x = next_bits();
  } while (x >= limit);
  return x % n;
}

}  // namespace sopjam
