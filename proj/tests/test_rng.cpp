#include <cmath>
#include <vector>

#include "doctest.h"
#include "sopjam/rng.hpp"

using namespace sopjam;

TEST_CASE("label hashing is stable and collision-free for distinct labels") {
  CHECK(hash_label("sweep") == hash_label("sweep"));
  CHECK(hash_label("sweep") != hash_label("imu"));
  CHECK(hash_label("") != hash_label("a"));
  CHECK(mix_seed(1, hash_label("a")) != mix_seed(1, hash_label("b")));
  CHECK(mix_seed(1, hash_label("a")) != mix_seed(2, hash_label("a")));
}

TEST_CASE("same seed and label reproduce the exact draw sequence") {
  RandomStream a(42, "test");
  RandomStream b(42, "test");
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.gaussian() == b.gaussian());
    CHECK(a.uniform_index(17) == b.uniform_index(17));
  }
}

TEST_CASE("different labels give independent sequences") {
  RandomStream a(42, "alpha");
  RandomStream b(42, "beta");
  int agree = 0;
  for (int i = 0; i < 64; ++i) {
    if (a.uniform_index(1000) == b.uniform_index(1000)) ++agree;
  }
  CHECK(agree < 8);
}

TEST_CASE("draws from one stream do not perturb another") {
  RandomStream lhs(9, "x");
  std::vector<double> expected;
  for (int i = 0; i < 20; ++i) expected.push_back(lhs.uniform());

  RandomStream again(9, "x");
  RandomStream noise(9, "y");
  for (int i = 0; i < 20; ++i) {
    for (int k = 0; k <= i % 3; ++k) noise.uniform();
    CHECK(again.uniform() == expected[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("uniform stays in [0,1) with a sane mean") {
  RandomStream rng(3, "uniform");
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 20000.0 - 0.5) < 0.01);
}

TEST_CASE("uniform(lo,hi) respects bounds") {
  RandomStream rng(3, "range");
  for (int i = 0; i < 1000; ++i) {
    double v = rng.uniform(-2.0, 5.0);
    REQUIRE(v >= -2.0);
    REQUIRE(v < 5.0);
  }
}

TEST_CASE("gaussian matches requested moments approximately") {
  RandomStream rng(5, "gauss");
  const int n = 40000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.gaussian(3.0, 2.0);
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean - 3.0) < 0.05);
  CHECK(std::abs(var - 4.0) < 0.15);
}

TEST_CASE("gaussian draws are always finite") {
  RandomStream rng(8, "finite");
  for (int i = 0; i < 50000; ++i) {
    REQUIRE(std::isfinite(rng.gaussian()));
  }
}

TEST_CASE("uniform_index covers [0,n) and rejects nothing out of range") {
  RandomStream rng(6, "index");
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    auto k = rng.uniform_index(7);
    REQUIRE(k < 7);
    ++seen[static_cast<std::size_t>(k)];
  }
  for (int count : seen) CHECK(count > 700);
  CHECK(rng.uniform_index(1) == 0);
}
