#include "robustreg/rng.hpp"

#include "catch2/catch_amalgamated.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace robustreg;

TEST_CASE("same seed and stream reproduce the sequence exactly") {
  CounterRng a(42, 3);
  CounterRng b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds or streams give different sequences") {
  CounterRng a(42, 0);
  CounterRng b(43, 0);
  CounterRng c(42, 1);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const uint64_t xa = a.next_u64();
    if (xa == b.next_u64()) ++same_ab;
    if (xa == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("uniform draws stay strictly inside (0,1) and look uniform") {
  CounterRng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("normal consumes exactly two uniforms per call") {
  CounterRng a(99);
  CounterRng b(99);
  a.normal();
  b.uniform();
  b.uniform();
  // After one normal vs two uniforms the counters line up again.
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("normal moments") {
  CounterRng rng(2);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == Catch::Approx(0.0).margin(0.02));
  CHECK(var == Catch::Approx(1.0).margin(0.03));
}

TEST_CASE("t with 1 df: median zero, |T| exceeds 1 half the time") {
  CounterRng rng(3);
  const int n = 100000;
  int positive = 0, beyond_one = 0;
  for (int i = 0; i < n; ++i) {
    const double t = rng.student_t(1);
    if (t > 0) ++positive;
    if (std::fabs(t) > 1.0) ++beyond_one;
  }
  // Cauchy: P(T>0) = 0.5 and P(|T|>1) = 0.5.
  CHECK(static_cast<double>(positive) / n == Catch::Approx(0.5).margin(0.01));
  CHECK(static_cast<double>(beyond_one) / n == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("t with 3 df: variance near 3") {
  CounterRng rng(4);
  const int n = 200000;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = rng.student_t(3);
    sumsq += t * t;
  }
  // Var = df/(df-2) = 3; slow tail convergence, generous window.
  CHECK(sumsq / n == Catch::Approx(3.0).margin(0.35));
}

TEST_CASE("unsupported t degrees of freedom throw") {
  CounterRng rng(5);
  CHECK_THROWS_AS(rng.student_t(2), std::invalid_argument);
  CHECK_THROWS_AS(rng.student_t(5), std::invalid_argument);
}

TEST_CASE("below() covers the whole range and respects the bound") {
  CounterRng rng(6);
  std::set<uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const uint64_t x = rng.below(7);
    REQUIRE(x < 7);
    seen.insert(x);
  }
  CHECK(seen.size() == 7);
  // Bound 1 always yields 0.
  CHECK(rng.below(1) == 0);
}
