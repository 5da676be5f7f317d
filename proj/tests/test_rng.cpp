#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "flagsim/rng.hpp"

using flagsim::PathRng;

namespace {

using Block = std::array<std::uint64_t, 4>;
using Key = std::array<std::uint64_t, 2>;

}  // namespace

TEST_CASE("philox block function matches frozen vectors") {
  // Zero counter, zero key: the classic known-answer vector.
  CHECK(PathRng::block({0, 0, 0, 0}, {0, 0}) ==
        Block{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL,
              0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  CHECK(PathRng::block({1, 0, 0, 0}, {0, 0}) ==
        Block{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL,
              0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL});

  const Key key_a{0xDEADBEEF12345678ULL, 0x0123456789ABCDEFULL};
  CHECK(PathRng::block({0, 0, 0, 0}, key_a) ==
        Block{0x331db1f434653029ULL, 0x1007c4d800b68c98ULL,
              0x562232dbebd6fd15ULL, 0xef47a94b78cc1bd1ULL});
  CHECK(PathRng::block({1, 0, 0, 0}, key_a) ==
        Block{0x17c76ef0050c63aaULL, 0x6b9192c87962baefULL,
              0xae999f96b0903bbbULL, 0xad2efa6791812a95ULL});

  const Key key_b{7, 3};
  CHECK(PathRng::block({0, 0, 0, 0}, key_b) ==
        Block{0xa1190e8c2941dfafULL, 0x7123ed095431578bULL,
              0x9aa61d78ff08533bULL, 0x152dcf937105ea2dULL});
  CHECK(PathRng::block({1, 0, 0, 0}, key_b) ==
        Block{0x7b6cc7b1862cc5f2ULL, 0xb960f2ea4b3f8d9fULL,
              0x0cdd72e015deb1a6ULL, 0x50edb0d22a6a6fd5ULL});
  // Second counter word exercised (the 256-bit carry path).
  CHECK(PathRng::block({0, 1, 0, 0}, key_b) ==
        Block{0x6c658e5f4f8ef7cbULL, 0x1e3de36fcb1c988dULL,
              0x4be9f4e6c96fbd20ULL, 0xb0540310e2e5bb01ULL});
}

TEST_CASE("stream order is block-major and deterministic") {
  PathRng rng(0xDEADBEEF12345678ULL, 0x0123456789ABCDEFULL);
  const std::vector<std::uint64_t> expect{
      0x331db1f434653029ULL, 0x1007c4d800b68c98ULL, 0x562232dbebd6fd15ULL,
      0xef47a94b78cc1bd1ULL, 0x17c76ef0050c63aaULL, 0x6b9192c87962baefULL,
      0xae999f96b0903bbbULL, 0xad2efa6791812a95ULL};
  for (std::uint64_t want : expect) CHECK(rng.next_u64() == want);

  PathRng again(0xDEADBEEF12345678ULL, 0x0123456789ABCDEFULL);
  for (std::uint64_t want : expect) CHECK(again.next_u64() == want);
}

TEST_CASE("distinct path indices give distinct streams") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t path = 0; path < 64; ++path) {
    PathRng rng(42, path);
    firsts.insert(rng.next_u64());
  }
  CHECK(firsts.size() == 64);
}

TEST_CASE("uniform lies strictly inside (0,1) and is log-safe") {
  PathRng rng(1, 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(std::isfinite(std::log(lo)));
  // With 1e5 draws the extremes should close in on the interval ends.
  CHECK(lo < 1e-3);
  CHECK(hi > 1.0 - 1e-3);
}

TEST_CASE("gaussian has the right first moments") {
  PathRng rng(2026, 7);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
    sum4 += g * g * g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double kurt = sum4 / n;
  // 3-sigma bands for N(0,1): sd(mean) = 1/sqrt(n), sd(var) ~ sqrt(2/n),
  // sd(m4) ~ sqrt(96/n).
  CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(kurt - 3.0) < 3.0 * std::sqrt(96.0 / n));
}

TEST_CASE("scaled gaussian applies the standard deviation") {
  PathRng a(5, 5);
  PathRng b(5, 5);
  for (int i = 0; i < 16; ++i)
    CHECK(a.gaussian(2.5) == doctest::Approx(2.5 * b.gaussian()).epsilon(1e-15));
}
