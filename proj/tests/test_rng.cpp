#include "hypolab/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypolab;

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known-answer vectors") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Philox4x32Ctr{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Philox4x32Ctr{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Philox4x32Ctr{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("normal streams are deterministic and distinct") {
    const NormalStream a(5, 17, 0), b(5, 17, 0), c(5, 18, 0), d(5, 17, 1);
    CHECK(a.block(3) == b.block(3));
    CHECK(a.block(3) != c.block(3));
    CHECK(a.block(3) != d.block(3));
    CHECK(a.at(13) == a.block(3)[1]);
  }

  TEST_CASE("normal stream moments") {
    const NormalStream s(11, 0, 0);
    const long n = 200000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (long i = 0; i < n; ++i) {
      const double x = s.at(std::uint64_t(i));
      m1 += x;
      m2 += x * x;
      m4 += x * x * x * x;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    CHECK(std::abs(m1) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
  }

  TEST_CASE("u01_open stays inside the open interval") {
    CHECK(u01_open(0) > 0.0);
    CHECK(u01_open(0xffffffffu) < 1.0);
  }
}
