#include "hypolab/rng.hpp"

#include <cmath>

namespace hypolab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * b;
  hi = std::uint32_t(p >> 32);
  lo = std::uint32_t(p);
}

}  // namespace

Philox4x32Ctr philox4x32_10(Philox4x32Ctr c, Philox4x32Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
      path_lo_(std::uint32_t(path)),
      path_hi_(std::uint32_t(path >> 32)),
      stream_(stream) {}

std::array<double, 4> NormalStream::block(std::uint64_t step, int pairs) const {
  // counter words: step (32 bits), path low, path high ^ (step high bits), stream
  const Philox4x32Ctr ctr{std::uint32_t(step), path_lo_, path_hi_ ^ std::uint32_t(step >> 32), stream_};
  const auto x = philox4x32_10(ctr, key_);
  std::array<double, 4> z{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < pairs; ++i) {
    const double rad = std::sqrt(-2.0 * std::log(u01_open(x[2 * i])));
    const double ang = 6.283185307179586 * u01_open(x[2 * i + 1]);
    z[2 * i] = rad * std::cos(ang);
    z[2 * i + 1] = rad * std::sin(ang);
  }
  return z;
}

}  // namespace hypolab
