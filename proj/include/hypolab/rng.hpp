#pragma once

#include <array>
#include <cstdint>

namespace hypolab {

// Philox4x32-10 (Salmon et al. counter-based generator). Output is a pure function of (key, counter).
using Philox4x32Ctr = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

Philox4x32Ctr philox4x32_10(Philox4x32Ctr ctr, Philox4x32Key key);

// Stream of standard normals for one (seed, path, stream) triple; `step` selects the block of four.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream = 0);
  // Four independent N(0,1) draws for counter value `step` (Box-Muller on two uint32 pairs).
  // With pairs = 1 only the first two are computed (the rest are left 0).
  std::array<double, 4> block(std::uint64_t step, int pairs = 2) const;
  // The i-th normal of the stream: block(i / 4)[i % 4].
  double at(std::uint64_t i) const { return block(i / 4)[i % 4]; }

 private:
  Philox4x32Key key_;
  std::uint32_t path_lo_, path_hi_, stream_;
};

// Uniform on the open interval (0, 1) from 32 bits.
inline double u01_open(std::uint32_t x) { return (double(x) + 0.5) * (1.0 / 4294967296.0); }

}  // namespace hypolab
