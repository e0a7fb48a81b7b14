#pragma once

#include <cstdint>
#include <utility>

namespace spdreg {

/// Counter-based generator: draw k of stream s under seed is a pure
/// function of (seed, s, k), built from the SplitMix64 finalizer. Streams
/// are independent, so per-pixel substreams stay reproducible no matter
/// how pixels are scheduled.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Two independent standard normals (Box-Muller on two uniforms).
  std::pair<double, double> normal_pair();

  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace spdreg
