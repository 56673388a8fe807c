#pragma once

#include <cstdint>
#include <limits>

namespace lvx {

// Counter-keyed stream: the state is a hash of (seed, replicate, cell), so
// every cell draws from its own sequence regardless of evaluation order.
// Output function is SplitMix64.
class CellStream {
 public:
  using result_type = std::uint64_t;

  CellStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t cell)
      : state_(mix(mix(mix(seed) ^ (replicate + 0x632be59bd9b4e019ULL)) ^
                   (cell + 0x9e3779b97f4a7c15ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // uniform on the open interval (0, 1)
  double uniform() { return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

}  // namespace lvx
