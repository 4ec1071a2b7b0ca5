#pragma once

#include <cstdint>

namespace fcgam {

/// xoshiro256** generator seeded through splitmix64. Streams derived from
/// (base_seed, stream_index) are used for parallel work so results do not
/// depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng stream(std::uint64_t base_seed, std::uint64_t stream_index);

  std::uint64_t next_u64();

  /// Uniform draw on the open interval (0, 1).
  double uniform();

  /// Standard normal draw by quantile inversion (portable and deterministic).
  double normal();

 private:
  std::uint64_t state_[4];
};

}  // namespace fcgam
