#include "fcgam/rng.hpp"

#include "fcgam/special.hpp"

namespace fcgam {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

Rng Rng::stream(std::uint64_t base_seed, std::uint64_t stream_index) {
  // Mix the stream index through splitmix64 so that consecutive indices give
  // unrelated seeds.
  std::uint64_t s = base_seed;
  const std::uint64_t mixed_base = splitmix64(s);
  std::uint64_t t = stream_index ^ 0x6a09e667f3bcc909ULL;
  const std::uint64_t mixed_index = splitmix64(t);
  return Rng(mixed_base ^ rotl(mixed_index, 17));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  // 53-bit mantissa shifted into (0, 1): never returns an endpoint.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return std_normal_quantile(uniform()); }

}  // namespace fcgam
