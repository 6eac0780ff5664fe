#ifndef KMATCH_SEED_HPP
#define KMATCH_SEED_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kmatch {

// Seed splitting.
//
// Every random object in the library is driven by a std::mt19937_64 seeded
// from a 64-bit value. Sub-seeds are derived from a master seed by folding a
// sequence of tags through the SplitMix64 finalizer:
//
//   s_0 = master,  s_{t+1} = mix(s_t ^ mix(tag_t + GOLDEN))
//
// so derive_seed(master, {trial, copy}) differs from derive_seed(master,
// {copy, trial}) and from every prefix. The tags used by the harness are
// listed in harness.hpp.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> tags = {}) {
  return Rng(derive_seed(master, tags));
}

}  // namespace kmatch

#endif  // KMATCH_SEED_HPP
