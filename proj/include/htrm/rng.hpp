#pragma once

// Deterministic random streams.
//
// Every Monte Carlo trial owns an independent std::mt19937_64 whose seed is
// derived from (master_seed, stream tag, trial index):
//
//   tag  = fnv1a64(name)                      name is the sample family, e.g. "inverse-ginibre-sum"
//   seed = splitmix64(splitmix64(master_seed ^ tag) + trial)
//
// so any trial can be replayed on its own and results never depend on how
// trials are scheduled across workers.

#include <cstdint>
#include <random>
#include <string_view>

namespace htrm {

using Stream = std::mt19937_64;

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag,
                                    std::uint64_t trial) noexcept {
  return splitmix64(splitmix64(master_seed ^ tag) + trial);
}

inline Stream make_stream(std::uint64_t master_seed, std::string_view family,
                          std::uint64_t trial) {
  return Stream(derive_seed(master_seed, fnv1a64(family), trial));
}

}  // namespace htrm
