#include "nsearch/core/rng.h"

#include <algorithm>
#include <numeric>

namespace nsearch {

std::vector<int> Rng::sample_indices(int n, int count) {
  count = std::clamp(count, 0, n);
  std::vector<int> pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates: the first `count` slots hold the sample.
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<int>(uniform_int(i, n - 1));
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  pool.resize(static_cast<size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

uint64_t Rng::mix(uint64_t seed, uint64_t salt) {
  // splitmix64 finalizer over the combined value.
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace nsearch
