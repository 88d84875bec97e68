#pragma once

#include <isomat/grid.hpp>

#include <cstdint>
#include <vector>

// Lower sets of the grid poset [n1] x [n2] with (1,1) minimal, encoded as
// staircase height profiles: heights[j] in [0, n1], nonincreasing in j, and
// cell (i, j) (0-based) belongs to the set iff i < heights[j]. Upper sets are
// the complements of lower sets. There are binomial(n1+n2, n1) of each.

namespace isomat {

struct LowerSetProfile {
  std::vector<int> heights;  // length n2, nonincreasing, values in [0, n1]

  bool contains(int i, int j) const { return i < heights[static_cast<std::size_t>(j)]; }
};

// binomial(n1+n2, n1), saturating at max uint64.
inline std::uint64_t lower_set_count(int n1, int n2) {
  const std::uint64_t kMax = ~std::uint64_t{0};
  std::uint64_t r = 1;
  const int k = n1 < n2 ? n1 : n2;
  const int n = n1 + n2;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (r > kMax / num) return kMax;
    r = r * num / static_cast<std::uint64_t>(i);
  }
  return r;
}

inline constexpr std::uint64_t kDefaultLowerSetCap = 200000;

// Every lower set exactly once. Throws SizeCapError when the count exceeds
// `cap` before any work is done.
inline std::vector<LowerSetProfile> enumerate_lower_sets(int n1, int n2,
                                                         std::uint64_t cap = kDefaultLowerSetCap) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("enumerate_lower_sets: sizes must be >= 1");
  const std::uint64_t count = lower_set_count(n1, n2);
  if (count > cap) {
    throw SizeCapError("enumerate_lower_sets: binomial(" + std::to_string(n1 + n2) + "," + std::to_string(n1) +
                       ") = " + std::to_string(count) + " exceeds cap " + std::to_string(cap));
  }
  std::vector<LowerSetProfile> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> h(static_cast<std::size_t>(n2), 0);
  // Odometer over nonincreasing profiles in lexicographic order.
  auto emit = [&] { out.push_back(LowerSetProfile{h}); };
  emit();
  while (true) {
    int j = n2 - 1;
    while (j >= 0) {
      const int ub = j == 0 ? n1 : h[static_cast<std::size_t>(j - 1)];
      if (h[static_cast<std::size_t>(j)] < ub) break;
      --j;
    }
    if (j < 0) break;
    ++h[static_cast<std::size_t>(j)];
    for (int t = j + 1; t < n2; ++t) h[static_cast<std::size_t>(t)] = 0;
    emit();
  }
  return out;
}

}  // namespace isomat
