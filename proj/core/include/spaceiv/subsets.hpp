#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace spaceiv {

// {0, 1, ..., k-1}, the lexicographically first k-subset.
inline std::vector<int> first_subset(int k) {
  std::vector<int> s(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = i;
  return s;
}

// Advance to the next k-subset of {0,...,n-1} in lexicographic order.
// Returns false once the last subset has been passed.
inline bool next_subset(std::vector<int>& s, int n) {
  const int k = static_cast<int>(s.size());
  int i = k - 1;
  while (i >= 0 && s[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++s[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) {
    s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
  }
  return true;
}

// Binomial coefficient, saturating at uint64 max.
inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t factor = static_cast<std::uint64_t>(n - k + i);
    if (result > std::numeric_limits<std::uint64_t>::max() / factor) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * factor / static_cast<std::uint64_t>(i);
  }
  return result;
}

}  // namespace spaceiv
