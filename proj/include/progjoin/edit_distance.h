#pragma once

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <utility>

namespace progjoin {

// Levenshtein(a, b) <= 1 in a single linear pass: equal strings, one
// substitution (same length), or one insertion/deletion (length differs by 1).
inline bool WithinEditDistanceOne(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  if (la - lb > 1) return false;
  std::size_t i = 0;
  while (i < lb && a[i] == b[i]) ++i;
  if (i == lb) return true;  // equal, or a has one extra trailing char
  // Skip the differing character of a; for equal lengths skip b's as well.
  const std::size_t j = la == lb ? i + 1 : i;
  return std::equal(a.begin() + static_cast<std::ptrdiff_t>(i + 1), a.end(),
                    b.begin() + static_cast<std::ptrdiff_t>(j), b.end());
}

}  // namespace progjoin
