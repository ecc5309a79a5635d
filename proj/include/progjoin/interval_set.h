#pragma once

#include <cstddef>
#include <iterator>
#include <map>

namespace progjoin {

// Set of non-negative integers stored as disjoint, non-adjacent half-open
// runs [begin, end). Partition addresses probed in scan order collapse into a
// handful of runs.
class IntervalSet {
 public:
  bool Contains(std::size_t x) const {
    auto it = runs_.upper_bound(x);
    if (it == runs_.begin()) return false;
    --it;
    return x < it->second;
  }

  // Returns false if x was already present.
  bool Insert(std::size_t x) {
    if (Contains(x)) return false;
    std::size_t begin = x;
    std::size_t end = x + 1;
    auto next = runs_.find(end);
    if (next != runs_.end()) {
      end = next->second;
      runs_.erase(next);
    }
    auto it = runs_.lower_bound(x);
    if (it != runs_.begin()) {
      auto prev = std::prev(it);
      if (prev->second == x) {
        prev->second = end;
        ++size_;
        return true;
      }
    }
    runs_.emplace(begin, end);
    ++size_;
    return true;
  }

  // Smallest y >= from that is not in the set, or `limit` if none below it.
  std::size_t NextMissing(std::size_t from, std::size_t limit) const {
    std::size_t y = from;
    auto it = runs_.upper_bound(y);
    if (it != runs_.begin()) {
      auto prev = std::prev(it);
      if (y < prev->second) y = prev->second;
    }
    return y < limit ? y : limit;
  }

  // True when every integer in [0, n) is present.
  bool Covers(std::size_t n) const {
    if (n == 0) return true;
    if (runs_.empty()) return false;
    const auto& first = *runs_.begin();
    return first.first == 0 && first.second >= n;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::size_t run_count() const { return runs_.size(); }

 private:
  std::map<std::size_t, std::size_t> runs_;
  std::size_t size_ = 0;
};

}  // namespace progjoin
