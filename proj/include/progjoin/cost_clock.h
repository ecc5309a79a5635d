#pragma once

#include <cstddef>
#include <cstdint>

namespace progjoin {

// Cost units charged per event. The defaults price a page read relative to
// the number of tuples it carries: one unit per tuple for a sequential page,
// four per tuple for a random page, one unit per predicate evaluation.
struct CostWeights {
  double probe = 1.0;
  double seq_page = 1.0;
  double rand_page = 4.0;

  static CostWeights ForPartitionSize(std::size_t partition_size) {
    const auto ps = static_cast<double>(partition_size);
    return {1.0, ps, 4.0 * ps};
  }
};

// Deterministic stand-in for wall time. Counters only ever increase.
struct CostClock {
  std::uint64_t probes = 0;
  std::uint64_t seq_pages = 0;
  std::uint64_t rand_pages = 0;
  CostWeights weights;

  CostClock() = default;
  explicit CostClock(CostWeights w) : weights(w) {}

  double Total() const {
    return weights.probe * static_cast<double>(probes) +
           weights.seq_page * static_cast<double>(seq_pages) +
           weights.rand_page * static_cast<double>(rand_pages);
  }
};

}  // namespace progjoin
