#pragma once

#include <cstddef>

#include "progjoin/engine.h"

namespace progjoin {

// Every R partition in order against every S partition in order.
void RunNestedLoop(const RelationStore& r, const RelationStore& s,
                   const JoinPredicate& pred, std::size_t k, CostClock& clock,
                   ResultStream& sink);

// Outer chunks of `block` R partitions; one sequential S scan per chunk.
void RunBlockNestedLoop(const RelationStore& r, const RelationStore& s,
                        const JoinPredicate& pred, std::size_t k,
                        std::size_t block, CostClock& clock,
                        ResultStream& sink);

enum class RippleStatus { kCompleted, kReachedK, kOutOfMemory };

struct RippleOutcome {
  RippleStatus status = RippleStatus::kCompleted;
  std::size_t results = 0;
  double cost = 0.0;
  std::size_t retained = 0;  // partitions held when the run ended
};

// Square nested-loop ripple join. Step n reads the n-th partition of each
// relation, probes each against everything retained from the other side, and
// keeps both. Fails with kOutOfMemory when it would retain more than
// `mem_cap` partitions.
RippleOutcome RunRipple(const RelationStore& r, const RelationStore& s,
                        const JoinPredicate& pred, std::size_t k,
                        std::size_t mem_cap, CostClock& clock,
                        ResultStream& sink);

// One sequential pass of R pairing each partition with the next S partition,
// then UCB1 selection (mean + sqrt(2 ln t / trials), ties to the lowest
// address) over the R partitions that still have unprobed S partitions.
// Selected partitions and their next S partition are read by random access.
void RunUcbScan(const RelationStore& r, const RelationStore& s,
                const JoinPredicate& pred, std::size_t k, CostClock& clock,
                ResultStream& sink);

}  // namespace progjoin
