#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "progjoin/osl.h"

namespace progjoin {

struct CollabRun {
  RunStats stats;
  std::vector<RewardEntry> r_table;
  std::vector<RewardEntry> s_table;
  std::size_t s_exploitations = 0;
  std::size_t final_pool_size = 0;  // ICL only
};

// Interleaved collaborative learning. Odd super-rounds explore R with S as the
// sampler, even ones explore S with R as the sampler; each ends with the
// explorer exploiting its argmax. One dedup ledger serves both sides.
CollabRun RunCl(const RelationStore& r, const RelationStore& s,
                const JoinPredicate& pred, std::size_t k,
                const OslParams& params, CostClock& clock, ResultStream& sink);

// S partitions whose outcomes against R's uniform first-N probes are used to
// simulate N-Failure for S without extra joins.
class IclPool {
 public:
  struct Ledger {
    std::uint64_t successes = 0;
    std::uint64_t failures = 0;
    std::uint64_t observations = 0;
    bool exploited = false;
  };

  IclPool(std::size_t s_partitions, std::size_t initial, std::size_t extension,
          std::size_t failure_budget, std::size_t r_partitions);

  std::size_t size() const { return size_; }
  std::size_t extension() const { return extension_; }
  bool Contains(std::size_t s_addr) const { return s_addr < size_; }
  const Ledger& ledger(std::size_t s_addr) const { return ledgers_[s_addr]; }

  // Simulated N-Failure finished: N failures seen, or every R partition has
  // been observed against it.
  bool Completed(std::size_t s_addr) const;
  std::size_t CompletedUnexploited() const;
  // Completed unexploited address with the most successes, lowest address on
  // ties; s_partitions when there is none.
  std::size_t BestCompleted() const;

  void MarkExploited(std::size_t s_addr) { ledgers_[s_addr].exploited = true; }
  // Grows the pool by the extension size, capped at the S partition count.
  void Extend();

  friend void HarvestObservation(IclPool& pool, std::size_t s_addr,
                                 bool r_was_uniform_draw,
                                 std::uint64_t successes, std::uint64_t probes,
                                 std::uint64_t nonzero_probes);

 private:
  std::size_t s_partitions_;
  std::size_t size_;
  std::size_t extension_;
  std::size_t failure_budget_;
  std::size_t r_partitions_;
  std::vector<Ledger> ledgers_;
};

// Records `probes` probes of s_addr that produced `successes` results in
// total, `nonzero_probes` of them producing at least one. Ignored unless
// s_addr is in the pool and the probes came from a uniform first-N draw.
void HarvestObservation(IclPool& pool, std::size_t s_addr,
                        bool r_was_uniform_draw, std::uint64_t successes,
                        std::uint64_t probes, std::uint64_t nonzero_probes);

// Implicit collaborative learning: R runs OSL while its exploration sampler
// cycles within the pool; S exploits its best completed pool address once
// ceil(sqrt(R partitions)) addresses are complete, then the pool grows by 2N.
CollabRun RunIcl(const RelationStore& r, const RelationStore& s,
                 const JoinPredicate& pred, std::size_t k,
                 const OslParams& params, CostClock& clock,
                 ResultStream& sink);

// `round,explorer,explored_addr,reward,exploited_addr,results_so_far,cost`;
// absent addresses are left empty.
void WriteRoundTrace(std::ostream& out,
                     std::span<const SuperRoundRecord> rounds);

}  // namespace progjoin
