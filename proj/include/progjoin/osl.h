#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "progjoin/datagen.h"
#include "progjoin/engine.h"

namespace progjoin {

struct OslParams {
  // N: an exploration stops after this many zero-result probes (cumulative).
  std::size_t failure_budget = 10;
  // M: entries gathered before the first exploitation. 0 picks
  // ceil(sqrt(partition count of the sampled relation)).
  std::size_t window = 0;
  // Keep re-estimating the exploited entry and switch when it falls behind.
  bool swap_enabled = true;
  std::uint64_t seed = 0;

  std::size_t WindowFor(std::size_t sampled_partitions) const;
};

struct RewardEntry {
  std::size_t address = 0;
  std::uint64_t successes = 0;  // join results produced by this entry
  std::uint64_t trials = 0;     // opposite partitions probed against it
  IntervalSet joined;           // opposite partitions already probed
  bool exploited = false;
  std::uint64_t explore_order = 0;

  // Laplace-smoothed results per probe.
  double SmoothedRate() const {
    return (static_cast<double>(successes) + 1.0) /
           (static_cast<double>(trials) + 2.0);
  }
};

enum class ProbePhase {
  kExploreInitial,   // first N probes of an exploration
  kExploreContinue,  // further exploration probes
  kExploit,
};

struct ProbeEvent {
  Side explorer = Side::kR;
  ProbePhase phase = ProbePhase::kExploreInitial;
  std::size_t own = 0;    // address on the learning side
  std::size_t other = 0;  // address on the sampled side
  std::size_t results = 0;
  std::uint64_t tuple_pairs = 0;
  std::size_t step = 0;   // 0-based probe index within the exploration
  const RewardEntry* entry = nullptr;
};

using ProbeObserver = std::function<void(const ProbeEvent&)>;

struct SuperRoundRecord {
  std::size_t round = 0;
  Side explorer = Side::kR;
  std::optional<std::size_t> explored;
  std::uint64_t reward = 0;
  std::optional<std::size_t> exploited;
  std::size_t results_so_far = 0;
  double cost = 0.0;
  std::uint64_t probes = 0;    // partition pairs probed in the round
  std::uint64_t failures = 0;  // of which produced nothing
};

struct RunStats {
  // Predicate evaluations by phase.
  std::uint64_t explore_evaluations = 0;
  std::uint64_t exploit_evaluations = 0;
  // Evaluations spent only to teach the sampled side (ICL keeps this at 0).
  std::uint64_t s_side_learning_evaluations = 0;
  // One entry per partition-pair probe: produced at least one result?
  std::vector<bool> explore_log;
  std::vector<bool> exploit_log;
  std::vector<SuperRoundRecord> rounds;
};

// Supplies partitions of the relation that is being sampled, not learned.
class PartitionSource {
 public:
  virtual ~PartitionSource() = default;
  // nullptr only when there is nothing at all to supply.
  virtual const Partition* Next(CostClock& clock) = 0;
  // True once every partition this source can supply is in `joined`.
  virtual bool Exhausted(const IntervalSet& joined) const = 0;
};

// Wrapping sequential scan over a whole relation.
class CursorSource : public PartitionSource {
 public:
  explicit CursorSource(const RelationStore& store) : store_(store) {
    cursor_.wrap_enabled = true;
  }

  const Partition* Next(CostClock& clock) override {
    return SequentialNext(store_, cursor_, clock);
  }
  bool Exhausted(const IntervalSet& joined) const override {
    return joined.Covers(store_.partition_count());
  }
  const ScanCursor& cursor() const { return cursor_; }

 private:
  const RelationStore& store_;
  ScanCursor cursor_;
};

// N-Failure reward estimation of one partition of the `explorer` side. Stops
// after `failure_budget` zero-result probes, when `source` has nothing new for
// this partition, or when the sink is full.
RewardEntry NFailure(JoinContext& ctx, Side explorer, const Partition& own,
                     PartitionSource& source, std::size_t failure_budget,
                     RunStats& stats, const ProbeObserver& observer = {});

// Unexploited entry with the most successes; ties go to the lowest address.
std::optional<std::size_t> ArgmaxReward(std::span<const RewardEntry> table);

enum class ExploitStatus { kCompleted, kPaused, kStopped };

struct ExploitOutcome {
  ExploitStatus status = ExploitStatus::kCompleted;
  std::size_t results = 0;
  // Set when paused: the unexploited entry with the best smoothed rate.
  std::optional<std::size_t> swap_to;
};

// Joins table[index] with every opposite partition not yet in its `joined`
// set, scanning the opposite relation from the start. With swapping on, it
// pauses as soon as the entry's smoothed rate drops strictly below the best
// other unexploited entry's; at least one probe is made per call.
ExploitOutcome Exploit(JoinContext& ctx, Side explorer,
                       std::vector<RewardEntry>& table, std::size_t index,
                       bool swap_enabled, RunStats& stats,
                       const ProbeObserver& observer = {});

// One learning scan: sequential exploration of fresh partitions plus a reward
// table. Shared by OSL, ROSL and the collaborative strategies.
class ScanLearner {
 public:
  ScanLearner(JoinContext& ctx, Side side, const OslParams& params,
              RunStats& stats, ProbeObserver observer = {});

  Side side() const { return side_; }
  std::size_t window() const { return window_; }
  std::vector<RewardEntry>& table() { return table_; }
  const std::vector<RewardEntry>& table() const { return table_; }
  std::size_t unexplored() const;
  bool HasFresh() const { return unexplored() > 0; }
  bool HasUnexploited() const;
  // Every partition of this side has been explored and fully exploited.
  bool Finished() const { return !HasFresh() && !HasUnexploited(); }

  // Sequentially reads the next fresh partition and runs N-Failure on it.
  // Returns the new table index, or nullopt when the side is exhausted.
  std::optional<std::size_t> ExploreNext(PartitionSource& source);

  // ArgmaxReward, falling back to the most recently explored unexploited
  // entry when every candidate has zero successes.
  std::optional<std::size_t> PickArgmax() const;

  ExploitOutcome Exploit(std::size_t index);

  // Exploits `first`, following swaps until one entry completes.
  std::optional<std::size_t> ExploitWithSwaps(std::size_t first);

 private:
  JoinContext& ctx_;
  Side side_;
  OslParams params_;
  std::size_t window_;
  RunStats& stats_;
  ProbeObserver observer_;
  ScanCursor explore_cursor_;
  std::vector<RewardEntry> table_;
};

struct OslRun {
  RunStats stats;
};

// Super-round loop: explore (M entries the first time, one fresh entry
// afterwards), exploit the argmax, repeat until k results or completion.
OslRun RunOsl(const RelationStore& r, const RelationStore& s,
              const JoinPredicate& pred, std::size_t k, const OslParams& params,
              CostClock& clock, ResultStream& sink);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t m_star = 1;
  // s_count - sqrt(s_count); stated for a = 0, b = 1 only.
  std::optional<double> probes_per_super_round;
};

// Expected per-super-round failure proportion bounds for rewards ~ U[a, b].
Bounds TheoreticalBounds(double a, double b, std::size_t s_count);

struct MRunSimulation {
  double mean_failure_proportion = 0.0;
  std::vector<double> per_round;
};

// Independent super-rounds of N-Failure + M-Run on an abstract reward model.
// Each super-round spends exactly model.trials_per_action() pulls on M fresh
// actions and the exploitation of the best of them.
MRunSimulation SimulateMRun(const BernoulliModel& model,
                            std::size_t failure_budget, std::size_t window,
                            std::size_t super_rounds, std::uint64_t seed);

}  // namespace progjoin
