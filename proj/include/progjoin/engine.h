#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "progjoin/cost_clock.h"
#include "progjoin/interval_set.h"
#include "progjoin/storage.h"

namespace progjoin {

enum class PredicateKind { kKeyEquality, kEditDistanceLe1, kCustom };

// Black-box join predicate. Strategies only ever see the boolean answer.
class JoinPredicate {
 public:
  using Fn = std::function<bool(const Tuple&, const Tuple&)>;

  static JoinPredicate KeyEquality() {
    return JoinPredicate(PredicateKind::kKeyEquality, {});
  }
  static JoinPredicate EditDistanceLe1() {
    return JoinPredicate(PredicateKind::kEditDistanceLe1, {});
  }
  // `fn` must be deterministic.
  static JoinPredicate Custom(Fn fn) {
    return JoinPredicate(PredicateKind::kCustom, std::move(fn));
  }

  PredicateKind kind() const { return kind_; }

  // Without touching any clock. Throws ConfigError on missing skeys.
  bool Matches(const Tuple& r, const Tuple& s) const;

 private:
  JoinPredicate(PredicateKind kind, Fn fn) : kind_(kind), fn_(std::move(fn)) {}

  PredicateKind kind_;
  Fn fn_;
};

// One predicate evaluation: clock.probes += 1.
bool Evaluate(const JoinPredicate& pred, const Tuple& r, const Tuple& s,
              CostClock& clock);

struct JoinResult {
  std::uint32_t r_address = 0;
  std::uint32_t r_offset = 0;
  std::uint32_t s_address = 0;
  std::uint32_t s_offset = 0;
  double cost_stamp = 0.0;

  friend bool operator==(const JoinResult&, const JoinResult&) = default;
};

// Ordered output of a run. Emission stops once `limit` results are held.
class ResultStream {
 public:
  explicit ResultStream(
      std::size_t limit = std::numeric_limits<std::size_t>::max())
      : limit_(limit) {}

  void set_limit(std::size_t limit) { limit_ = limit; }
  std::size_t limit() const { return limit_; }
  bool full() const { return results_.size() >= limit_; }
  std::size_t size() const { return results_.size(); }
  std::span<const JoinResult> results() const { return results_; }

  void Emit(const JoinResult& r) { results_.push_back(r); }

  std::vector<double> CostStamps() const;

 private:
  std::size_t limit_;
  std::vector<JoinResult> results_;
};

// Per R partition, the S partitions already fully probed against it.
class DedupLedger {
 public:
  explicit DedupLedger(std::size_t r_partitions = 0) : probed_(r_partitions) {}

  bool Contains(std::size_t r, std::size_t s) const {
    return r < probed_.size() && probed_[r].Contains(s);
  }
  bool Record(std::size_t r, std::size_t s);
  const IntervalSet& ProbedFor(std::size_t r) const { return probed_[r]; }
  std::uint64_t pair_count() const { return pairs_; }

 private:
  std::vector<IntervalSet> probed_;
  std::uint64_t pairs_ = 0;
};

struct ProbeOutcome {
  std::size_t results = 0;
  std::uint64_t probes = 0;
  // The pair was already in the ledger; nothing was evaluated.
  bool skipped = false;
  // False when the sink filled up part-way through the pair.
  bool complete = true;
};

// Nested-loop probe of one R partition against one S partition. Matches are
// stamped with the clock total right after their own evaluation. A pair is
// recorded in the ledger only when every tuple pair was evaluated.
ProbeOutcome ProbePartitions(const Partition& pr, const Partition& ps,
                             const JoinPredicate& pred, DedupLedger& ledger,
                             CostClock& clock, ResultStream& sink);

// Sum over i = 1..l of gamma^i * stamps[i-1].
double DiscountedAverage(std::span<const double> stamps, double gamma);

// Fraction of false entries; 0 for an empty log.
double FailureProportion(const std::vector<bool>& probe_log);

// `r_addr,r_off,s_addr,s_off,cost_stamp`, one result per line.
void WriteResultStream(std::ostream& out, const ResultStream& stream);

enum class Side { kR, kS };

inline Side Opposite(Side side) { return side == Side::kR ? Side::kS : Side::kR; }
inline const char* SideName(Side side) { return side == Side::kR ? "R" : "S"; }

// Everything a strategy needs to execute probes for one run. Single-owner.
struct JoinContext {
  const RelationStore& r;
  const RelationStore& s;
  const JoinPredicate& pred;
  DedupLedger& ledger;
  CostClock& clock;
  ResultStream& sink;
  // Optional external stop request, checked alongside the sink.
  const bool* halt = nullptr;

  bool Done() const { return sink.full() || (halt != nullptr && *halt); }

  const RelationStore& Store(Side side) const {
    return side == Side::kR ? r : s;
  }

  // Probe with `explorer` on the given side; the ledger is keyed (r, s).
  ProbeOutcome Probe(Side explorer, const Partition& own,
                     const Partition& other) {
    return explorer == Side::kR
               ? ProbePartitions(own, other, pred, ledger, clock, sink)
               : ProbePartitions(other, own, pred, ledger, clock, sink);
  }

  bool Probed(Side explorer, std::size_t own, std::size_t other) const {
    return explorer == Side::kR ? ledger.Contains(own, other)
                                : ledger.Contains(other, own);
  }
};

}  // namespace progjoin
