#include "progjoin/baselines.h"

#include <cmath>
#include <optional>
#include <vector>

#include "progjoin/error.h"

namespace progjoin {

void RunNestedLoop(const RelationStore& r, const RelationStore& s,
                   const JoinPredicate& pred, std::size_t k, CostClock& clock,
                   ResultStream& sink) {
  RunBlockNestedLoop(r, s, pred, k, 1, clock, sink);
}

void RunBlockNestedLoop(const RelationStore& r, const RelationStore& s,
                        const JoinPredicate& pred, std::size_t k,
                        std::size_t block, CostClock& clock,
                        ResultStream& sink) {
  if (block == 0) throw DomainError("block size must be at least 1");
  sink.set_limit(k);
  DedupLedger ledger(r.partition_count());
  ScanCursor outer;
  std::vector<const Partition*> chunk;
  while (!sink.full()) {
    chunk.clear();
    while (chunk.size() < block) {
      const Partition* pr = SequentialNext(r, outer, clock);
      if (pr == nullptr) break;
      chunk.push_back(pr);
    }
    if (chunk.empty()) return;
    ScanCursor inner;
    while (!sink.full()) {
      const Partition* ps = SequentialNext(s, inner, clock);
      if (ps == nullptr) break;
      for (const Partition* pr : chunk) {
        if (sink.full()) return;
        ProbePartitions(*pr, *ps, pred, ledger, clock, sink);
      }
    }
  }
}

RippleOutcome RunRipple(const RelationStore& r, const RelationStore& s,
                        const JoinPredicate& pred, std::size_t k,
                        std::size_t mem_cap, CostClock& clock,
                        ResultStream& sink) {
  if (mem_cap < 2) throw DomainError("ripple mem_cap must be at least 2");
  sink.set_limit(k);
  DedupLedger ledger(r.partition_count());
  ScanCursor rc;
  ScanCursor sc;
  std::vector<const Partition*> held_r;
  std::vector<const Partition*> held_s;
  RippleOutcome out;
  auto finish = [&](RippleStatus status) {
    out.status = status;
    out.results = sink.size();
    out.cost = clock.Total();
    out.retained = held_r.size() + held_s.size();
    return out;
  };

  while (true) {
    if (sink.full()) return finish(RippleStatus::kReachedK);
    const bool more_r = rc.position < r.partition_count();
    const bool more_s = sc.position < s.partition_count();
    if (!more_r && !more_s) return finish(RippleStatus::kCompleted);
    const std::size_t next_held = held_r.size() + held_s.size() +
                                  (more_r ? 1 : 0) + (more_s ? 1 : 0);
    if (next_held > mem_cap) return finish(RippleStatus::kOutOfMemory);

    if (more_r) {
      const Partition* pr = SequentialNext(r, rc, clock);
      held_r.push_back(pr);
      for (const Partition* ps : held_s) {
        if (sink.full()) return finish(RippleStatus::kReachedK);
        ProbePartitions(*pr, *ps, pred, ledger, clock, sink);
      }
    }
    if (more_s) {
      const Partition* ps = SequentialNext(s, sc, clock);
      held_s.push_back(ps);
      for (const Partition* pr : held_r) {
        if (sink.full()) return finish(RippleStatus::kReachedK);
        ProbePartitions(*pr, *ps, pred, ledger, clock, sink);
      }
    }
  }
}

namespace {

struct ArmState {
  double total = 0.0;
  std::uint64_t trials = 0;
  IntervalSet joined;
};

}  // namespace

void RunUcbScan(const RelationStore& r, const RelationStore& s,
                const JoinPredicate& pred, std::size_t k, CostClock& clock,
                ResultStream& sink) {
  sink.set_limit(k);
  const std::size_t n_r = r.partition_count();
  const std::size_t n_s = s.partition_count();
  if (n_r == 0 || n_s == 0) return;
  DedupLedger ledger(n_r);
  std::vector<ArmState> arms(n_r);
  std::uint64_t t = 0;

  auto probe = [&](const Partition& pr, const Partition& ps) {
    const ProbeOutcome out = ProbePartitions(pr, ps, pred, ledger, clock, sink);
    if (!out.complete || out.skipped) return false;
    ArmState& arm = arms[pr.index];
    arm.joined.Insert(ps.index);
    arm.total += static_cast<double>(out.results);
    ++arm.trials;
    ++t;
    return true;
  };

  ScanCursor rc;
  ScanCursor sc;
  sc.wrap_enabled = true;
  while (const Partition* pr = SequentialNext(r, rc, clock)) {
    if (sink.full()) return;
    const Partition* ps = SequentialNext(s, sc, clock);
    probe(*pr, *ps);
  }

  while (!sink.full()) {
    std::optional<std::size_t> best;
    double best_index = 0.0;
    const double log_t = std::log(static_cast<double>(t));
    for (std::size_t a = 0; a < n_r; ++a) {
      const ArmState& arm = arms[a];
      if (arm.joined.Covers(n_s)) continue;
      const double trials = static_cast<double>(arm.trials);
      const double index =
          arm.total / trials + std::sqrt(2.0 * log_t / trials);
      if (!best || index > best_index) {
        best = a;
        best_index = index;
      }
    }
    if (!best) return;
    const Partition& pr = RandomAccess(r, *best, clock);
    const std::size_t next = arms[*best].joined.NextMissing(0, n_s);
    const Partition& ps = RandomAccess(s, next, clock);
    probe(pr, ps);
  }
}

}  // namespace progjoin
