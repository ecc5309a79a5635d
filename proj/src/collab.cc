#include "progjoin/collab.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "progjoin/error.h"

namespace progjoin {

namespace {

std::size_t CeilSqrt(std::size_t n) {
  const auto root = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(n)) - 1e-9));
  return std::max<std::size_t>(root, 1);
}

// Fills the probe/failure columns of a record from the stats logs.
void CloseRound(SuperRoundRecord& rec, const RunStats& stats,
                std::size_t explore_mark, std::size_t exploit_mark,
                const ResultStream& sink, const CostClock& clock) {
  auto misses = [](const std::vector<bool>& log, std::size_t from) {
    return static_cast<std::uint64_t>(
        std::count(log.begin() + static_cast<std::ptrdiff_t>(from), log.end(),
                   false));
  };
  rec.results_so_far = sink.size();
  rec.cost = clock.Total();
  rec.probes = (stats.explore_log.size() - explore_mark) +
               (stats.exploit_log.size() - exploit_mark);
  rec.failures = misses(stats.explore_log, explore_mark) +
                 misses(stats.exploit_log, exploit_mark);
}

// Cycles sequentially through the pool's S partitions.
class PoolSource : public PartitionSource {
 public:
  PoolSource(const RelationStore& s, const IclPool& pool)
      : s_(s), pool_(pool) {}

  const Partition* Next(CostClock& clock) override {
    if (pool_.size() == 0) return nullptr;
    if (position_ >= pool_.size()) position_ = 0;
    ScanCursor cursor;
    cursor.position = position_++;
    return SequentialNext(s_, cursor, clock);
  }
  bool Exhausted(const IntervalSet& joined) const override {
    return joined.NextMissing(0, pool_.size()) == pool_.size();
  }

 private:
  const RelationStore& s_;
  const IclPool& pool_;
  std::size_t position_ = 0;
};

}  // namespace

CollabRun RunCl(const RelationStore& r, const RelationStore& s,
                const JoinPredicate& pred, std::size_t k,
                const OslParams& params, CostClock& clock, ResultStream& sink) {
  CollabRun run;
  sink.set_limit(k);
  DedupLedger ledger(r.partition_count());
  JoinContext ctx{r, s, pred, ledger, clock, sink};
  ScanLearner r_side(ctx, Side::kR, params, run.stats);
  ScanLearner s_side(ctx, Side::kS, params, run.stats);
  CursorSource s_sampler(s);
  CursorSource r_sampler(r);
  bool r_first = true;
  bool s_first = true;

  // Either side fully exploited means every partition pair has been probed.
  while (!ctx.Done() && !r_side.Finished() && !s_side.Finished()) {
    SuperRoundRecord rec;
    rec.round = run.stats.rounds.size() + 1;
    rec.explorer = rec.round % 2 == 1 ? Side::kR : Side::kS;
    ScanLearner& learner = rec.explorer == Side::kR ? r_side : s_side;
    PartitionSource& sampler =
        rec.explorer == Side::kR ? static_cast<PartitionSource&>(s_sampler)
                                 : static_cast<PartitionSource&>(r_sampler);
    bool& first = rec.explorer == Side::kR ? r_first : s_first;
    const std::size_t explore_mark = run.stats.explore_log.size();
    const std::size_t exploit_mark = run.stats.exploit_log.size();
    const std::uint64_t evals_before = run.stats.explore_evaluations;

    const std::size_t to_explore = first ? learner.window() : 1;
    first = false;
    for (std::size_t i = 0; i < to_explore && !ctx.Done(); ++i) {
      auto idx = learner.ExploreNext(sampler);
      if (!idx) break;
      rec.explored = learner.table()[*idx].address;
      rec.reward = learner.table()[*idx].successes;
    }
    if (rec.explorer == Side::kS) {
      run.stats.s_side_learning_evaluations +=
          run.stats.explore_evaluations - evals_before;
    }
    if (!ctx.Done()) {
      if (auto pick = learner.PickArgmax()) {
        rec.exploited = learner.table()[*pick].address;
        if (auto done = learner.ExploitWithSwaps(*pick)) {
          rec.exploited = learner.table()[*done].address;
        }
      }
    }
    CloseRound(rec, run.stats, explore_mark, exploit_mark, sink, clock);
    run.stats.rounds.push_back(rec);
  }
  run.r_table = r_side.table();
  run.s_table = s_side.table();
  return run;
}

IclPool::IclPool(std::size_t s_partitions, std::size_t initial,
                 std::size_t extension, std::size_t failure_budget,
                 std::size_t r_partitions)
    : s_partitions_(s_partitions),
      size_(std::min(initial, s_partitions)),
      extension_(extension),
      failure_budget_(failure_budget),
      r_partitions_(r_partitions),
      ledgers_(s_partitions) {
  if (failure_budget == 0) throw DomainError("N must be at least 1");
}

bool IclPool::Completed(std::size_t s_addr) const {
  const Ledger& l = ledgers_[s_addr];
  return l.failures >= failure_budget_ || l.observations >= r_partitions_;
}

std::size_t IclPool::CompletedUnexploited() const {
  std::size_t n = 0;
  for (std::size_t a = 0; a < size_; ++a) {
    if (!ledgers_[a].exploited && Completed(a)) ++n;
  }
  return n;
}

std::size_t IclPool::BestCompleted() const {
  std::size_t best = s_partitions_;
  for (std::size_t a = 0; a < size_; ++a) {
    if (ledgers_[a].exploited || !Completed(a)) continue;
    if (best == s_partitions_ ||
        ledgers_[a].successes > ledgers_[best].successes) {
      best = a;
    }
  }
  return best;
}

void IclPool::Extend() {
  size_ = std::min(size_ + extension_, s_partitions_);
}

void HarvestObservation(IclPool& pool, std::size_t s_addr,
                        bool r_was_uniform_draw, std::uint64_t successes,
                        std::uint64_t probes, std::uint64_t nonzero_probes) {
  if (!r_was_uniform_draw || !pool.Contains(s_addr)) return;
  IclPool::Ledger& l = pool.ledgers_[s_addr];
  l.successes += successes;
  l.failures += probes - std::min(probes, nonzero_probes);
  l.observations += probes;
}

CollabRun RunIcl(const RelationStore& r, const RelationStore& s,
                 const JoinPredicate& pred, std::size_t k,
                 const OslParams& params, CostClock& clock,
                 ResultStream& sink) {
  CollabRun run;
  sink.set_limit(k);
  DedupLedger ledger(r.partition_count());
  JoinContext ctx{r, s, pred, ledger, clock, sink};
  const std::size_t threshold = CeilSqrt(r.partition_count());
  IclPool pool(s.partition_count(), threshold, 2 * params.failure_budget,
               params.failure_budget, r.partition_count());

  auto harvest = [&](const ProbeEvent& ev) {
    HarvestObservation(pool, ev.other,
                       ev.phase == ProbePhase::kExploreInitial, ev.results, 1,
                       ev.results > 0 ? 1 : 0);
  };
  ScanLearner r_side(ctx, Side::kR, params, run.stats, harvest);
  PoolSource sampler(s, pool);

  // S-side entries exist only once S exploits them.
  std::vector<RewardEntry> s_table;

  bool first = true;
  while (!ctx.Done() && !r_side.Finished()) {
    SuperRoundRecord rec;
    rec.round = run.stats.rounds.size() + 1;
    const std::size_t explore_mark = run.stats.explore_log.size();
    const std::size_t exploit_mark = run.stats.exploit_log.size();
    const std::size_t to_explore = first ? r_side.window() : 1;
    first = false;
    for (std::size_t i = 0; i < to_explore && !ctx.Done(); ++i) {
      auto idx = r_side.ExploreNext(sampler);
      if (!idx) break;
      rec.explored = r_side.table()[*idx].address;
      rec.reward = r_side.table()[*idx].successes;
    }
    if (!ctx.Done()) {
      if (auto pick = r_side.PickArgmax()) {
        rec.exploited = r_side.table()[*pick].address;
        if (auto done = r_side.ExploitWithSwaps(*pick)) {
          rec.exploited = r_side.table()[*done].address;
        }
      }
    }
    CloseRound(rec, run.stats, explore_mark, exploit_mark, sink, clock);
    run.stats.rounds.push_back(rec);

    while (!ctx.Done() && pool.CompletedUnexploited() >= threshold) {
      const std::size_t addr = pool.BestCompleted();
      SuperRoundRecord srec;
      srec.round = run.stats.rounds.size() + 1;
      srec.explorer = Side::kS;
      srec.exploited = addr;
      srec.reward = pool.ledger(addr).successes;
      const std::size_t s_explore_mark = run.stats.explore_log.size();
      const std::size_t s_exploit_mark = run.stats.exploit_log.size();

      RewardEntry entry;
      entry.address = addr;
      entry.successes = pool.ledger(addr).successes;
      entry.trials = pool.ledger(addr).observations;
      entry.explore_order = s_table.size();
      s_table.push_back(std::move(entry));
      const ExploitOutcome out =
          Exploit(ctx, Side::kS, s_table, s_table.size() - 1, false, run.stats);
      CloseRound(srec, run.stats, s_explore_mark, s_exploit_mark, sink, clock);
      run.stats.rounds.push_back(srec);
      if (out.status != ExploitStatus::kCompleted) break;
      pool.MarkExploited(addr);
      ++run.s_exploitations;
      pool.Extend();
    }
  }
  run.r_table = r_side.table();
  run.s_table = std::move(s_table);
  run.final_pool_size = pool.size();
  return run;
}

void WriteRoundTrace(std::ostream& out,
                     std::span<const SuperRoundRecord> rounds) {
  auto opt = [](const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  char cost[64];
  for (const auto& rec : rounds) {
    std::snprintf(cost, sizeof cost, "%.17g", rec.cost);
    out << rec.round << ',' << SideName(rec.explorer) << ','
        << opt(rec.explored) << ',' << rec.reward << ','
        << opt(rec.exploited) << ',' << rec.results_so_far << ',' << cost
        << '\n';
  }
}

}  // namespace progjoin
