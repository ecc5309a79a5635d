#include "progjoin/osl.h"

#include <algorithm>
#include <cmath>

#include "progjoin/error.h"

namespace progjoin {

std::size_t OslParams::WindowFor(std::size_t sampled_partitions) const {
  if (window > 0) return window;
  const auto root = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(sampled_partitions)) - 1e-9));
  return std::max<std::size_t>(root, 1);
}

RewardEntry NFailure(JoinContext& ctx, Side explorer, const Partition& own,
                     PartitionSource& source, std::size_t failure_budget,
                     RunStats& stats, const ProbeObserver& observer) {
  RewardEntry entry;
  entry.address = own.index;
  std::size_t failures = 0;
  std::size_t step = 0;
  while (failures < failure_budget && !ctx.Done()) {
    if (source.Exhausted(entry.joined)) break;
    const Partition* other = source.Next(ctx.clock);
    if (other == nullptr) break;
    if (entry.joined.Contains(other->index)) continue;
    if (ctx.Probed(explorer, own.index, other->index)) {
      // Joined earlier from the other side; not a trial for this entry.
      entry.joined.Insert(other->index);
      continue;
    }
    const ProbeOutcome out = ctx.Probe(explorer, own, *other);
    stats.explore_evaluations += out.probes;
    if (!out.complete) break;
    entry.joined.Insert(other->index);
    ++entry.trials;
    entry.successes += out.results;
    stats.explore_log.push_back(out.results > 0);
    if (out.results == 0) ++failures;
    if (observer) {
      observer({explorer,
                step < failure_budget ? ProbePhase::kExploreInitial
                                      : ProbePhase::kExploreContinue,
                own.index, other->index, out.results, out.probes, step,
                &entry});
    }
    ++step;
  }
  return entry;
}

std::optional<std::size_t> ArgmaxReward(std::span<const RewardEntry> table) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& e = table[i];
    if (e.exploited) continue;
    if (!best || e.successes > table[*best].successes ||
        (e.successes == table[*best].successes &&
         e.address < table[*best].address)) {
      best = i;
    }
  }
  return best;
}

ExploitOutcome Exploit(JoinContext& ctx, Side explorer,
                       std::vector<RewardEntry>& table, std::size_t index,
                       bool swap_enabled, RunStats& stats,
                       const ProbeObserver& observer) {
  const RelationStore& own_store = ctx.Store(explorer);
  const RelationStore& other_store = ctx.Store(Opposite(explorer));
  const std::size_t n_other = other_store.partition_count();

  // Rivals do not change while this entry is being exploited.
  std::optional<std::size_t> rival;
  double rival_rate = 0.0;
  if (swap_enabled) {
    for (std::size_t j = 0; j < table.size(); ++j) {
      if (j == index || table[j].exploited) continue;
      const double rate = table[j].SmoothedRate();
      if (!rival || rate > rival_rate ||
          (rate == rival_rate && table[j].address < table[*rival].address)) {
        rival = j;
        rival_rate = rate;
      }
    }
  }

  RewardEntry& entry = table[index];
  ExploitOutcome result;
  const Partition& own = RandomAccess(own_store, entry.address, ctx.clock);
  ScanCursor cursor;
  std::size_t pos = 0;
  while (true) {
    pos = entry.joined.NextMissing(pos, n_other);
    if (pos == n_other) {
      entry.exploited = true;
      result.status = ExploitStatus::kCompleted;
      return result;
    }
    if (ctx.Done()) {
      result.status = ExploitStatus::kStopped;
      return result;
    }
    cursor.position = pos;
    const Partition* other = SequentialNext(other_store, cursor, ctx.clock);
    if (ctx.Probed(explorer, entry.address, pos)) {
      entry.joined.Insert(pos);
      continue;
    }
    const ProbeOutcome out = ctx.Probe(explorer, own, *other);
    stats.exploit_evaluations += out.probes;
    if (!out.complete) {
      result.status = ExploitStatus::kStopped;
      return result;
    }
    entry.joined.Insert(pos);
    ++entry.trials;
    entry.successes += out.results;
    result.results += out.results;
    stats.exploit_log.push_back(out.results > 0);
    if (observer) {
      observer({explorer, ProbePhase::kExploit, entry.address, pos,
                out.results, out.probes, 0, &entry});
    }
    if (rival && entry.SmoothedRate() < rival_rate &&
        !entry.joined.Covers(n_other)) {
      result.status = ExploitStatus::kPaused;
      result.swap_to = rival;
      return result;
    }
  }
}

ScanLearner::ScanLearner(JoinContext& ctx, Side side, const OslParams& params,
                         RunStats& stats, ProbeObserver observer)
    : ctx_(ctx),
      side_(side),
      params_(params),
      window_(params.WindowFor(ctx.Store(Opposite(side)).partition_count())),
      stats_(stats),
      observer_(std::move(observer)) {
  if (params_.failure_budget == 0) {
    throw DomainError("failure budget N must be at least 1");
  }
}

std::size_t ScanLearner::unexplored() const {
  const std::size_t n = ctx_.Store(side_).partition_count();
  return n - std::min(n, explore_cursor_.position);
}

bool ScanLearner::HasUnexploited() const {
  return std::any_of(table_.begin(), table_.end(),
                     [](const RewardEntry& e) { return !e.exploited; });
}

std::optional<std::size_t> ScanLearner::ExploreNext(PartitionSource& source) {
  const Partition* own =
      SequentialNext(ctx_.Store(side_), explore_cursor_, ctx_.clock);
  if (own == nullptr) return std::nullopt;
  RewardEntry entry = NFailure(ctx_, side_, *own, source,
                               params_.failure_budget, stats_, observer_);
  entry.explore_order = table_.size();
  table_.push_back(std::move(entry));
  return table_.size() - 1;
}

std::optional<std::size_t> ScanLearner::PickArgmax() const {
  auto best = ArgmaxReward(table_);
  if (!best || table_[*best].successes > 0) return best;
  // Nothing has produced a result: take the partition still in memory.
  std::optional<std::size_t> latest;
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i].exploited) continue;
    if (!latest || table_[i].explore_order > table_[*latest].explore_order) {
      latest = i;
    }
  }
  return latest;
}

ExploitOutcome ScanLearner::Exploit(std::size_t index) {
  return progjoin::Exploit(ctx_, side_, table_, index, params_.swap_enabled,
                           stats_, observer_);
}

std::optional<std::size_t> ScanLearner::ExploitWithSwaps(std::size_t first) {
  std::size_t index = first;
  while (true) {
    const ExploitOutcome out = Exploit(index);
    switch (out.status) {
      case ExploitStatus::kCompleted:
        return index;
      case ExploitStatus::kStopped:
        return std::nullopt;
      case ExploitStatus::kPaused:
        index = *out.swap_to;
        break;
    }
  }
}

namespace {

std::uint64_t CountFailures(const std::vector<bool>& log, std::size_t from) {
  return static_cast<std::uint64_t>(
      std::count(log.begin() + static_cast<std::ptrdiff_t>(from), log.end(),
                 false));
}

}  // namespace

OslRun RunOsl(const RelationStore& r, const RelationStore& s,
              const JoinPredicate& pred, std::size_t k, const OslParams& params,
              CostClock& clock, ResultStream& sink) {
  OslRun run;
  sink.set_limit(k);
  DedupLedger ledger(r.partition_count());
  JoinContext ctx{r, s, pred, ledger, clock, sink};
  ScanLearner learner(ctx, Side::kR, params, run.stats);
  CursorSource source(s);

  bool first = true;
  while (!ctx.Done() && !learner.Finished()) {
    SuperRoundRecord rec;
    rec.round = run.stats.rounds.size();
    const std::size_t explore_mark = run.stats.explore_log.size();
    const std::size_t exploit_mark = run.stats.exploit_log.size();

    const std::size_t to_explore = first ? learner.window() : 1;
    first = false;
    for (std::size_t i = 0; i < to_explore && !ctx.Done(); ++i) {
      auto idx = learner.ExploreNext(source);
      if (!idx) break;
      rec.explored = learner.table()[*idx].address;
      rec.reward = learner.table()[*idx].successes;
    }
    if (!ctx.Done()) {
      if (auto pick = learner.PickArgmax()) {
        rec.exploited = learner.table()[*pick].address;
        if (auto done = learner.ExploitWithSwaps(*pick)) {
          rec.exploited = learner.table()[*done].address;
        }
      }
    }
    rec.results_so_far = sink.size();
    rec.cost = clock.Total();
    rec.probes = (run.stats.explore_log.size() - explore_mark) +
                 (run.stats.exploit_log.size() - exploit_mark);
    rec.failures = CountFailures(run.stats.explore_log, explore_mark) +
                   CountFailures(run.stats.exploit_log, exploit_mark);
    run.stats.rounds.push_back(rec);
  }
  return run;
}

Bounds TheoreticalBounds(double a, double b, std::size_t s_count) {
  if (!(a >= 0.0 && a <= b && b <= 1.0)) {
    throw DomainError("bounds require 0 <= a <= b <= 1");
  }
  if (s_count == 0) throw DomainError("bounds require s_count >= 1");
  const double s = static_cast<double>(s_count);
  Bounds out;
  out.lower = (1.0 - b) + (b - a) * std::sqrt(2.0 / s);
  out.upper = (1.0 - b) + 2.0 * std::sqrt((b - a) / s);
  const double m = std::ceil(std::sqrt(s * (b - a)) - 1e-9);
  out.m_star = std::max<std::size_t>(1, static_cast<std::size_t>(m));
  if (a == 0.0 && b == 1.0) out.probes_per_super_round = s - std::sqrt(s);
  return out;
}

MRunSimulation SimulateMRun(const BernoulliModel& model,
                            std::size_t failure_budget, std::size_t window,
                            std::size_t super_rounds, std::uint64_t seed) {
  if (failure_budget == 0 || window == 0) {
    throw DomainError("N and M must be at least 1");
  }
  if (model.action_count() < super_rounds * window) {
    throw DomainError("model has too few actions for the requested rounds");
  }
  const std::size_t budget = model.trials_per_action();
  Rng rng(seed);
  MRunSimulation sim;
  sim.per_round.reserve(super_rounds);
  std::size_t next_action = 0;
  std::vector<std::uint64_t> successes(window);
  for (std::size_t round = 0; round < super_rounds; ++round) {
    const std::size_t base = next_action;
    next_action += window;
    std::fill(successes.begin(), successes.end(), 0);
    std::size_t pulls = 0;
    std::uint64_t failures = 0;
    std::size_t explored = 0;
    for (std::size_t i = 0; i < window && pulls < budget; ++i) {
      ++explored;
      std::size_t misses = 0;
      while (misses < failure_budget && pulls < budget) {
        ++pulls;
        if (model.Probe(base + i, rng)) {
          ++successes[i];
        } else {
          ++misses;
          ++failures;
        }
      }
    }
    std::size_t pick = 0;
    for (std::size_t i = 1; i < explored; ++i) {
      if (successes[i] > successes[pick]) pick = i;
    }
    if (successes[pick] == 0) pick = explored - 1;
    for (; pulls < budget; ++pulls) {
      if (!model.Probe(base + pick, rng)) ++failures;
    }
    sim.per_round.push_back(static_cast<double>(failures) /
                            static_cast<double>(budget));
  }
  double total = 0.0;
  for (double v : sim.per_round) total += v;
  sim.mean_failure_proportion =
      super_rounds == 0 ? 0.0 : total / static_cast<double>(super_rounds);
  return sim;
}

}  // namespace progjoin
