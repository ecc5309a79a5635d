#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "progjoin/bench.h"
#include "progjoin/collab.h"
#include "progjoin/datagen.h"
#include "support/oracle.h"

using namespace progjoin;

namespace {

GeneratedPair Data(std::uint64_t seed, bool strings, bool many) {
  GenConfig g;
  g.r_tuples = 150;
  g.s_tuples = 300;
  g.z = static_cast<double>(seed % 3) * 0.75;
  g.multiplicity = many ? Multiplicity::kManyToMany : Multiplicity::kOneToMany;
  if (many) g.key_domain = 50;
  g.key_mode = strings ? KeyMode::kStringWithEdits : KeyMode::kInteger;
  g.edit_rate = 0.3;
  g.seed = seed;
  return GeneratePairInMemory(g);
}

}  // namespace

TEST_CASE("cl and icl reach the full join without duplicates") {
  for (std::uint64_t seed = 1; seed <= 16; ++seed) {
    const bool strings = seed % 4 == 3;
    const auto data = Data(seed, strings, seed % 2 == 1);
    const std::size_t ps = std::size_t{1} << (seed % 4);
    const RelationStore r("R", data.r, ps);
    const RelationStore s("S", data.s, ps);
    const auto pred = strings ? JoinPredicate::EditDistanceLe1()
                              : JoinPredicate::KeyEquality();
    const auto truth = testing::OracleJoin(
        data.r, data.s, ps, strings ? testing::Kind::kEd1 : testing::Kind::kEq);
    OslParams p;
    p.failure_budget = 1 + seed % 5;
    p.swap_enabled = seed % 3 != 0;
    CAPTURE(seed);
    {
      CostClock clock;
      ResultStream sink;
      RunCl(r, s, pred, kAllResults, p, clock, sink);
      CHECK(testing::Pairs(sink) == truth);
    }
    {
      CostClock clock;
      ResultStream sink;
      const auto run = RunIcl(r, s, pred, kAllResults, p, clock, sink);
      CHECK(testing::Pairs(sink) == truth);
      CHECK(run.stats.s_side_learning_evaluations == 0);
    }
  }
}

TEST_CASE("cl alternates the explorer every super-round") {
  const auto data = Data(4, false, true);
  const RelationStore r("R", data.r, 2);
  const RelationStore s("S", data.s, 2);
  CostClock clock;
  ResultStream sink;
  const auto run =
      RunCl(r, s, JoinPredicate::KeyEquality(), kAllResults, {}, clock, sink);
  REQUIRE(run.stats.rounds.size() > 4);
  for (const auto& rec : run.stats.rounds) {
    CHECK(rec.explorer == (rec.round % 2 == 1 ? Side::kR : Side::kS));
  }
  CHECK(run.stats.s_side_learning_evaluations > 0);
}

TEST_CASE("learners on mirrored relations see mirrored rewards") {
  const auto data = Data(9, false, true);
  const RelationStore a("A", data.s, 4);
  const RelationStore b("B", data.s, 4);
  const auto pred = JoinPredicate::KeyEquality();
  OslParams p;
  p.failure_budget = 3;
  auto rewards = [&](Side side) {
    CostClock clock;
    DedupLedger ledger(a.partition_count());
    ResultStream sink;
    JoinContext ctx{a, b, pred, ledger, clock, sink};
    RunStats stats;
    ScanLearner learner(ctx, side, p, stats);
    CursorSource source(side == Side::kR ? b : a);
    for (int i = 0; i < 12; ++i) learner.ExploreNext(source);
    std::vector<std::uint64_t> out;
    for (const auto& e : learner.table()) out.push_back(e.successes);
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto r_side = rewards(Side::kR);
  CHECK(r_side.size() == 12);
  CHECK(r_side == rewards(Side::kS));
}

TEST_CASE("harvest only counts uniform first-N probes inside the pool") {
  IclPool pool(10, 3, 4, 2, 5);
  CHECK(pool.size() == 3);
  HarvestObservation(pool, 1, true, 2, 1, 1);
  CHECK(pool.ledger(1).successes == 2);
  CHECK(pool.ledger(1).failures == 0);
  HarvestObservation(pool, 1, false, 5, 1, 1);
  CHECK(pool.ledger(1).successes == 2);
  HarvestObservation(pool, 7, true, 5, 1, 1);
  CHECK(pool.ledger(7).successes == 0);
  HarvestObservation(pool, 0, true, 0, 1, 0);
  CHECK_FALSE(pool.Completed(0));
  HarvestObservation(pool, 0, true, 0, 1, 0);
  CHECK(pool.Completed(0));
  CHECK(pool.CompletedUnexploited() == 1);
  CHECK(pool.BestCompleted() == 0);
  pool.MarkExploited(0);
  CHECK(pool.CompletedUnexploited() == 0);
  CHECK(pool.BestCompleted() == 10);
  pool.Extend();
  CHECK(pool.size() == 7);
  pool.Extend();
  CHECK(pool.size() == 10);
}

TEST_CASE("an address observed against all of R completes") {
  IclPool pool(4, 2, 2, 3, 3);
  for (int i = 0; i < 3; ++i) HarvestObservation(pool, 1, true, 1, 1, 1);
  CHECK(pool.Completed(1));
}

TEST_CASE("icl exploits the S partition that matches every R partition") {
  // Four R partitions, each with one tuple of key 100; S partition 1 holds
  // key 100, the other S partitions match nothing.
  const RelationStore r("R", testing::Keys({100, 1, 100, 2, 100, 3, 100, 4}),
                        2);
  const RelationStore s("S", testing::Keys({50, 51, 100, 52, 53, 54, 55, 56}),
                        2);
  OslParams p;
  p.failure_budget = 2;
  CostClock clock;
  ResultStream sink;
  const auto run =
      RunIcl(r, s, JoinPredicate::KeyEquality(), kAllResults, p, clock, sink);
  CHECK(sink.size() == 4);
  std::optional<std::size_t> first_s;
  for (const auto& rec : run.stats.rounds) {
    if (rec.explorer == Side::kS) {
      first_s = rec.exploited;
      break;
    }
  }
  REQUIRE(first_s.has_value());
  CHECK(*first_s == 1);
  CHECK(run.s_exploitations >= 1);
  CHECK(run.final_pool_size == std::min<std::size_t>(
                                   4, 2 + run.s_exploitations * 4));
}

TEST_CASE("icl explores no more than cl") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto data = Data(seed, false, true);
    const RelationStore r("R", data.r, 4);
    const RelationStore s("S", data.s, 4);
    OslParams p;
    p.seed = seed;
    CostClock c1, c2;
    ResultStream s1, s2;
    const auto cl = RunCl(r, s, JoinPredicate::KeyEquality(), 400, p, c1, s1);
    const auto icl =
        RunIcl(r, s, JoinPredicate::KeyEquality(), 400, p, c2, s2);
    CAPTURE(seed);
    CHECK(icl.stats.s_side_learning_evaluations == 0);
    CHECK(icl.stats.explore_evaluations <= cl.stats.explore_evaluations);
  }
}

TEST_CASE("round trace format") {
  std::vector<SuperRoundRecord> rounds(2);
  rounds[0].round = 1;
  rounds[0].explored = 4;
  rounds[0].reward = 7;
  rounds[0].exploited = 4;
  rounds[0].results_so_far = 9;
  rounds[0].cost = 120;
  rounds[1].round = 2;
  rounds[1].explorer = Side::kS;
  rounds[1].cost = 121.5;
  std::ostringstream out;
  WriteRoundTrace(out, rounds);
  CHECK(out.str() == "1,R,4,7,4,9,120\n2,S,,0,,0,121.5\n");
}
