#include "progjoin/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "progjoin/baselines.h"
#include "progjoin/collab.h"
#include "progjoin/error.h"
#include "progjoin/osl.h"

namespace progjoin {

namespace {

struct NamedMethod {
  Method method;
  const char* name;
};

constexpr NamedMethod kMethodNames[] = {
    {Method::kNl, "nl"},   {Method::kBnl, "bnl"}, {Method::kRipple, "ripple"},
    {Method::kUcb, "ucb"}, {Method::kOsl, "osl"}, {Method::kRosl, "rosl"},
    {Method::kCl, "cl"},   {Method::kIcl, "icl"},
};

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ParseDouble(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("grid key '" + key + "': not a number: " + v);
}

std::uint64_t ParseCount(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("grid key '" + key + "': not a count: " + v);
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("grid key '" + key + "': out of range: " + v);
  }
}

}  // namespace

std::optional<Method> ParseMethod(const std::string& name) {
  for (const auto& m : kMethodNames) {
    if (name == m.name) return m.method;
  }
  return std::nullopt;
}

const char* MethodName(Method method) {
  for (const auto& m : kMethodNames) {
    if (m.method == method) return m.name;
  }
  return "?";
}

const std::vector<Method>& AllMethods() {
  static const std::vector<Method> all = [] {
    std::vector<Method> v;
    for (const auto& m : kMethodNames) v.push_back(m.method);
    return v;
  }();
  return all;
}

void RunConfig::Validate() const {
  if (partition_size == 0) throw ConfigError("partition size must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
  if (mode == TimingMode::kCostUnits && !seed) {
    throw ConfigError("--seed is required in cost-unit mode");
  }
  switch (method) {
    case Method::kBnl:
      if (block == 0) throw ConfigError("block size B must be >= 1");
      break;
    case Method::kRipple:
      if (mem_cap < 2) throw ConfigError("mem-cap must be >= 2");
      break;
    case Method::kOsl:
    case Method::kCl:
    case Method::kIcl:
      if (failure_budget == 0) throw ConfigError("N must be >= 1");
      break;
    case Method::kRosl:
      if (failure_budget == 0) throw ConfigError("N must be >= 1");
      if (!(eps0 > 0.0)) throw ConfigError("eps0 must be positive");
      break;
    case Method::kNl:
    case Method::kUcb:
      break;
  }
}

CostWeights RunConfig::EffectiveWeights() const {
  return weights.value_or(CostWeights::ForPartitionSize(partition_size));
}

std::string RunRecord::Header() {
  return "method,z,query,k,cost_units,wall_ms,probes,seq_pages,rand_pages,"
         "discounted_avg,results,status,count_est,count_low,count_high";
}

std::string RunRecord::Line() const {
  std::ostringstream out;
  char zbuf[32] = "";
  if (z) std::snprintf(zbuf, sizeof zbuf, "%g", *z);
  out << method << ',' << zbuf << ',' << query << ','
      << (k == kAllResults ? std::string("all") : std::to_string(k)) << ','
      << Num(cost_units) << ',' << Num(wall_ms) << ',' << probes << ','
      << seq_pages << ',' << rand_pages << ',' << Num(discounted_avg) << ','
      << results << ',' << status << ',';
  if (estimate) {
    out << Num(estimate->count_est) << ',' << Num(estimate->count_low) << ','
        << Num(estimate->count_high);
  } else {
    out << ",,";
  }
  return out.str();
}

JoinPredicate MakePredicate(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::kKeyEquality:
      return JoinPredicate::KeyEquality();
    case PredicateKind::kEditDistanceLe1:
      return JoinPredicate::EditDistanceLe1();
    case PredicateKind::kCustom:
      break;
  }
  throw ConfigError("custom predicates cannot be named on the command line");
}

RunOutput ExecuteRun(const RunConfig& config, const RelationStore& r,
                     const RelationStore& s) {
  config.Validate();
  const JoinPredicate pred = MakePredicate(config.predicate);
  CostClock clock(config.EffectiveWeights());
  RunOutput out;
  ResultStream& sink = out.stream;
  sink.set_limit(config.k);

  OslParams osl;
  osl.failure_budget = config.failure_budget;
  osl.window = config.window;
  osl.swap_enabled = config.swap;
  osl.seed = config.seed.value_or(0);

  const auto start = std::chrono::steady_clock::now();
  switch (config.method) {
    case Method::kNl:
      RunNestedLoop(r, s, pred, config.k, clock, sink);
      break;
    case Method::kBnl:
      RunBlockNestedLoop(r, s, pred, config.k, config.block, clock, sink);
      break;
    case Method::kRipple: {
      const RippleOutcome o =
          RunRipple(r, s, pred, config.k, config.mem_cap, clock, sink);
      if (o.status == RippleStatus::kOutOfMemory) out.record.status = "oom";
      break;
    }
    case Method::kUcb:
      RunUcbScan(r, s, pred, config.k, clock, sink);
      break;
    case Method::kOsl:
      out.rounds = RunOsl(r, s, pred, config.k, osl, clock, sink).stats.rounds;
      break;
    case Method::kRosl: {
      RoslParams params;
      params.osl = osl;
      params.eps0 = config.eps0;
      RoslRun run = RunRosl(r, s, pred, config.k, params, clock, sink,
                            config.report_every);
      out.rounds = std::move(run.stats.rounds);
      out.estimate_trace = std::move(run.trace);
      if (!out.estimate_trace.empty()) {
        out.record.estimate = out.estimate_trace.back();
      }
      break;
    }
    case Method::kCl:
      out.rounds = RunCl(r, s, pred, config.k, osl, clock, sink).stats.rounds;
      break;
    case Method::kIcl:
      out.rounds = RunIcl(r, s, pred, config.k, osl, clock, sink).stats.rounds;
      break;
  }
  const auto stop = std::chrono::steady_clock::now();

  RunRecord& rec = out.record;
  rec.method = MethodName(config.method);
  rec.z = config.z;
  rec.query = config.query;
  rec.k = config.k;
  rec.cost_units = clock.Total();
  rec.wall_ms =
      config.mode == TimingMode::kWallClock
          ? std::chrono::duration<double, std::milli>(stop - start).count()
          : 0.0;
  rec.probes = clock.probes;
  rec.seq_pages = clock.seq_pages;
  rec.rand_pages = clock.rand_pages;
  const std::vector<double> stamps = sink.CostStamps();
  rec.discounted_avg = DiscountedAverage(stamps, config.gamma);
  rec.results = sink.size();
  return out;
}

RunRecord AverageRecords(const std::vector<RunRecord>& records) {
  if (records.empty()) throw DomainError("nothing to average");
  RunRecord avg = records.front();
  const double n = static_cast<double>(records.size());
  double cost = 0, wall = 0, probes = 0, seq = 0, rnd = 0, disc = 0, res = 0;
  for (const auto& r : records) {
    cost += r.cost_units;
    wall += r.wall_ms;
    probes += static_cast<double>(r.probes);
    seq += static_cast<double>(r.seq_pages);
    rnd += static_cast<double>(r.rand_pages);
    disc += r.discounted_avg;
    res += static_cast<double>(r.results);
  }
  avg.cost_units = cost / n;
  avg.wall_ms = wall / n;
  avg.probes = static_cast<std::uint64_t>(std::llround(probes / n));
  avg.seq_pages = static_cast<std::uint64_t>(std::llround(seq / n));
  avg.rand_pages = static_cast<std::uint64_t>(std::llround(rnd / n));
  avg.discounted_avg = disc / n;
  avg.results = static_cast<std::size_t>(std::llround(res / n));
  avg.status = "avg";
  avg.estimate.reset();
  return avg;
}

BenchGrid ParseGrid(std::istream& in) {
  BenchGrid grid;
  grid.run.seed = 1;
  grid.gen.seed = 1;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("grid line " + std::to_string(row) + ": expected key=value");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const auto items = SplitList(value);
    auto single = [&]() -> const std::string& {
      if (items.size() != 1) {
        throw ConfigError("grid key '" + key + "' takes one value");
      }
      return items.front();
    };
    if (key == "methods") {
      for (const auto& m : items) {
        auto parsed = ParseMethod(m);
        if (!parsed) throw ConfigError("unknown method: " + m);
        grid.methods.push_back(*parsed);
      }
    } else if (key == "z") {
      for (const auto& v : items) {
        const double z = ParseDouble(key, v);
        if (z < 0) throw DomainError("z must be >= 0");
        grid.z_values.push_back(z);
      }
    } else if (key == "k") {
      for (const auto& v : items) {
        grid.k_values.push_back(v == "all" ? kAllResults
                                           : ParseCount(key, v));
      }
    } else if (key == "reps") {
      grid.reps = ParseCount(key, single());
    } else if (key == "r") {
      grid.gen.r_tuples = ParseCount(key, single());
    } else if (key == "s") {
      grid.gen.s_tuples = ParseCount(key, single());
    } else if (key == "keys") {
      grid.gen.key_domain = ParseCount(key, single());
    } else if (key == "mult") {
      const auto& v = single();
      if (v == "1n") {
        grid.gen.multiplicity = Multiplicity::kOneToMany;
      } else if (v == "mn") {
        grid.gen.multiplicity = Multiplicity::kManyToMany;
      } else {
        throw ConfigError("mult must be 1n or mn");
      }
    } else if (key == "pred") {
      const auto& v = single();
      if (v == "eq") {
        grid.run.predicate = PredicateKind::kKeyEquality;
        grid.gen.key_mode = KeyMode::kInteger;
      } else if (v == "ed1") {
        grid.run.predicate = PredicateKind::kEditDistanceLe1;
        grid.gen.key_mode = KeyMode::kStringWithEdits;
      } else {
        throw ConfigError("pred must be eq or ed1");
      }
    } else if (key == "edit_rate") {
      grid.gen.edit_rate = ParseDouble(key, single());
    } else if (key == "seed") {
      grid.gen.seed = ParseCount(key, single());
      grid.run.seed = grid.gen.seed;
    } else if (key == "partition_size") {
      grid.run.partition_size = ParseCount(key, single());
    } else if (key == "gamma") {
      grid.run.gamma = ParseDouble(key, single());
    } else if (key == "N") {
      grid.run.failure_budget = ParseCount(key, single());
    } else if (key == "M") {
      grid.run.window = ParseCount(key, single());
    } else if (key == "B") {
      grid.run.block = ParseCount(key, single());
    } else if (key == "mem_cap") {
      grid.run.mem_cap = ParseCount(key, single());
    } else if (key == "eps0") {
      grid.run.eps0 = ParseDouble(key, single());
    } else if (key == "query") {
      grid.run.query = single();
    } else {
      throw ConfigError("unknown grid key: " + key);
    }
  }
  if (grid.reps == 0) throw ConfigError("reps must be >= 1");
  return grid;
}

BenchGrid LoadGrid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file: " + path);
  return ParseGrid(in);
}

BenchResult RunBench(const BenchGrid& grid) {
  BenchResult out;
  for (double z : grid.z_values) {
    GenConfig gen = grid.gen;
    gen.z = z;
    std::optional<GeneratedPair> data;
    std::string gen_error;
    try {
      data = GeneratePairInMemory(gen);
    } catch (const std::exception& e) {
      gen_error = e.what();
    }
    const std::size_t ps = grid.run.partition_size;
    std::vector<std::pair<RelationStore, RelationStore>> shuffled;
    if (data) {
      const RelationStore r("R", data->r, ps);
      const RelationStore s("S", data->s, ps);
      for (std::size_t rep = 0; rep < grid.reps; ++rep) {
        const std::uint64_t rs = MixSeed(gen.seed, 1000 + rep);
        shuffled.emplace_back(r.Reshuffled(MixSeed(rs, 1)),
                              s.Reshuffled(MixSeed(rs, 2)));
      }
    }
    for (Method method : grid.methods) {
      for (std::size_t k : grid.k_values) {
        std::vector<RunRecord> ok;
        bool failed = false;
        for (std::size_t rep = 0; rep < grid.reps; ++rep) {
          RunConfig cfg = grid.run;
          cfg.method = method;
          cfg.k = k;
          cfg.z = z;
          cfg.seed = MixSeed(grid.run.seed.value_or(1), 2000 + rep);
          RunRecord rec;
          try {
            if (!data) throw ConfigError(gen_error);
            rec = ExecuteRun(cfg, shuffled[rep].first, shuffled[rep].second)
                      .record;
            ok.push_back(rec);
          } catch (const std::exception&) {
            rec = RunRecord{};
            rec.method = MethodName(method);
            rec.z = z;
            rec.query = cfg.query;
            rec.k = k;
            rec.status = "failed";
            failed = true;
          }
          out.raw.push_back(rec);
          out.ordered.push_back(rec);
        }
        RunRecord avg;
        if (ok.empty()) {
          avg = out.raw.back();
          avg.status = "failed";
        } else {
          avg = AverageRecords(ok);
          if (failed) avg.status = "avg-partial";
        }
        if (failed) ++out.failed_cells;
        out.averaged.push_back(avg);
        out.ordered.push_back(avg);
      }
    }
  }
  return out;
}

// --- verification ----------------------------------------------------------

std::string CheckResult::Line() const {
  std::ostringstream out;
  out << "check=" << name << " measured=" << Num(measured) << " bound="
      << bound << " verdict=" << (pass ? "PASS" : "FAIL");
  if (!detail.empty()) out << " (" << detail << ")";
  return out.str();
}

std::vector<IdentityPair> BruteForceJoin(const RelationStore& r,
                                         const RelationStore& s,
                                         const JoinPredicate& pred) {
  std::vector<IdentityPair> out;
  for (const auto& pr : r.partitions()) {
    for (std::size_t i = 0; i < pr.size(); ++i) {
      for (const auto& ps : s.partitions()) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
          if (pred.Matches(pr.tuples[i], ps.tuples[j])) {
            out.push_back({static_cast<std::uint32_t>(pr.index),
                           static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(ps.index),
                           static_cast<std::uint32_t>(j)});
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<IdentityPair> SortedPairs(const ResultStream& stream) {
  std::vector<IdentityPair> out;
  out.reserve(stream.size());
  for (const auto& r : stream.results()) {
    out.push_back({r.r_address, r.r_offset, r.s_address, r.s_offset});
  }
  std::sort(out.begin(), out.end());
  return out;
}

CheckResult CheckFailureBounds(const BoundCheckConfig& config) {
  const Bounds b = TheoreticalBounds(config.a, config.b, config.s_count);
  const std::size_t actions = config.super_rounds * config.window;
  const BernoulliModel model = MakeBernoulliModel(
      actions, config.s_count, config.a, config.b, MixSeed(config.seed, 1));
  const MRunSimulation sim =
      SimulateMRun(model, config.failure_budget, config.window,
                   config.super_rounds, MixSeed(config.seed, 2));
  CheckResult res;
  res.name = "failure-bounds";
  res.measured = sim.mean_failure_proportion;
  const double lo = b.lower - config.lower_slack;
  const double hi = b.upper + config.upper_slack;
  char buf[160];
  std::snprintf(buf, sizeof buf, "[%.5f,%.5f] (lower %.5f / upper %.5f)", lo,
                hi, b.lower, b.upper);
  res.bound = buf;
  res.pass = res.measured >= lo && res.measured <= hi;
  res.detail = std::to_string(config.super_rounds) + " super-rounds";
  return res;
}

EstimatorCheckConfig DefaultEstimatorCheck() {
  EstimatorCheckConfig c;
  c.gen.r_tuples = 2000;
  c.gen.s_tuples = 8000;
  c.gen.z = 1.0;
  c.gen.multiplicity = Multiplicity::kOneToMany;
  c.gen.seed = 11;
  c.rosl.osl.failure_budget = 10;
  return c;
}

EstimatorMonteCarlo RunEstimatorMonteCarlo(const EstimatorCheckConfig& config) {
  const GeneratedPair data = GeneratePairInMemory(config.gen);
  const RelationStore r0("R", data.r, config.partition_size);
  const RelationStore s0("S", data.s, config.partition_size);
  const JoinPredicate pred = config.gen.key_mode == KeyMode::kInteger
                                 ? JoinPredicate::KeyEquality()
                                 : JoinPredicate::EditDistanceLe1();
  EstimatorMonteCarlo mc;
  mc.truth = static_cast<double>(data.summary.full_join_size);
  mc.runs = config.runs;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < config.runs; ++i) {
    const std::uint64_t seed = MixSeed(config.seed, i);
    const RelationStore r = r0.Reshuffled(MixSeed(seed, 1));
    const RelationStore s = s0.Reshuffled(MixSeed(seed, 2));
    RoslParams params = config.rosl;
    params.osl.seed = MixSeed(seed, 3);
    params.max_steps = config.steps;
    CostClock clock(CostWeights::ForPartitionSize(config.partition_size));
    ResultStream sink;
    const RoslRun run =
        RunRosl(r, s, pred, kAllResults, params, clock, sink, 0);
    const EstimatePoint& pt = run.trace.back();
    mc.estimates.push_back(pt.count_est);
    if (pt.count_low <= mc.truth && mc.truth <= pt.count_high) ++covered;
  }
  const double n = static_cast<double>(config.runs);
  double sum = 0.0;
  for (double v : mc.estimates) sum += v;
  mc.mean = sum / n;
  double ss = 0.0;
  for (double v : mc.estimates) ss += (v - mc.mean) * (v - mc.mean);
  mc.standard_error = config.runs > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  mc.coverage = static_cast<double>(covered) / n;
  return mc;
}

std::vector<CheckResult> CheckEstimator(const EstimatorMonteCarlo& mc) {
  CheckResult bias;
  bias.name = "estimator-bias";
  bias.measured = mc.mean;
  char buf[160];
  std::snprintf(buf, sizeof buf, "truth %.6g +/- 3 SE (SE %.4g)", mc.truth,
                mc.standard_error);
  bias.bound = buf;
  bias.pass = std::abs(mc.mean - mc.truth) <= 3.0 * mc.standard_error;
  bias.detail = std::to_string(mc.runs) + " runs";

  CheckResult cover;
  cover.name = "estimator-coverage";
  cover.measured = mc.coverage;
  cover.bound = "[0.90,0.98]";
  cover.pass = mc.coverage >= 0.90 && mc.coverage <= 0.98;
  cover.detail = bias.detail;
  return {bias, cover};
}

CheckResult CheckOracleSweep(std::size_t instances, std::uint64_t seed) {
  static constexpr std::size_t kPartitionSizes[] = {1, 4, 16};
  static constexpr double kZ[] = {0.0, 1.0, 1.5};
  Rng rng(seed);
  std::size_t mismatches = 0;
  std::size_t runs = 0;
  std::string first_failure;
  for (std::size_t i = 0; i < instances; ++i) {
    GenConfig gen;
    gen.r_tuples = 20 + rng.Below(481);
    gen.s_tuples = 20 + rng.Below(481);
    gen.z = kZ[rng.Below(3)];
    gen.multiplicity = rng.Bernoulli(0.5) ? Multiplicity::kOneToMany
                                          : Multiplicity::kManyToMany;
    if (gen.multiplicity == Multiplicity::kManyToMany) {
      gen.key_domain = 10 + rng.Below(60);
    }
    const bool strings = i % 2 == 1;
    gen.key_mode = strings ? KeyMode::kStringWithEdits : KeyMode::kInteger;
    gen.edit_rate = strings ? 0.3 : 0.0;
    gen.seed = rng.Next();
    const std::size_t ps = kPartitionSizes[i % 3];
    const GeneratedPair data = GeneratePairInMemory(gen);
    const RelationStore r("R", data.r, ps);
    const RelationStore s("S", data.s, ps);
    const JoinPredicate pred = strings ? JoinPredicate::EditDistanceLe1()
                                       : JoinPredicate::KeyEquality();
    const auto truth = BruteForceJoin(r, s, pred);
    for (Method m : AllMethods()) {
      RunConfig cfg;
      cfg.method = m;
      cfg.predicate = pred.kind();
      cfg.partition_size = ps;
      cfg.mem_cap = r.partition_count() + s.partition_count() + 2;
      cfg.block = 1 + i % 4;
      cfg.failure_budget = 1 + i % 10;
      cfg.seed = gen.seed;
      const RunOutput out = ExecuteRun(cfg, r, s);
      ++runs;
      if (SortedPairs(out.stream) != truth) {
        ++mismatches;
        if (first_failure.empty()) {
          first_failure = std::string(MethodName(m)) + " on instance " +
                          std::to_string(i);
        }
      }
    }
  }
  CheckResult res;
  res.name = "oracle";
  res.measured = static_cast<double>(mismatches);
  res.bound = "0 mismatching runs";
  res.pass = mismatches == 0;
  res.detail = std::to_string(runs) + " runs over " +
               std::to_string(instances) + " instances";
  if (!first_failure.empty()) res.detail += ", first: " + first_failure;
  return res;
}

}  // namespace progjoin
