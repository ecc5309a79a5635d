// progjoin: generate relations, run one strategy, sweep a benchmark grid, or
// verify the bound and estimator properties.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "progjoin/bench.h"
#include "progjoin/collab.h"
#include "progjoin/datagen.h"
#include "progjoin/error.h"
#include "progjoin/rosl.h"

namespace {

using namespace progjoin;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitOom = 3;

struct GenArgs {
  GenConfig config;
  std::string mult = "1n";
  std::string key_mode = "int";
  std::optional<std::uint64_t> seed;
  std::string out_r;
  std::string out_s;
};

int CmdGen(GenArgs& args) {
  if (!args.seed) {
    std::cerr << "usage error: --seed is required\n";
    return kExitUsage;
  }
  args.config.seed = *args.seed;
  if (args.mult == "1n") {
    args.config.multiplicity = Multiplicity::kOneToMany;
  } else if (args.mult == "mn") {
    args.config.multiplicity = Multiplicity::kManyToMany;
  } else {
    std::cerr << "usage error: --mult must be 1n or mn\n";
    return kExitUsage;
  }
  args.config.key_mode = args.key_mode == "str" ? KeyMode::kStringWithEdits
                                                : KeyMode::kInteger;
  if (args.key_mode != "str" && args.key_mode != "int") {
    std::cerr << "usage error: --key-mode must be int or str\n";
    return kExitUsage;
  }
  const GenSummary summary =
      GeneratePair(args.config, args.out_r, args.out_s);
  std::cout << summary.Line() << '\n';
  return 0;
}

struct RunArgs {
  RunConfig config;
  std::string method = "osl";
  std::string pred = "eq";
  std::string mode = "cost";
  std::string r_path;
  std::string s_path;
  std::optional<std::size_t> k;
  std::optional<double> c_probe, c_seq, c_rand;
  std::string out_results;
  std::string out_trace;
  std::string out_rounds;
};

bool ResolveRun(RunArgs& args) {
  auto method = ParseMethod(args.method);
  if (!method) {
    std::cerr << "usage error: unknown method " << args.method << '\n';
    return false;
  }
  args.config.method = *method;
  if (args.pred == "eq") {
    args.config.predicate = PredicateKind::kKeyEquality;
  } else if (args.pred == "ed1") {
    args.config.predicate = PredicateKind::kEditDistanceLe1;
  } else {
    std::cerr << "usage error: --pred must be eq or ed1\n";
    return false;
  }
  if (args.mode == "cost") {
    args.config.mode = TimingMode::kCostUnits;
  } else if (args.mode == "wall") {
    args.config.mode = TimingMode::kWallClock;
  } else {
    std::cerr << "usage error: --mode must be cost or wall\n";
    return false;
  }
  args.config.k = args.k.value_or(kAllResults);
  if (args.c_probe || args.c_seq || args.c_rand) {
    CostWeights w = CostWeights::ForPartitionSize(args.config.partition_size);
    if (args.c_probe) w.probe = *args.c_probe;
    if (args.c_seq) w.seq_page = *args.c_seq;
    if (args.c_rand) w.rand_page = *args.c_rand;
    args.config.weights = w;
  }
  return true;
}

int CmdRun(RunArgs& args) {
  if (!ResolveRun(args)) return kExitUsage;
  args.config.Validate();
  const RelationStore r =
      LoadRelation(args.r_path, args.config.partition_size, "R");
  const RelationStore s =
      LoadRelation(args.s_path, args.config.partition_size, "S");
  const RunOutput out = ExecuteRun(args.config, r, s);
  std::cout << RunRecord::Header() << '\n' << out.record.Line() << '\n';
  if (!args.out_results.empty()) {
    std::ofstream f(args.out_results);
    WriteResultStream(f, out.stream);
  }
  if (!args.out_trace.empty()) {
    std::ofstream f(args.out_trace);
    WriteEstimateTrace(f, out.estimate_trace);
  }
  if (!args.out_rounds.empty()) {
    std::ofstream f(args.out_rounds);
    WriteRoundTrace(f, out.rounds);
  }
  return out.record.status == "oom" ? kExitOom : 0;
}

int CmdBench(const std::string& grid_path, const std::string& out_path) {
  const BenchGrid grid = LoadGrid(grid_path);
  const BenchResult result = RunBench(grid);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw ConfigError("cannot write " + out_path);
    out = &file;
  }
  *out << RunRecord::Header() << '\n';
  for (const auto& rec : result.ordered) *out << rec.Line() << '\n';
  std::cerr << result.raw.size() << " raw records, " << result.averaged.size()
            << " averaged, " << result.failed_cells << " failed cells\n";
  return 0;
}

struct VerifyArgs {
  std::vector<std::string> only;
  bool inject_bug = false;
  std::size_t runs = 200;
  std::size_t instances = 50;
  std::size_t super_rounds = 500;
};

int CmdVerify(const VerifyArgs& args) {
  static const std::set<std::string> kChecks = {"bounds", "estimator",
                                                "oracle"};
  std::set<std::string> selected(args.only.begin(), args.only.end());
  for (const auto& name : selected) {
    if (!kChecks.count(name)) {
      std::cerr << "usage error: unknown check " << name << '\n';
      return kExitUsage;
    }
  }
  if (selected.empty()) selected = kChecks;
  std::vector<CheckResult> results;
  if (selected.count("bounds")) {
    BoundCheckConfig cfg;
    cfg.super_rounds = args.super_rounds;
    results.push_back(CheckFailureBounds(cfg));
  }
  if (selected.count("estimator")) {
    EstimatorCheckConfig cfg = DefaultEstimatorCheck();
    cfg.runs = args.runs;
    cfg.rosl.drop_selection_weights = args.inject_bug;
    for (auto& c : CheckEstimator(RunEstimatorMonteCarlo(cfg))) {
      results.push_back(c);
    }
  }
  if (selected.count("oracle")) {
    results.push_back(CheckOracleSweep(args.instances, 7));
  }
  bool all = true;
  for (const auto& c : results) {
    std::cout << c.Line() << '\n';
    all = all && c.pass;
  }
  std::cout << (all ? "verify: all checks passed" : "verify: FAILED") << '\n';
  return all ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"progressive join engine with learning scan operators"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a pair of relations");
  gen_cmd->add_option("--r", gen.config.r_tuples, "R tuples");
  gen_cmd->add_option("--s", gen.config.s_tuples, "S tuples");
  gen_cmd->add_option("--keys", gen.config.key_domain,
                      "distinct join keys (default: R tuples)");
  gen_cmd->add_option("--z", gen.config.z, "Zipf exponent");
  gen_cmd->add_option("--mult", gen.mult, "1n or mn");
  gen_cmd->add_option("--key-mode", gen.key_mode, "int or str");
  gen_cmd->add_option("--edit-rate", gen.config.edit_rate,
                      "probability of one substituted character");
  gen_cmd->add_option("--payload", gen.config.payload_len, "payload bytes");
  gen_cmd->add_option("--oracle-cap", gen.config.oracle_cap,
                      "max skey pairs compared for the string join size");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out-r", gen.out_r, "R output file")->required();
  gen_cmd->add_option("--out-s", gen.out_s, "S output file")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run one strategy");
  run_cmd->add_option("--method", run.method,
                      "nl, bnl, ripple, ucb, osl, rosl, cl or icl");
  run_cmd->add_option("--r", run.r_path, "R relation file")->required();
  run_cmd->add_option("--s", run.s_path, "S relation file")->required();
  run_cmd->add_option("--pred", run.pred, "eq or ed1");
  run_cmd->add_option("--k", run.k, "stop after k results (default: all)");
  run_cmd->add_option("--gamma", run.config.gamma, "discount factor");
  run_cmd->add_option("--partition-size", run.config.partition_size,
                      "tuples per partition");
  run_cmd->add_option("--N", run.config.failure_budget, "failure budget");
  run_cmd->add_option("--M", run.config.window, "exploration window");
  run_cmd->add_option("--B", run.config.block, "BNL block in partitions");
  run_cmd->add_option("--mem-cap", run.config.mem_cap,
                      "ripple memory in partitions");
  run_cmd->add_option("--eps0", run.config.eps0, "ROSL zero-reward weight");
  run_cmd->add_flag("!--no-swap", run.config.swap,
                    "disable switching during exploitation");
  run_cmd->add_option("--seed", run.config.seed, "run seed");
  run_cmd->add_option("--mode", run.mode, "cost or wall");
  run_cmd->add_option("--c-probe", run.c_probe, "cost per probe");
  run_cmd->add_option("--c-seq", run.c_seq, "cost per sequential page");
  run_cmd->add_option("--c-rand", run.c_rand, "cost per random page");
  run_cmd->add_option("--report-every", run.config.report_every,
                      "ROSL estimate interval in steps");
  run_cmd->add_option("--z", run.config.z, "z label for the record");
  run_cmd->add_option("--query", run.config.query, "query label");
  run_cmd->add_option("--out-results", run.out_results,
                      "write the result stream here");
  run_cmd->add_option("--out-trace", run.out_trace,
                      "write the ROSL estimate trace here");
  run_cmd->add_option("--out-rounds", run.out_rounds,
                      "write the super-round trace here");

  std::string grid_path;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark grid");
  bench_cmd->add_option("--grid", grid_path, "grid file")->required();
  bench_cmd->add_option("--out", bench_out, "records file (default stdout)");

  VerifyArgs verify;
  auto* verify_cmd =
      app.add_subcommand("verify", "check bounds, estimator and oracle");
  verify_cmd->add_option("--only", verify.only,
                         "bounds, estimator or oracle (repeatable)");
  verify_cmd->add_flag("--inject-bug", verify.inject_bug,
                       "drop the estimator's selection weighting");
  verify_cmd->add_option("--runs", verify.runs, "estimator Monte Carlo runs");
  verify_cmd->add_option("--instances", verify.instances,
                         "oracle sweep instances");
  verify_cmd->add_option("--super-rounds", verify.super_rounds,
                         "bound simulation super-rounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return CmdGen(gen);
    if (*run_cmd) return CmdRun(run);
    if (*bench_cmd) return CmdBench(grid_path, bench_out);
    if (*verify_cmd) return CmdVerify(verify);
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
