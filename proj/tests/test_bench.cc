#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "progjoin/baselines.h"
#include "progjoin/bench.h"
#include "progjoin/error.h"

using namespace progjoin;
namespace fs = std::filesystem;

namespace {

BenchGrid Grid(const std::string& text) {
  std::istringstream in(text);
  return ParseGrid(in);
}

const char* kSmallGrid =
    "# two strategies on a small skewed pair\n"
    "methods = osl, nl\n"
    "z = 0, 1.5\n"
    "k = 100, 1000\n"
    "reps = 3\n"
    "r = 400\n"
    "s = 1600\n"
    "partition_size = 8\n"
    "seed = 4\n";

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("progjoin_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

int Cli(const std::string& args, const fs::path& out = {}) {
  std::string cmd = std::string(PROGJOIN_CLI) + " " + args;
  cmd += out.empty() ? " >/dev/null" : " >" + out.string();
  cmd += " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Pair {
  RelationStore r;
  RelationStore s;
};

Pair SmallPair(std::uint64_t seed, std::size_t ps) {
  GenConfig g;
  g.r_tuples = 200;
  g.s_tuples = 800;
  g.z = 1.0;
  g.seed = seed;
  GeneratedPair p = GeneratePairInMemory(g);
  return {RelationStore("R", p.r, ps), RelationStore("S", p.s, ps)};
}

}  // namespace

TEST_CASE("grid parsing reads lists, comments and k = all") {
  const BenchGrid g = Grid(
      "methods = rosl,icl  # learners\n"
      "z = 0.5\n"
      "k = 10, all\n"
      "reps = 2\n"
      "pred = ed1\n"
      "N = 4\n"
      "M = 7\n"
      "seed = 9\n");
  CHECK(g.methods == std::vector<Method>{Method::kRosl, Method::kIcl});
  CHECK(g.z_values == std::vector<double>{0.5});
  CHECK(g.k_values == std::vector<std::size_t>{10, kAllResults});
  CHECK(g.reps == 2);
  CHECK(g.run.predicate == PredicateKind::kEditDistanceLe1);
  CHECK(g.gen.key_mode == KeyMode::kStringWithEdits);
  CHECK(g.run.failure_budget == 4);
  CHECK(g.run.window == 7);
  CHECK(g.gen.seed == 9);
  CHECK(g.run.seed == 9u);
}

TEST_CASE("grid parsing rejects malformed lines") {
  CHECK_THROWS_AS(Grid("methods = osl, bogus\n"), ConfigError);
  CHECK_THROWS_AS(Grid("reps 3\n"), ConfigError);
  CHECK_THROWS_AS(Grid("reps = 1, 2\n"), ConfigError);
  CHECK_THROWS_AS(Grid("mult = nm\n"), ConfigError);
  CHECK_THROWS_AS(Grid("z = -1\n"), DomainError);
}

TEST_CASE("bench emits raw records then one average per cell") {
  const BenchResult res = RunBench(Grid(kSmallGrid));
  CHECK(res.raw.size() == 24);
  CHECK(res.averaged.size() == 8);
  REQUIRE(res.ordered.size() == 32);
  CHECK(res.failed_cells == 0);
  for (std::size_t cell = 0; cell < 8; ++cell) {
    const RunRecord& avg = res.ordered[cell * 4 + 3];
    CHECK(avg.status == "avg");
    double sum = 0.0;
    for (std::size_t rep = 0; rep < 3; ++rep) {
      const RunRecord& raw = res.ordered[cell * 4 + rep];
      CHECK(raw.status == "ok");
      CHECK(raw.method == avg.method);
      CHECK(raw.k == avg.k);
      sum += raw.discounted_avg;
    }
    CHECK(avg.discounted_avg == doctest::Approx(sum / 3).epsilon(1e-12));
  }
}

TEST_CASE("bench with an empty grid emits nothing") {
  const BenchResult res = RunBench(Grid("z = 0\nk = 10\n"));
  CHECK(res.raw.empty());
  CHECK(res.averaged.empty());
}

TEST_CASE("bench records are deterministic") {
  const BenchGrid g = Grid(kSmallGrid);
  const BenchResult a = RunBench(g);
  const BenchResult b = RunBench(g);
  REQUIRE(a.ordered.size() == b.ordered.size());
  for (std::size_t i = 0; i < a.ordered.size(); ++i) {
    CHECK(a.ordered[i].Line() == b.ordered[i].Line());
  }
}

TEST_CASE("record header and k = all rendering") {
  CHECK(RunRecord::Header() ==
        "method,z,query,k,cost_units,wall_ms,probes,seq_pages,rand_pages,"
        "discounted_avg,results,status,count_est,count_low,count_high");
  RunRecord rec;
  rec.method = "nl";
  rec.query = "q";
  CHECK(rec.Line().rfind("nl,,q,all,", 0) == 0);
}

TEST_CASE("cost mode requires a seed") {
  const Pair p = SmallPair(1, 4);
  RunConfig cfg;
  cfg.method = Method::kOsl;
  CHECK_THROWS_AS(ExecuteRun(cfg, p.r, p.s), ConfigError);
  cfg.seed = 3;
  CHECK_NOTHROW(ExecuteRun(cfg, p.r, p.s));
}

TEST_CASE("every method returns the brute-force join at exhaustion") {
  const Pair p = SmallPair(2, 4);
  const auto truth = BruteForceJoin(p.r, p.s, JoinPredicate::KeyEquality());
  for (Method m : AllMethods()) {
    CAPTURE(MethodName(m));
    RunConfig cfg;
    cfg.method = m;
    cfg.seed = 5;
    cfg.mem_cap = 10'000;
    const RunOutput out = ExecuteRun(cfg, p.r, p.s);
    CHECK(out.record.status == "ok");
    CHECK(SortedPairs(out.stream) == truth);
    CHECK(out.record.results == truth.size());
  }
}

TEST_CASE("ripple past its memory cap reports oom") {
  const Pair p = SmallPair(3, 1);
  RunConfig cfg;
  cfg.method = Method::kRipple;
  cfg.seed = 1;
  cfg.mem_cap = 4;
  const RunOutput out = ExecuteRun(cfg, p.r, p.s);
  CHECK(out.record.status == "oom");
}

TEST_CASE("oracle sweep passes on a handful of instances") {
  const CheckResult c = CheckOracleSweep(4, 3);
  CHECK(c.pass);
  CHECK(c.Line().find("verdict=PASS") != std::string::npos);
}

TEST_CASE("estimator check flags unweighted observations") {
  EstimatorCheckConfig cfg = DefaultEstimatorCheck();
  cfg.runs = 30;
  cfg.rosl.drop_selection_weights = true;
  const auto checks = CheckEstimator(RunEstimatorMonteCarlo(cfg));
  REQUIRE(checks.size() == 2);
  CHECK_FALSE(checks[0].pass);
}

TEST_CASE("cli gen prints a summary and writes both relations") {
  const fs::path r = Scratch("gen_r.csv");
  const fs::path s = Scratch("gen_s.csv");
  const fs::path out = Scratch("gen_out.txt");
  CHECK(Cli("gen --r 50 --s 200 --z 1 --seed 3 --out-r " + r.string() +
                " --out-s " + s.string(),
            out) == 0);
  CHECK(Slurp(out).rfind("r=50 s=200 ", 0) == 0);
  CHECK(fs::exists(r));
  CHECK(fs::exists(s));
}

TEST_CASE("cli usage and domain errors exit with 2") {
  const std::string outs = " --out-r " + Scratch("e_r.csv").string() +
                           " --out-s " + Scratch("e_s.csv").string();
  CHECK(Cli("gen --r 10 --s 10" + outs) == 2);
  CHECK(Cli("gen --r 10 --s 10 --seed 1 --z -1" + outs) == 2);
  CHECK(Cli("run --method nope --r x --s y --seed 1") == 2);
  CHECK(Cli("frobnicate") == 2);
}

TEST_CASE("cli run exports a byte-identical result stream") {
  const fs::path r = Scratch("run_r.csv");
  const fs::path s = Scratch("run_s.csv");
  REQUIRE(Cli("gen --r 300 --s 1200 --z 1 --seed 8 --out-r " + r.string() +
              " --out-s " + s.string()) == 0);
  const std::string base = "run --method rosl --partition-size 8 --seed 2 --r " +
                           r.string() + " --s " + s.string();
  const fs::path a = Scratch("res_a.csv");
  const fs::path b = Scratch("res_b.csv");
  const fs::path rec_a = Scratch("rec_a.csv");
  const fs::path rec_b = Scratch("rec_b.csv");
  CHECK(Cli(base + " --out-results " + a.string(), rec_a) == 0);
  CHECK(Cli(base + " --out-results " + b.string(), rec_b) == 0);
  CHECK_FALSE(Slurp(a).empty());
  CHECK(Slurp(a) == Slurp(b));
  CHECK(Slurp(rec_a) == Slurp(rec_b));
}

TEST_CASE("cli run signals ripple oom with exit code 3") {
  const fs::path r = Scratch("oom_r.csv");
  const fs::path s = Scratch("oom_s.csv");
  REQUIRE(Cli("gen --r 200 --s 800 --seed 4 --out-r " + r.string() +
              " --out-s " + s.string()) == 0);
  CHECK(Cli("run --method ripple --mem-cap 4 --partition-size 1 --seed 1 "
            "--r " + r.string() + " --s " + s.string()) == 3);
}

TEST_CASE("cli verify runs a selected check") {
  CHECK(Cli("verify --only oracle --instances 3") == 0);
  CHECK(Cli("verify --only nonsense") == 2);
}
