#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "progjoin/datagen.h"
#include "progjoin/engine.h"
#include "progjoin/rosl.h"

namespace progjoin {

enum class Method { kNl, kBnl, kRipple, kUcb, kOsl, kRosl, kCl, kIcl };
enum class TimingMode { kCostUnits, kWallClock };

inline constexpr std::size_t kAllResults = std::numeric_limits<std::size_t>::max();

std::optional<Method> ParseMethod(const std::string& name);
const char* MethodName(Method method);
const std::vector<Method>& AllMethods();

struct RunConfig {
  Method method = Method::kOsl;
  PredicateKind predicate = PredicateKind::kKeyEquality;
  std::size_t k = kAllResults;
  double gamma = 0.99;
  std::size_t partition_size = kDefaultPartitionSize;
  std::size_t failure_budget = 10;  // N
  std::size_t window = 0;           // M; 0 = ceil(sqrt(partitions))
  std::size_t block = 8;            // B, in partitions
  std::size_t mem_cap = 64;         // ripple, in partitions
  double eps0 = 0.5;
  bool swap = true;
  std::optional<std::uint64_t> seed;
  // Defaults to CostWeights::ForPartitionSize(partition_size).
  std::optional<CostWeights> weights;
  TimingMode mode = TimingMode::kCostUnits;
  std::size_t report_every = 0;
  // Labels copied into the record.
  std::optional<double> z;
  std::string query = "q";

  // Throws ConfigError.
  void Validate() const;
  CostWeights EffectiveWeights() const;
};

struct RunRecord {
  std::string method;
  std::optional<double> z;
  std::string query;
  std::size_t k = kAllResults;
  double cost_units = 0.0;
  double wall_ms = 0.0;
  std::uint64_t probes = 0;
  std::uint64_t seq_pages = 0;
  std::uint64_t rand_pages = 0;
  double discounted_avg = 0.0;
  std::size_t results = 0;
  // ok, oom, failed, or avg for averaged bench records.
  std::string status = "ok";
  std::optional<EstimatePoint> estimate;

  static std::string Header();
  std::string Line() const;
};

struct RunOutput {
  RunRecord record;
  ResultStream stream;
  std::vector<EstimatePoint> estimate_trace;
  std::vector<SuperRoundRecord> rounds;
};

JoinPredicate MakePredicate(PredicateKind kind);

RunOutput ExecuteRun(const RunConfig& config, const RelationStore& r,
                     const RelationStore& s);

// Mean of every numeric field; labels from the first record.
RunRecord AverageRecords(const std::vector<RunRecord>& records);

struct BenchGrid {
  std::vector<Method> methods;
  std::vector<double> z_values;
  std::vector<std::size_t> k_values;
  std::size_t reps = 1;
  GenConfig gen;
  RunConfig run;  // template for per-cell settings
};

// One `key=value` per line, lists comma separated, `#` starts a comment.
BenchGrid ParseGrid(std::istream& in);
BenchGrid LoadGrid(const std::string& path);

struct BenchResult {
  std::vector<RunRecord> raw;
  std::vector<RunRecord> averaged;
  // Raw and averaged records in output order.
  std::vector<RunRecord> ordered;
  std::size_t failed_cells = 0;
};

// Every method x z x k cell, `reps` times each with R and S reshuffled per
// repetition, followed by the cell's averaged record.
BenchResult RunBench(const BenchGrid& grid);

// --- verification ----------------------------------------------------------

struct CheckResult {
  std::string name;
  double measured = 0.0;
  std::string bound;
  bool pass = false;
  std::string detail;

  std::string Line() const;
};

struct IdentityPair {
  std::uint32_t r_address;
  std::uint32_t r_offset;
  std::uint32_t s_address;
  std::uint32_t s_offset;
  auto operator<=>(const IdentityPair&) const = default;
};

// Every matching tuple pair, sorted.
std::vector<IdentityPair> BruteForceJoin(const RelationStore& r,
                                         const RelationStore& s,
                                         const JoinPredicate& pred);
std::vector<IdentityPair> SortedPairs(const ResultStream& stream);

struct BoundCheckConfig {
  double a = 0.0;
  double b = 1.0;
  std::size_t s_count = 10000;
  std::size_t failure_budget = 1;
  std::size_t window = 100;
  std::size_t super_rounds = 500;
  std::uint64_t seed = 20240601;
  double lower_slack = 0.01;
  double upper_slack = 0.02;
};

CheckResult CheckFailureBounds(const BoundCheckConfig& config);

struct EstimatorCheckConfig {
  GenConfig gen;
  std::size_t partition_size = 16;
  std::size_t runs = 200;
  std::size_t steps = 2000;  // fixed T per run
  RoslParams rosl;
  std::uint64_t seed = 99;
};

EstimatorCheckConfig DefaultEstimatorCheck();

struct EstimatorMonteCarlo {
  double truth = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
  double coverage = 0.0;
  std::size_t runs = 0;
  std::vector<double> estimates;
};

EstimatorMonteCarlo RunEstimatorMonteCarlo(const EstimatorCheckConfig& config);

// Bias (|mean - truth| <= 3 SE) and coverage ([0.90, 0.98]) checks.
std::vector<CheckResult> CheckEstimator(const EstimatorMonteCarlo& mc);

// Runs every method to exhaustion on `instances` random small instances and
// compares the identity pairs with the brute-force join.
CheckResult CheckOracleSweep(std::size_t instances, std::uint64_t seed);

}  // namespace progjoin
