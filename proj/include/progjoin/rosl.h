#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "progjoin/osl.h"
#include "progjoin/rng.h"

namespace progjoin {

struct RoslParams {
  OslParams osl;
  // Pseudo-reward of zero-success entries when drawing for exploitation.
  double eps0 = 0.5;
  // Two-sided confidence level of the reported interval.
  double p_conf = 0.95;
  // Stop after this many logged steps (partition-pair probes); 0 = no limit.
  std::size_t max_steps = 0;
  // Negative control: feed every logged step to the estimator with unit
  // weight instead of only the uniform design points.
  bool drop_selection_weights = false;

  void Validate() const;
};

enum class SelectionPhase { kFreshPick, kContinueAfterN, kExploitDraw };

struct SelectionContext {
  std::size_t unexplored = 0;   // fresh partitions left (kFreshPick)
  double p_hat = 0.0;           // smoothed hit rate (kContinueAfterN)
  std::size_t failure_budget = 1;
  double reward = 0.0;          // this entry's reward (kExploitDraw)
  double reward_total = 0.0;    // sum of max(reward, eps0) over candidates
  double eps0 = 0.5;
};

// Smallest probability ever logged; zero-probability selections are raised
// to this value and counted.
double MinSelectionProbability(double eps0);

// kFreshPick: 1 / unexplored. kContinueAfterN: 1 - (1 - p_hat)^N.
// kExploitDraw: max(reward, eps0) / reward_total. `floored` is set when the
// raw value was zero.
double SelectionProbability(SelectionPhase phase, const SelectionContext& ctx,
                            bool* floored = nullptr);

// Laplace-smoothed fraction of probes that produced at least one result.
inline double SmoothedHitRate(std::uint64_t hits, std::uint64_t trials) {
  return (static_cast<double>(hits) + 1.0) /
         (static_cast<double>(trials) + 2.0);
}

struct ExploitDraw {
  std::size_t index = 0;
  double probability = 1.0;
};

// Draws an unexploited entry with probability proportional to
// max(successes, eps0). Returns nullopt for an empty candidate set.
std::optional<ExploitDraw> RoslExploitDraw(std::span<const RewardEntry> table,
                                           double eps0, Rng& rng);

// --- estimator -------------------------------------------------------------

struct Observation {
  double y = 0.0;  // observed aggregate value of the step
  double e = 1.0;  // selection probability of the step, > 0
};

struct AddressEstimate {
  double q_hat = 0.0;
  double v_hat = 0.0;
  std::size_t samples = 0;
};

// h_t = sqrt(e_t / T_r) over the address's own T_r observations, so that
// sum h_t^2 / e_t = 1.
std::vector<double> AdaptiveWeights(std::span<const Observation> obs);

// Weighted mean and variance of the inverse-probability scores y / e.
// nullopt when there are no observations.
std::optional<AddressEstimate> PerTupleEstimate(
    std::span<const Observation> obs);

struct AggregateEstimate {
  double q_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// q_hat = sum_r T_r q_r / T, half-width z * sum_r T_r sqrt(v_r) / T, where
// T_r = samples of address r and T = sum of T_r.
AggregateEstimate CombineEstimates(std::span<const AddressEstimate> per_address,
                                   double z);

// q_hat * r_tuples * s_tuples / j. Throws DomainError("insufficient sample")
// when j = 0.
double CountEstimate(double q_hat, std::uint64_t r_tuples,
                     std::uint64_t s_tuples, std::uint64_t j);

// z with P(|Z| < z) = p for a standard normal Z.
double NormalQuantileTwoSided(double p);

// Value contributed by one join result; default counts results.
using ValueFn = std::function<double(const Tuple& r, const Tuple& s)>;

struct SelectionStep {
  std::size_t step = 0;  // 1-based
  std::size_t address = 0;
  SelectionPhase phase = SelectionPhase::kFreshPick;
  double e = 1.0;
  double y = 0.0;
  std::uint64_t tuple_pairs = 0;
  bool report = false;
};

// Observations grouped by R address, plus the global step count.
class EstimatorState {
 public:
  explicit EstimatorState(std::size_t r_partitions = 0)
      : per_address_(r_partitions) {}

  void Add(std::size_t address, Observation obs, std::uint64_t tuple_pairs);

  std::size_t steps() const { return steps_; }
  std::uint64_t tuple_pairs() const { return tuple_pairs_; }
  std::span<const Observation> ObservationsFor(std::size_t address) const;
  std::size_t address_count() const { return per_address_.size(); }

  // Per-address estimates combined with weights T_r / T.
  AggregateEstimate Aggregate(double z) const;

 private:
  std::vector<std::vector<Observation>> per_address_;
  std::size_t steps_ = 0;
  std::uint64_t tuple_pairs_ = 0;
};

struct EstimatePoint {
  std::size_t step = 0;
  double q_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double count_est = 0.0;
  std::uint64_t samples = 0;  // tuple pairs behind the estimate
  double count_low = 0.0;
  double count_high = 0.0;
};

struct RoslRun {
  RunStats stats;
  std::vector<SelectionStep> log;
  std::vector<EstimatePoint> trace;
  EstimatorState state;
  std::size_t floored = 0;  // selection probabilities raised to the minimum
};

// ROSL: OSL with reward-proportional random exploitation. Every probe is a
// logged step with the probability of the choice that produced it. The first
// N probes of each exploration pair a uniformly drawn fresh R partition with
// the next S partition of a scan over shuffled S, so they form a uniform
// design; those points feed the estimator with unit relative weight. An
// estimate is emitted every `report_every` steps (0 = only at the end) and at
// the end of the run. `value` selects the aggregate (COUNT when empty).
RoslRun RunRosl(const RelationStore& r, const RelationStore& s,
                const JoinPredicate& pred, std::size_t k,
                const RoslParams& params, CostClock& clock, ResultStream& sink,
                std::size_t report_every, const ValueFn& value = {});

// `step,q_hat,ci_low,ci_high,count_est,samples`
void WriteEstimateTrace(std::ostream& out,
                        std::span<const EstimatePoint> trace);

}  // namespace progjoin
