#include "progjoin/rosl.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "progjoin/error.h"

namespace progjoin {

void RoslParams::Validate() const {
  if (!(eps0 > 0.0)) throw ConfigError("eps0 must be positive");
  if (!(p_conf > 0.0 && p_conf < 1.0)) {
    throw ConfigError("confidence level must lie in (0, 1)");
  }
  if (osl.failure_budget == 0) throw ConfigError("N must be at least 1");
}

double MinSelectionProbability(double eps0) {
  return std::clamp(eps0, 1e-12, 1.0) * 1e-6;
}

double SelectionProbability(SelectionPhase phase, const SelectionContext& ctx,
                            bool* floored) {
  double p = 0.0;
  switch (phase) {
    case SelectionPhase::kFreshPick:
      p = ctx.unexplored == 0 ? 0.0
                              : 1.0 / static_cast<double>(ctx.unexplored);
      break;
    case SelectionPhase::kContinueAfterN:
      p = 1.0 - std::pow(1.0 - std::clamp(ctx.p_hat, 0.0, 1.0),
                         static_cast<double>(ctx.failure_budget));
      break;
    case SelectionPhase::kExploitDraw:
      p = ctx.reward_total > 0.0
              ? std::max(ctx.reward, ctx.eps0) / ctx.reward_total
              : 0.0;
      break;
  }
  const double lo = MinSelectionProbability(ctx.eps0);
  if (floored != nullptr) *floored = !(p >= lo);
  return std::clamp(p, lo, 1.0);
}

std::optional<ExploitDraw> RoslExploitDraw(std::span<const RewardEntry> table,
                                           double eps0, Rng& rng) {
  double total = 0.0;
  for (const auto& e : table) {
    if (!e.exploited) total += std::max(static_cast<double>(e.successes), eps0);
  }
  if (total <= 0.0) return std::nullopt;
  const double u = rng.Uniform() * total;
  double acc = 0.0;
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].exploited) continue;
    const double w = std::max(static_cast<double>(table[i].successes), eps0);
    acc += w;
    last = i;
    if (u < acc) return ExploitDraw{i, w / total};
  }
  // Rounding left u at the very top of the range.
  const double w = std::max(static_cast<double>(table[*last].successes), eps0);
  return ExploitDraw{*last, w / total};
}

std::vector<double> AdaptiveWeights(std::span<const Observation> obs) {
  std::vector<double> h;
  h.reserve(obs.size());
  const double n = static_cast<double>(obs.size());
  for (const auto& o : obs) h.push_back(std::sqrt(o.e / n));
  return h;
}

std::optional<AddressEstimate> PerTupleEstimate(
    std::span<const Observation> obs) {
  if (obs.empty()) return std::nullopt;
  const std::vector<double> h = AdaptiveWeights(obs);
  double sum_h = 0.0;
  double sum_hg = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    sum_h += h[t];
    sum_hg += h[t] * (obs[t].y / obs[t].e);
  }
  AddressEstimate out;
  out.samples = obs.size();
  out.q_hat = sum_hg / sum_h;
  double acc = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const double d = obs[t].y / obs[t].e - out.q_hat;
    acc += h[t] * h[t] * d * d;
  }
  out.v_hat = acc / (sum_h * sum_h);
  return out;
}

AggregateEstimate CombineEstimates(std::span<const AddressEstimate> per_address,
                                   double z) {
  double total = 0.0;
  double q = 0.0;
  double spread = 0.0;
  for (const auto& a : per_address) {
    const double tr = static_cast<double>(a.samples);
    total += tr;
    q += tr * a.q_hat;
    spread += tr * std::sqrt(a.v_hat);
  }
  AggregateEstimate out;
  if (total == 0.0) return out;
  out.q_hat = q / total;
  const double half = z * spread / total;
  out.ci_low = out.q_hat - half;
  out.ci_high = out.q_hat + half;
  return out;
}

double CountEstimate(double q_hat, std::uint64_t r_tuples,
                     std::uint64_t s_tuples, std::uint64_t j) {
  if (j == 0) throw DomainError("insufficient sample");
  return q_hat * static_cast<double>(r_tuples) *
         static_cast<double>(s_tuples) / static_cast<double>(j);
}

double NormalQuantileTwoSided(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0, 1)");
  // P(|Z| < z) = erf(z / sqrt 2); bisection is plenty for a one-off value.
  double lo = 0.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(mid / std::sqrt(2.0)) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void EstimatorState::Add(std::size_t address, Observation obs,
                         std::uint64_t tuple_pairs) {
  if (!(obs.e > 0.0)) throw DomainError("selection probability must be > 0");
  if (address >= per_address_.size()) per_address_.resize(address + 1);
  per_address_[address].push_back(obs);
  ++steps_;
  tuple_pairs_ += tuple_pairs;
}

std::span<const Observation> EstimatorState::ObservationsFor(
    std::size_t address) const {
  if (address >= per_address_.size()) return {};
  return per_address_[address];
}

AggregateEstimate EstimatorState::Aggregate(double z) const {
  std::vector<AddressEstimate> parts;
  for (const auto& obs : per_address_) {
    if (auto est = PerTupleEstimate(obs)) parts.push_back(*est);
  }
  return CombineEstimates(parts, z);
}

namespace {

EstimatePoint MakePoint(const EstimatorState& state, std::size_t step,
                        double z, std::uint64_t r_tuples,
                        std::uint64_t s_tuples) {
  EstimatePoint pt;
  pt.step = step;
  pt.samples = state.tuple_pairs();
  if (state.tuple_pairs() == 0) return pt;
  const AggregateEstimate agg = state.Aggregate(z);
  // Q is a per-step mean; Q * T is the total over the sampled tuple pairs.
  const double t = static_cast<double>(state.steps());
  pt.q_hat = agg.q_hat;
  pt.ci_low = agg.ci_low;
  pt.ci_high = agg.ci_high;
  pt.count_est = CountEstimate(agg.q_hat * t, r_tuples, s_tuples, pt.samples);
  pt.count_low = CountEstimate(agg.ci_low * t, r_tuples, s_tuples, pt.samples);
  pt.count_high =
      CountEstimate(agg.ci_high * t, r_tuples, s_tuples, pt.samples);
  return pt;
}

}  // namespace

RoslRun RunRosl(const RelationStore& r, const RelationStore& s,
                const JoinPredicate& pred, std::size_t k,
                const RoslParams& params, CostClock& clock, ResultStream& sink,
                std::size_t report_every, const ValueFn& value) {
  params.Validate();
  RoslRun run;
  run.state = EstimatorState(r.partition_count());
  sink.set_limit(k);
  DedupLedger ledger(r.partition_count());
  bool halt = false;
  JoinContext ctx{r, s, pred, ledger, clock, sink, &halt};
  Rng rng(MixSeed(params.osl.seed, 0x6f736c));
  const double z = NormalQuantileTwoSided(params.p_conf);
  const std::size_t n_budget = params.osl.failure_budget;

  // Context of the choice that led to the probes now being observed.
  std::size_t fresh_unexplored = 0;
  double draw_probability = 1.0;
  std::vector<std::uint64_t> hits(r.partition_count(), 0);

  auto observe = [&](const ProbeEvent& ev) {
    const std::size_t before_hits = hits[ev.own];
    if (ev.results > 0) ++hits[ev.own];
    SelectionStep st;
    st.step = run.log.size() + 1;
    st.address = ev.own;
    st.tuple_pairs = ev.tuple_pairs;
    SelectionContext sc;
    sc.eps0 = params.eps0;
    sc.failure_budget = n_budget;
    bool floored = false;
    switch (ev.phase) {
      case ProbePhase::kExploreInitial:
        st.phase = SelectionPhase::kFreshPick;
        sc.unexplored = fresh_unexplored;
        st.e = SelectionProbability(st.phase, sc, &floored);
        break;
      case ProbePhase::kExploreContinue:
        st.phase = SelectionPhase::kContinueAfterN;
        sc.p_hat = SmoothedHitRate(before_hits, ev.entry->trials - 1);
        st.e = SelectionProbability(st.phase, sc, &floored);
        break;
      case ProbePhase::kExploit:
        st.phase = SelectionPhase::kExploitDraw;
        st.e = std::max(draw_probability,
                        MinSelectionProbability(params.eps0));
        break;
    }
    if (floored) ++run.floored;
    if (value) {
      const auto all = sink.results();
      for (std::size_t i = all.size() - ev.results; i < all.size(); ++i) {
        const JoinResult& jr = all[i];
        st.y += value(r.partition(jr.r_address).tuples[jr.r_offset],
                      s.partition(jr.s_address).tuples[jr.s_offset]);
      }
    } else {
      st.y = static_cast<double>(ev.results);
    }
    // Uniform design points carry relative weight 1; adaptive steps only
    // enter the negative control.
    if (ev.phase == ProbePhase::kExploreInitial ||
        params.drop_selection_weights) {
      run.state.Add(ev.own, Observation{st.y, 1.0}, ev.tuple_pairs);
    }
    if (report_every > 0 && st.step % report_every == 0) {
      st.report = true;
      run.trace.push_back(
          MakePoint(run.state, st.step, z, r.tuple_count(), s.tuple_count()));
    }
    run.log.push_back(st);
    if (params.max_steps > 0 && run.log.size() >= params.max_steps) {
      halt = true;
    }
  };

  ScanLearner learner(ctx, Side::kR, params.osl, run.stats, observe);
  CursorSource source(s);

  auto draw = [&]() -> std::optional<std::size_t> {
    auto d = RoslExploitDraw(learner.table(), params.eps0, rng);
    if (!d) return std::nullopt;
    draw_probability = d->probability;
    return d->index;
  };

  bool first = true;
  while (!ctx.Done() && !learner.Finished()) {
    SuperRoundRecord rec;
    rec.round = run.stats.rounds.size();
    const std::size_t to_explore = first ? learner.window() : 1;
    first = false;
    for (std::size_t i = 0; i < to_explore && !ctx.Done(); ++i) {
      fresh_unexplored = learner.unexplored();
      auto idx = learner.ExploreNext(source);
      if (!idx) break;
      rec.explored = learner.table()[*idx].address;
      rec.reward = learner.table()[*idx].successes;
    }
    auto pick = ctx.Done() ? std::nullopt : draw();
    while (pick) {
      rec.exploited = learner.table()[*pick].address;
      const ExploitOutcome out = learner.Exploit(*pick);
      if (out.status != ExploitStatus::kPaused) break;
      // The entry fell behind: redraw among all unexploited entries.
      pick = draw();
    }
    rec.results_so_far = sink.size();
    rec.cost = clock.Total();
    run.stats.rounds.push_back(rec);
  }

  if (run.trace.empty() || run.trace.back().step != run.log.size()) {
    run.trace.push_back(MakePoint(run.state, run.log.size(), z,
                                  r.tuple_count(), s.tuple_count()));
  }
  return run;
}

void WriteEstimateTrace(std::ostream& out,
                        std::span<const EstimatePoint> trace) {
  char buf[256];
  for (const auto& p : trace) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%llu\n",
                  p.step, p.q_hat, p.ci_low, p.ci_high, p.count_est,
                  static_cast<unsigned long long>(p.samples));
    out << buf;
  }
}

}  // namespace progjoin
