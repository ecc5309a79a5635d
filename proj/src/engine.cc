#include "progjoin/engine.h"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "progjoin/edit_distance.h"
#include "progjoin/error.h"

namespace progjoin {

bool JoinPredicate::Matches(const Tuple& r, const Tuple& s) const {
  switch (kind_) {
    case PredicateKind::kKeyEquality:
      return r.key == s.key;
    case PredicateKind::kEditDistanceLe1:
      if (!r.skey || !s.skey) {
        throw ConfigError("edit-distance predicate needs string keys");
      }
      return WithinEditDistanceOne(*r.skey, *s.skey);
    case PredicateKind::kCustom:
      return fn_(r, s);
  }
  return false;
}

bool Evaluate(const JoinPredicate& pred, const Tuple& r, const Tuple& s,
              CostClock& clock) {
  ++clock.probes;
  return pred.Matches(r, s);
}

std::vector<double> ResultStream::CostStamps() const {
  std::vector<double> stamps;
  stamps.reserve(results_.size());
  for (const auto& r : results_) stamps.push_back(r.cost_stamp);
  return stamps;
}

bool DedupLedger::Record(std::size_t r, std::size_t s) {
  if (r >= probed_.size()) probed_.resize(r + 1);
  if (!probed_[r].Insert(s)) return false;
  ++pairs_;
  return true;
}

ProbeOutcome ProbePartitions(const Partition& pr, const Partition& ps,
                             const JoinPredicate& pred, DedupLedger& ledger,
                             CostClock& clock, ResultStream& sink) {
  ProbeOutcome out;
  if (ledger.Contains(pr.index, ps.index)) {
    out.skipped = true;
    return out;
  }
  const auto r_addr = static_cast<std::uint32_t>(pr.index);
  const auto s_addr = static_cast<std::uint32_t>(ps.index);
  for (std::size_t i = 0; i < pr.tuples.size(); ++i) {
    for (std::size_t j = 0; j < ps.tuples.size(); ++j) {
      if (sink.full()) {
        out.complete = false;
        return out;
      }
      ++out.probes;
      if (Evaluate(pred, pr.tuples[i], ps.tuples[j], clock)) {
        sink.Emit({r_addr, static_cast<std::uint32_t>(i), s_addr,
                   static_cast<std::uint32_t>(j), clock.Total()});
        ++out.results;
      }
    }
  }
  ledger.Record(pr.index, ps.index);
  return out;
}

double DiscountedAverage(std::span<const double> stamps, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  for (double t : stamps) {
    weight *= gamma;
    total += weight * t;
  }
  return total;
}

double FailureProportion(const std::vector<bool>& probe_log) {
  if (probe_log.empty()) return 0.0;
  std::size_t failures = 0;
  for (bool ok : probe_log) failures += ok ? 0 : 1;
  return static_cast<double>(failures) / static_cast<double>(probe_log.size());
}

void WriteResultStream(std::ostream& out, const ResultStream& stream) {
  char buf[32];
  for (const auto& r : stream.results()) {
    // %.17g round-trips doubles exactly.
    std::snprintf(buf, sizeof buf, "%.17g", r.cost_stamp);
    out << r.r_address << ',' << r.r_offset << ',' << r.s_address << ','
        << r.s_offset << ',' << buf << '\n';
  }
}

}  // namespace progjoin
