#include "progjoin/datagen.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "progjoin/edit_distance.h"
#include "progjoin/error.h"

namespace progjoin {

namespace {

enum Stream : std::uint64_t {
  kRKeys = 1,
  kSKeys = 2,
  kEdits = 3,
  kShuffleR = 4,
  kShuffleS = 5,
};

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double z) : cdf_(ZipfPmf(n, z)) {
    std::partial_sum(cdf_.begin(), cdf_.end(), cdf_.begin());
    cdf_.back() = 1.0;
  }

  // 0-based rank.
  std::size_t Draw(Rng& rng) const {
    const double u = rng.Uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  }

 private:
  std::vector<double> cdf_;
};

Tuple MakeTuple(std::uint64_t key, std::size_t payload_len) {
  Tuple t;
  t.key = key;
  t.payload.assign(payload_len, std::byte{0});
  return t;
}

std::string WithOneSubstitution(std::string s, Rng& rng) {
  const std::size_t pos = rng.Below(s.size());
  const char current = s[pos];
  // One of the nine other digits.
  char replacement = static_cast<char>('0' + rng.Below(9));
  if (replacement >= current) ++replacement;
  s[pos] = replacement;
  return s;
}

}  // namespace

std::size_t GenConfig::EffectiveKeyDomain() const {
  return key_domain == 0 ? r_tuples : key_domain;
}

void GenConfig::Validate() const {
  if (EffectiveKeyDomain() == 0) {
    throw DomainError("key_domain must be at least 1");
  }
  if (!(z >= 0.0) || !std::isfinite(z)) {
    throw DomainError("Zipf exponent z must be >= 0");
  }
  if (!(edit_rate >= 0.0 && edit_rate <= 1.0)) {
    throw DomainError("edit_rate must lie in [0, 1]");
  }
  if (multiplicity == Multiplicity::kOneToMany &&
      EffectiveKeyDomain() < r_tuples) {
    throw ConfigError(
        "one-to-many needs distinct R keys: key_domain must be >= r_tuples");
  }
}

std::string GenSummary::Line() const {
  return "r=" + std::to_string(r_tuples) + " s=" + std::to_string(s_tuples) +
         " keys=" + std::to_string(distinct_keys) +
         " join=" + std::to_string(full_join_size);
}

std::vector<double> ZipfPmf(std::size_t n, double z) {
  if (n == 0) throw DomainError("zipf_pmf: n must be at least 1");
  if (!(z >= 0.0)) throw DomainError("zipf_pmf: z must be >= 0");
  std::vector<double> pmf(n);
  for (std::size_t i = 0; i < n; ++i) {
    pmf[i] = std::pow(static_cast<double>(i + 1), -z);
  }
  // Sum smallest-first to keep the normalization error near one ulp.
  double total = 0.0;
  for (std::size_t i = n; i-- > 0;) total += pmf[i];
  for (auto& p : pmf) p /= total;
  return pmf;
}

std::size_t StringKeyWidth(std::size_t key_domain) {
  std::size_t width = 1;
  for (std::size_t v = key_domain > 0 ? key_domain - 1 : 0; v >= 10; v /= 10) {
    ++width;
  }
  return std::max<std::size_t>(width, 4);
}

std::string EncodeStringKey(std::uint64_t key, std::size_t width) {
  std::string digits = std::to_string(key);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return digits;
}

std::uint64_t ExactJoinSize(const std::vector<Tuple>& r,
                            const std::vector<Tuple>& s, KeyMode mode,
                            std::uint64_t oracle_cap) {
  if (mode == KeyMode::kInteger) {
    std::unordered_map<std::uint64_t, std::uint64_t> r_freq;
    for (const auto& t : r) ++r_freq[t.key];
    std::uint64_t total = 0;
    for (const auto& t : s) {
      auto it = r_freq.find(t.key);
      if (it != r_freq.end()) total += it->second;
    }
    return total;
  }
  std::map<std::string, std::uint64_t> r_freq;
  std::map<std::string, std::uint64_t> s_freq;
  for (const auto& t : r) ++r_freq[t.skey.value_or("")];
  for (const auto& t : s) ++s_freq[t.skey.value_or("")];
  const auto pairs = static_cast<std::uint64_t>(r_freq.size()) * s_freq.size();
  if (pairs > oracle_cap) {
    throw OracleTooLarge("string-key oracle needs " + std::to_string(pairs) +
                         " distinct comparisons; cap is " +
                         std::to_string(oracle_cap));
  }
  std::uint64_t total = 0;
  for (const auto& [rk, rf] : r_freq) {
    for (const auto& [sk, sf] : s_freq) {
      if (WithinEditDistanceOne(rk, sk)) total += rf * sf;
    }
  }
  return total;
}

GeneratedPair GeneratePairInMemory(const GenConfig& config) {
  config.Validate();
  const std::size_t domain = config.EffectiveKeyDomain();
  const ZipfSampler zipf(domain, config.z);

  GeneratedPair out;
  out.r.reserve(config.r_tuples);
  out.s.reserve(config.s_tuples);

  Rng r_rng(MixSeed(config.seed, kRKeys));
  if (config.multiplicity == Multiplicity::kOneToMany) {
    std::vector<std::uint64_t> keys(domain);
    std::iota(keys.begin(), keys.end(), std::uint64_t{0});
    if (config.r_tuples < domain) {
      r_rng.Shuffle(keys);
      keys.resize(config.r_tuples);
    }
    for (auto k : keys) out.r.push_back(MakeTuple(k, config.payload_len));
  } else {
    for (std::size_t i = 0; i < config.r_tuples; ++i) {
      out.r.push_back(MakeTuple(zipf.Draw(r_rng), config.payload_len));
    }
  }

  // Rank i (0-based) is key i; heap order is randomized below.
  Rng s_rng(MixSeed(config.seed, kSKeys));
  for (std::size_t i = 0; i < config.s_tuples; ++i) {
    out.s.push_back(MakeTuple(zipf.Draw(s_rng), config.payload_len));
  }

  if (config.key_mode == KeyMode::kStringWithEdits) {
    const std::size_t width = StringKeyWidth(domain);
    for (auto& t : out.r) t.skey = EncodeStringKey(t.key, width);
    // Only the foreign-key side carries data-entry errors.
    Rng edit_rng(MixSeed(config.seed, kEdits));
    for (auto& t : out.s) {
      std::string enc = EncodeStringKey(t.key, width);
      if (edit_rng.Bernoulli(config.edit_rate)) {
        enc = WithOneSubstitution(std::move(enc), edit_rng);
      }
      t.skey = std::move(enc);
    }
  }

  Rng(MixSeed(config.seed, kShuffleR)).Shuffle(out.r);
  Rng(MixSeed(config.seed, kShuffleS)).Shuffle(out.s);

  std::vector<std::uint64_t> used;
  used.reserve(out.r.size() + out.s.size());
  for (const auto& t : out.r) used.push_back(t.key);
  for (const auto& t : out.s) used.push_back(t.key);
  std::sort(used.begin(), used.end());
  out.summary.distinct_keys = static_cast<std::size_t>(
      std::unique(used.begin(), used.end()) - used.begin());
  out.summary.r_tuples = out.r.size();
  out.summary.s_tuples = out.s.size();
  out.summary.full_join_size =
      ExactJoinSize(out.r, out.s, config.key_mode, config.oracle_cap);
  return out;
}

GenSummary GeneratePair(const GenConfig& config,
                        const std::filesystem::path& out_r,
                        const std::filesystem::path& out_s) {
  auto pair = GeneratePairInMemory(config);
  WriteRelation(out_r, pair.r);
  WriteRelation(out_s, pair.s);
  return pair.summary;
}

BernoulliModel::BernoulliModel(std::size_t r_actions, std::size_t s_trials,
                               double a, double b, std::uint64_t seed)
    : s_trials_(s_trials), a_(a), b_(b) {
  if (!(a >= 0.0 && a <= b && b <= 1.0)) {
    throw DomainError("bernoulli_matrix requires 0 <= a <= b <= 1");
  }
  Rng rng(seed);
  p_.resize(r_actions);
  for (auto& p : p_) p = a + (b - a) * rng.Uniform();
}

BernoulliModel MakeBernoulliModel(std::size_t r_actions, std::size_t s_trials,
                                  double a, double b, std::uint64_t seed) {
  return BernoulliModel(r_actions, s_trials, a, b, seed);
}

}  // namespace progjoin
