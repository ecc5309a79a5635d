#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "progjoin/rng.h"
#include "progjoin/storage.h"

namespace progjoin {

enum class Multiplicity { kOneToMany, kManyToMany };
enum class KeyMode { kInteger, kStringWithEdits };

struct GenConfig {
  std::size_t r_tuples = 1000;
  std::size_t s_tuples = 10000;
  // 0 means "r_tuples" in one-to-many mode (one R tuple per key).
  std::size_t key_domain = 0;
  double z = 0.0;
  Multiplicity multiplicity = Multiplicity::kOneToMany;
  KeyMode key_mode = KeyMode::kInteger;
  double edit_rate = 0.0;
  std::size_t payload_len = 0;
  std::uint64_t seed = 0;
  // Upper bound on distinct-skey pairs the string-mode oracle may compare.
  std::uint64_t oracle_cap = 50'000'000;

  std::size_t EffectiveKeyDomain() const;
  void Validate() const;
};

struct GenSummary {
  std::size_t r_tuples = 0;
  std::size_t s_tuples = 0;
  std::size_t distinct_keys = 0;
  std::uint64_t full_join_size = 0;

  // `r=<n> s=<n> keys=<n> join=<n>`
  std::string Line() const;
};

struct GeneratedPair {
  std::vector<Tuple> r;
  std::vector<Tuple> s;
  GenSummary summary;
};

// P(rank i) proportional to 1 / i^z for i = 1..n.
std::vector<double> ZipfPmf(std::size_t n, double z);

// Width of the zero-padded decimal rendering used for string keys.
std::size_t StringKeyWidth(std::size_t key_domain);
std::string EncodeStringKey(std::uint64_t key, std::size_t width);

// Builds both relations in memory, rows already shuffled.
GeneratedPair GeneratePairInMemory(const GenConfig& config);

GenSummary GeneratePair(const GenConfig& config,
                        const std::filesystem::path& out_r,
                        const std::filesystem::path& out_s);

// Exact full-join size by key-frequency multiplication (integer keys) or by
// comparing every distinct (R skey, S skey) pair (string keys).
std::uint64_t ExactJoinSize(const std::vector<Tuple>& r,
                            const std::vector<Tuple>& s, KeyMode mode,
                            std::uint64_t oracle_cap);

// Abstract many-armed reward model: action i succeeds independently with
// probability p_i drawn from U[a, b].
class BernoulliModel {
 public:
  BernoulliModel(std::size_t r_actions, std::size_t s_trials, double a,
                 double b, std::uint64_t seed);

  std::size_t action_count() const { return p_.size(); }
  std::size_t trials_per_action() const { return s_trials_; }
  double probability(std::size_t action) const { return p_[action]; }
  double a() const { return a_; }
  double b() const { return b_; }

  bool Probe(std::size_t action, Rng& rng) const {
    return rng.Bernoulli(p_[action]);
  }

 private:
  std::vector<double> p_;
  std::size_t s_trials_;
  double a_;
  double b_;
};

BernoulliModel MakeBernoulliModel(std::size_t r_actions, std::size_t s_trials,
                                  double a, double b, std::uint64_t seed);

}  // namespace progjoin
