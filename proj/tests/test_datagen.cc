#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "progjoin/datagen.h"
#include "progjoin/error.h"
#include "support/oracle.h"

using namespace progjoin;

TEST_CASE("zipf pmf closed forms") {
  auto u = ZipfPmf(3, 0.0);
  for (double p : u) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  auto h = ZipfPmf(2, 1.0);
  CHECK(h[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(h[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  auto q = ZipfPmf(2, 2.0);
  CHECK(q[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(ZipfPmf(0, 1.0), DomainError);
  CHECK_THROWS_AS(ZipfPmf(3, -0.5), DomainError);
}

TEST_CASE("zipf pmf is normalized and non-increasing") {
  for (std::size_t n : {1u, 2u, 17u, 1000u, 100000u}) {
    for (double z : {0.0, 0.5, 1.0, 1.5, 3.0}) {
      const auto pmf = ZipfPmf(n, z);
      long double total = 0.0L;
      for (std::size_t i = 0; i < n; ++i) {
        total += pmf[i];
        if (i > 0) CHECK(pmf[i] <= pmf[i - 1]);
      }
      CHECK(std::abs(static_cast<double>(total) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("uniform one-to-many join has one match per S tuple") {
  GenConfig c;
  c.r_tuples = 500;
  c.s_tuples = 3000;
  c.z = 0.0;
  c.seed = 4;
  const auto pair = GeneratePairInMemory(c);
  CHECK(pair.summary.full_join_size == 3000);
  std::map<std::uint64_t, int> r_keys;
  for (const auto& t : pair.r) ++r_keys[t.key];
  CHECK(r_keys.size() == 500);
  for (const auto& [k, n] : r_keys) CHECK(n == 1);
}

TEST_CASE("rank-1 frequency is within 3 sigma of its binomial mean") {
  GenConfig c;
  c.r_tuples = 1000;
  c.s_tuples = 10000;
  c.key_domain = 1000;
  c.z = 1.5;
  c.multiplicity = Multiplicity::kManyToMany;
  c.seed = 12;
  const auto pair = GeneratePairInMemory(c);
  const double p0 = ZipfPmf(1000, 1.5)[0];
  std::size_t hits = 0;
  for (const auto& t : pair.s) hits += t.key == 0;
  const double mean = p0 * 10000;
  const double sigma = std::sqrt(10000 * p0 * (1 - p0));
  CHECK(std::abs(static_cast<double>(hits) - mean) <= 3 * sigma);
}

TEST_CASE("exact join size matches the brute-force join") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    GenConfig c;
    c.r_tuples = 200 + seed * 40;
    c.s_tuples = 500;
    c.key_domain = seed % 2 ? 60 : 0;
    c.multiplicity = seed % 2 ? Multiplicity::kManyToMany
                              : Multiplicity::kOneToMany;
    c.z = 0.5 * static_cast<double>(seed % 3);
    c.seed = seed;
    const bool strings = seed > 3;
    c.key_mode = strings ? KeyMode::kStringWithEdits : KeyMode::kInteger;
    c.edit_rate = 0.25;
    const auto pair = GeneratePairInMemory(c);
    const auto truth = testing::OracleJoin(
        pair.r, pair.s, 1, strings ? testing::Kind::kEd1 : testing::Kind::kEq);
    CHECK(pair.summary.full_join_size == truth.size());
  }
}

TEST_CASE("string keys are padded decimals with at most one edit") {
  CHECK(StringKeyWidth(10) == 4);
  CHECK(StringKeyWidth(100000) == 5);
  CHECK(EncodeStringKey(42, 4) == "0042");
  GenConfig c;
  c.r_tuples = 300;
  c.s_tuples = 2000;
  c.key_mode = KeyMode::kStringWithEdits;
  c.edit_rate = 0.5;
  c.seed = 3;
  const auto pair = GeneratePairInMemory(c);
  std::size_t edited = 0;
  for (const auto& t : pair.r) CHECK(*t.skey == EncodeStringKey(t.key, 4));
  for (const auto& t : pair.s) {
    const auto d = testing::Levenshtein(*t.skey, EncodeStringKey(t.key, 4));
    CHECK(d <= 1);
    edited += d;
  }
  CHECK(edited > 800);
  CHECK(edited < 1200);
}

TEST_CASE("fixed seed gives byte-identical files") {
  GenConfig c;
  c.r_tuples = 100;
  c.s_tuples = 700;
  c.z = 1.5;
  c.seed = 7;
  c.key_mode = KeyMode::kStringWithEdits;
  c.edit_rate = 0.1;
  c.payload_len = 3;
  const auto dir = std::filesystem::temp_directory_path();
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const auto s1 = GeneratePair(c, dir / "pj_r1.rel", dir / "pj_s1.rel");
  const auto s2 = GeneratePair(c, dir / "pj_r2.rel", dir / "pj_s2.rel");
  CHECK(s1.Line() == s2.Line());
  CHECK(slurp(dir / "pj_r1.rel") == slurp(dir / "pj_r2.rel"));
  CHECK(slurp(dir / "pj_s1.rel") == slurp(dir / "pj_s2.rel"));
  CHECK(!slurp(dir / "pj_s1.rel").empty());
  const RelationStore loaded = LoadRelation(dir / "pj_s1.rel", 320);
  CHECK(loaded.tuple_count() == 700);
  CHECK(loaded.partition(0).tuples[0].payload.size() == 3);
}

TEST_CASE("summary line format") {
  GenSummary s{10, 20, 5, 99};
  CHECK(s.Line() == "r=10 s=20 keys=5 join=99");
}

TEST_CASE("generator rejects invalid configurations") {
  GenConfig c;
  c.z = -1;
  CHECK_THROWS_AS(GeneratePairInMemory(c), DomainError);
  c.z = 1;
  c.edit_rate = 1.5;
  CHECK_THROWS_AS(GeneratePairInMemory(c), DomainError);
  c.edit_rate = 0;
  c.key_domain = 10;  // fewer keys than R tuples in one-to-many mode
  CHECK_THROWS_AS(GeneratePairInMemory(c), ConfigError);
}

TEST_CASE("string oracle refuses oversized instances") {
  GenConfig c;
  c.r_tuples = 200;
  c.s_tuples = 200;
  c.key_mode = KeyMode::kStringWithEdits;
  c.oracle_cap = 100;
  c.seed = 1;
  CHECK_THROWS_AS(GeneratePairInMemory(c), OracleTooLarge);
}

TEST_CASE("bernoulli reward model") {
  Rng rng(5);
  const auto ones = MakeBernoulliModel(10, 5, 1.0, 1.0, 1);
  const auto zeros = MakeBernoulliModel(10, 5, 0.0, 0.0, 1);
  for (std::size_t i = 0; i < 10; ++i) {
    for (int t = 0; t < 20; ++t) {
      CHECK(ones.Probe(i, rng));
      CHECK_FALSE(zeros.Probe(i, rng));
    }
  }
  const auto wide = MakeBernoulliModel(100000, 1, 0.0, 1.0, 9);
  double total = 0;
  for (std::size_t i = 0; i < wide.action_count(); ++i) {
    total += wide.probability(i);
  }
  CHECK(std::abs(total / 100000 - 0.5) < 0.01);
  CHECK_THROWS_AS(MakeBernoulliModel(3, 3, 0.6, 0.4, 1), DomainError);
}
