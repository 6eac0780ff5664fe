#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "kmatch/partition.hpp"
#include "kmatch/seed.hpp"

namespace {

using kmatch::HashScheme;
using kmatch::KWiseHash;
using kmatch::SchemeParams;
using kmatch::UniversalHash;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

std::uint64_t big_ceil_scaled_ln(unsigned c, std::uint64_t k) {
  const BigFloat x = BigFloat(c) * boost::multiprecision::log(BigFloat(k));
  return boost::multiprecision::ceil(x).convert_to<std::uint64_t>();
}

TEST(SchemeParams, SmallUniverse) {
  const auto p = SchemeParams::compute(16, 2);
  EXPECT_EQ(p.u, 4U);
  EXPECT_EQ(p.d, 2U);
  EXPECT_EQ(p.d1, 4U);
  EXPECT_EQ(p.d2, 6U);
  EXPECT_EQ(p.d3, 100U);
  EXPECT_EQ(p.kappa, 9U);
  EXPECT_EQ(p.range(), 2400U);
}

TEST(SchemeParams, LargerK) {
  const auto p = SchemeParams::compute(1024, 8);
  EXPECT_EQ(p.u, 10U);
  EXPECT_EQ(p.d, 2U);
  EXPECT_EQ(p.d1, 4U);
  EXPECT_EQ(p.d2, 17U);
  EXPECT_EQ(p.d3, 784U);
}

TEST(SchemeParams, UniverseBits) {
  EXPECT_EQ(SchemeParams::compute(2, 2).u, 1U);
  EXPECT_EQ(SchemeParams::compute(3, 2).u, 2U);
  EXPECT_EQ(SchemeParams::compute(4, 2).u, 2U);
  EXPECT_EQ(SchemeParams::compute(5, 2).u, 3U);
  EXPECT_EQ(SchemeParams::compute(4096, 2).u, 12U);
  EXPECT_EQ(SchemeParams::compute(4097, 2).u, 13U);
}

TEST(SchemeParams, KOneUsesKTwoValues) {
  auto one = SchemeParams::compute(100, 1);
  auto two = SchemeParams::compute(100, 2);
  EXPECT_EQ(one.k, 1U);
  EXPECT_EQ(one.k_eff, 2U);
  one.k = two.k;
  EXPECT_EQ(one, two);
}

TEST(SchemeParams, RejectsDegenerateInput) {
  EXPECT_THROW(SchemeParams::compute(1, 2), kmatch::ParameterError);
  EXPECT_THROW(SchemeParams::compute(0, 2), kmatch::ParameterError);
  EXPECT_THROW(SchemeParams::compute(10, 0), kmatch::ParameterError);
  kmatch::Rng rng(1);
  EXPECT_THROW(HashScheme::build(1, 3, rng), kmatch::ParameterError);
}

TEST(SchemeParams, CeilingsAgreeWithHighPrecision) {
  for (std::uint64_t k = 2; k <= 20000; k += (k < 300 ? 1 : 97)) {
    const auto p = SchemeParams::compute(1ULL << 20, k);
    ASSERT_EQ(p.d2, big_ceil_scaled_ln(8, k)) << k;
    const auto c13 = big_ceil_scaled_ln(13, k);
    ASSERT_EQ(p.d3, c13 * c13) << k;
    ASSERT_EQ(p.kappa, big_ceil_scaled_ln(12, k)) << k;
    ASSERT_EQ(p.part_size_limit(), c13 - 1) << k;
    // 2^{d-1} < k / ln k <= 2^d
    const BigFloat ratio = BigFloat(k) / boost::multiprecision::log(BigFloat(k));
    ASSERT_LE(ratio, BigFloat(p.d1)) << k;
    if (p.d > 1) ASSERT_GT(ratio, BigFloat(p.d1 / 2)) << k;
  }
}

TEST(HashScheme, ShapeAndDeterminism) {
  kmatch::Rng a(9), b(9);
  const auto s1 = HashScheme::build(1000, 5, a);
  const auto s2 = HashScheme::build(1000, 5, b);
  const auto& p = s1.params();
  EXPECT_EQ(s1.partition_hash().kappa(), p.kappa);
  EXPECT_EQ(s1.partition_hash().in_bits(), p.u);
  EXPECT_EQ(s1.partition_hash().out_bits(), p.d);
  for (std::uint64_t j = 0; j < p.d1; ++j) {
    for (std::uint64_t i = 0; i < p.d2; ++i) {
      EXPECT_EQ(s1.member(j, i).range(), p.d3);
      EXPECT_EQ(s1.member(j, i).modulus(), 1009U);
    }
  }
  EXPECT_THROW(s1.member(p.d1, 0), std::out_of_range);
  for (std::uint64_t x = 0; x < 1000; ++x) ASSERT_EQ(s1.relation(x), s2.relation(x));
  EXPECT_EQ(s1.stored_words(), p.kappa + 2 * p.d1 * p.d2);
}

TEST(HashScheme, RelationStructure) {
  kmatch::Rng rng(21);
  for (std::uint64_t k : {2ULL, 3ULL, 6ULL, 11ULL}) {
    const auto s = HashScheme::build(700, k, rng);
    const auto& p = s.params();
    for (std::uint64_t x = 0; x < 700; ++x) {
      const auto g = s.relation(x);
      ASSERT_EQ(g.size(), p.d2);
      const std::uint64_t j = s.part_of(x);
      for (std::uint64_t i = 0; i < p.d2; ++i) {
        const std::uint64_t lo = j * p.d2 * p.d3 + i * p.d3;
        ASSERT_GE(g[i], lo);
        ASSERT_LT(g[i], lo + p.d3);
        ASSERT_LT(g[i], p.range());
      }
      ASSERT_EQ(std::set<std::uint64_t>(g.begin(), g.end()).size(), g.size());
    }
    EXPECT_THROW(s.relation(700), kmatch::DomainError);
  }
}

// Hand-built scheme for U = 16, k = 2 (d1 = 4, d2 = 6, d3 = 100).
HashScheme fixed_scheme(std::uint64_t part, std::uint64_t offset) {
  const auto p = SchemeParams::compute(16, 2);
  std::vector<std::uint64_t> coeffs(p.kappa, 0);
  coeffs[0] = part;
  std::vector<UniversalHash> members;
  for (std::uint64_t t = 0; t < p.d1 * p.d2; ++t) members.emplace_back(101, 1, offset, p.d3);
  return HashScheme(p, KWiseHash(p.u, p.d, coeffs), members);
}

TEST(HashScheme, ZeroOffsetsGiveBlockStarts) {
  const auto s = fixed_scheme(0, 0);
  EXPECT_EQ(s.relation(0), (std::vector<std::uint64_t>{0, 100, 200, 300, 400, 500}));
}

TEST(HashScheme, LargestIndex) {
  const auto s = fixed_scheme(3, 99);
  const auto g = s.relation(0);
  EXPECT_EQ(g.back(), 2399U);
  EXPECT_EQ(g.back(), s.params().range() - 1);
}

TEST(Preimages, EveryKeyInExactlyD2Sets) {
  kmatch::Rng rng(4);
  const auto s = HashScheme::build(300, 4, rng);
  const auto single = kmatch::collect_preimages(s, 1);
  EXPECT_EQ(single.size(), s.params().d2);
  for (const auto& [idx, xs] : single) EXPECT_EQ(xs, std::vector<std::uint64_t>{0});

  const auto t = kmatch::collect_preimages(s, 300);
  std::vector<std::uint64_t> memberships(300, 0);
  for (const auto& [idx, xs] : t) {
    for (auto x : xs) ++memberships[x];
  }
  for (auto m : memberships) EXPECT_EQ(m, s.params().d2);
  EXPECT_THROW(kmatch::collect_preimages(s, 301), kmatch::DomainError);
}

TEST(IntervalLemma, ExhaustiveNoViolations) {
  for (std::uint64_t k : {2ULL, 3ULL, 4ULL}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      kmatch::Rng rng = kmatch::make_rng(seed, {k});
      const auto s = HashScheme::build(512, k, rng);
      const auto rep = kmatch::check_interval_lemma(s, 512);
      EXPECT_EQ(rep.block_violations, 0U) << "k=" << k;
      EXPECT_EQ(rep.part_violations, 0U) << "k=" << k;
      EXPECT_EQ(rep.cross_violations, 0U) << "k=" << k;
    }
  }
}

TEST(Witness, SingletonPartsAlwaysPerfect) {
  kmatch::Rng rng(30);
  const auto s = HashScheme::build(64, 2, rng);
  // Two keys in different parts.
  std::uint64_t a = 0, b = 1;
  while (s.part_of(b) == s.part_of(a)) ++b;
  const std::vector<std::uint64_t> subset{a, b};
  const auto pre = kmatch::collect_preimages(s, 64);
  const auto rep = kmatch::find_witness(subset, s, &pre);
  EXPECT_TRUE(rep.part_sizes_ok);
  EXPECT_TRUE(rep.perfect_per_part);
  ASSERT_TRUE(rep.witness.has_value());
  ASSERT_TRUE(rep.conditions_hold.has_value());
  EXPECT_TRUE(*rep.conditions_hold);
  const auto ga = s.relation(a);
  const auto gb = s.relation(b);
  EXPECT_EQ((*rep.witness)[0], ga[0]);  // first member is injective on a singleton
  EXPECT_EQ((*rep.witness)[1], gb[0]);
}

TEST(Witness, ReturnedIndicesAreDistinctWithDisjointPreimages) {
  int returned = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    kmatch::Rng rng = kmatch::make_rng(seed, {77});
    const std::uint64_t k = 3 + seed % 4;
    const auto s = HashScheme::build(256, k, rng);
    const auto pre = kmatch::collect_preimages(s, 256);
    std::vector<std::uint64_t> keys(256);
    std::iota(keys.begin(), keys.end(), 0);
    std::shuffle(keys.begin(), keys.end(), rng);
    keys.resize(k);
    const auto rep = kmatch::find_witness(keys, s, &pre);
    if (!rep.witness) continue;
    ++returned;
    const auto& w = *rep.witness;
    EXPECT_EQ(std::set<std::uint64_t>(w.begin(), w.end()).size(), k);
    ASSERT_TRUE(rep.conditions_hold.has_value());
    EXPECT_TRUE(*rep.conditions_hold);
    for (std::size_t t = 0; t < k; ++t) {
      const auto g = s.relation(keys[t]);
      EXPECT_NE(std::find(g.begin(), g.end(), w[t]), g.end());
    }
  }
  EXPECT_GT(returned, 50);
}

TEST(Witness, RejectsWrongSubsetSize) {
  kmatch::Rng rng(2);
  const auto s = HashScheme::build(64, 3, rng);
  const std::vector<std::uint64_t> two{1, 2};
  const std::vector<std::uint64_t> dup{1, 1, 2};
  EXPECT_THROW(kmatch::find_witness(two, s), kmatch::ParameterError);
  EXPECT_THROW(kmatch::find_witness(dup, s), kmatch::ParameterError);
}

TEST(Witness, HighSuccessRateForKEight) {
  // Bound 1 - 4/(k^3 ln k) ~ 0.9962; a short run with a loose threshold.
  int ok = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    kmatch::Rng rng = kmatch::make_rng(1234, {static_cast<std::uint64_t>(t)});
    const auto s = HashScheme::build(4096, 8, rng);
    std::set<std::uint64_t> pick;
    std::uniform_int_distribution<std::uint64_t> key(0, 4095);
    while (pick.size() < 8) pick.insert(key(rng));
    const std::vector<std::uint64_t> subset(pick.begin(), pick.end());
    ok += kmatch::find_witness(subset, s).witness ? 1 : 0;
  }
  EXPECT_GE(ok, trials * 97 / 100);
}

}  // namespace
