#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rmsfilter/bits.hpp"
#include "rmsfilter/hashing.hpp"

using namespace rmsf;

namespace {

auto chi_square_p(const std::vector<double>& counts, double expected) -> double {
  double stat = 0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Reference modular arithmetic on unsigned __int128 with the % operator.
auto ref_mod(unsigned __int128 x) -> std::uint64_t { return static_cast<std::uint64_t>(x % kMersenne61); }

}  // namespace

TEST_CASE("Mersenne reduction matches the % operator") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200000; ++i) {
    const std::uint64_t a = rng() % kMersenne61;
    const std::uint64_t b = rng() % kMersenne61;
    const auto prod = static_cast<unsigned __int128>(a) * b;
    REQUIRE(mod_mersenne(prod) == ref_mod(prod));
    REQUIRE(mul_mod(a, b) == ref_mod(prod));
  }
  CHECK(mod_mersenne(kMersenne61) == 0);
  CHECK(mod_mersenne(static_cast<unsigned __int128>(kMersenne61) * kMersenne61) == 0);
}

TEST_CASE("pairwise and k-wise evaluation against direct formulas") {
  const PairwiseHash h(12345, 678, 1000);
  for (std::uint64_t x : {0ULL, 1ULL, 99ULL, (1ULL << 60) - 1}) {
    const auto v = ref_mod(static_cast<unsigned __int128>(12345) * x + 678) % 1000;
    CHECK(h(x) == v);
  }
  const KWiseHash k({3, 5, 7}, 97);  // 3x^2 + 5x + 7
  for (std::uint64_t x : {0ULL, 2ULL, 1000003ULL}) {
    const auto xx = static_cast<unsigned __int128>(x % kMersenne61);
    const auto v = (3 * ref_mod(xx * xx) % kMersenne61 + ref_mod(5 * xx) + 7) % kMersenne61 % 97;
    CHECK(k(x) == v);
  }
  CHECK_THROWS_AS(PairwiseHash(0, 1, 4), std::invalid_argument);
  CHECK(default_independence(100000) == 6);  // ceil(3.162 + 2.371)
}

TEST_CASE("Feistel is a bijection on 2^16") {
  std::mt19937_64 rng(23);
  for (unsigned left : {0U, 1U, 7U, 8U, 12U, 16U}) {
    const auto perm = FeistelPermutation::draw(rng, 16, left, 6);
    std::vector<bool> seen(1u << 16, false);
    for (std::uint64_t x = 0; x < (1u << 16); ++x) {
      const auto img = perm.evaluate(x);
      REQUIRE(img.left < (std::uint64_t{1} << left));
      REQUIRE(img.right < (std::uint64_t{1} << (16 - left)));
      const std::uint64_t packed = (img.left << (16 - left)) | img.right;
      REQUIRE_FALSE(seen[packed]);
      seen[packed] = true;
      REQUIRE(perm.invert(img) == x);
    }
  }
  const auto perm = FeistelPermutation::draw(rng, 16, 8, 6);
  CHECK_THROWS_AS((void)perm.evaluate(1u << 16), OutOfUniverse);
}

TEST_CASE("plans are deterministic per seed") {
  const auto params = derive_params(100000, 6);
  const auto a = HashPlan::build(params, 1);
  const auto b = HashPlan::build(params, 1);
  const auto c = HashPlan::build(params, 2);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.bin_hash().coefficients() != c.bin_hash().coefficients());
  CHECK(a.subsets() == (std::uint64_t{1} << 15));  // ceil(1e5^0.9) = 31623 -> 2^15
  CHECK(a.bin_hash().range() == params.bins);
  CHECK(a.quotient_hash().range() == params.bin_mean_eff);
  CHECK(a.remainder_hash().range() == 64);
  CHECK(a.carter_hash().range() == params.u);
}

TEST_CASE("single subset gives h1 = 0") {
  ParamOverrides ov;
  ov.subsets = 1;
  const auto plan = HashPlan::build(derive_params(1u << 12, 4, ov), 9);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = rng() & bits::low_mask(plan.universe_bits());
    CHECK(plan.permute(x).left == 0);
    CHECK(plan.locate(x).subset == 0);
  }
}

TEST_CASE("locate and reduce") {
  const auto params = derive_params(100000, 6);
  const auto plan = HashPlan::build(params, 4);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t x = rng() >> 4;
    const auto [h1, h2] = plan.permute(x);
    const auto loc = plan.locate(x);
    CHECK(loc.subset == h1);
    CHECK(loc.bin == plan.bin_hash()(h2));
    CHECK(loc.quotient == plan.quotient_hash()(h2));
    CHECK(loc.remainder == plan.remainder_hash()(h2));
    const std::uint64_t y = plan.reduce(x);
    CHECK(y < params.dictionary_universe());
    CHECK(y == ((loc.bin * 8 + loc.quotient) << 6 | loc.remainder));
  }
  CHECK_THROWS_AS((void)plan.locate(std::uint64_t{1} << 60), OutOfUniverse);

  const auto raw = HashPlan::build(params, 4, HashMode::raw_bits);
  CHECK(raw.reduce(12345) == 12345);
  CHECK(raw.reduce(params.dictionary_universe() + 7) == 7);
  const auto carter = HashPlan::build(params, 4, HashMode::carter);
  CHECK(carter.reduce(99) == carter.carter_hash()(99));
}

TEST_CASE("bin hash is uniform (chi-square)") {
  const auto params = derive_params(100000, 6);
  const auto plan = HashPlan::build(params, 31);
  std::vector<double> counts(params.bins, 0);
  std::mt19937_64 rng(8);
  const std::uint64_t samples = 40 * params.bins;
  for (std::uint64_t i = 0; i < samples; ++i) counts[plan.locate(rng() >> 4).bin] += 1;
  CHECK(chi_square_p(counts, 40.0) > 0.001);

  std::vector<double> q(params.bin_mean_eff, 0);
  std::vector<double> r(64, 0);
  for (int i = 0; i < 200000; ++i) {
    const auto loc = plan.locate(rng() >> 4);
    q[loc.quotient] += 1;
    r[loc.remainder] += 1;
  }
  CHECK(chi_square_p(q, 200000.0 / 8) > 0.001);
  CHECK(chi_square_p(r, 200000.0 / 64) > 0.001);
}

TEST_CASE("pairwise family is 2-independent (multinomial 3 sigma)") {
  // For fixed x != y, (h(x), h(y)) over 10^4 independent draws should be
  // uniform over 16 cells; the chi-square statistic has mean 15, sd sqrt(30).
  const double bound = 15.0 + 3.0 * std::sqrt(30.0);
  const std::pair<std::uint64_t, std::uint64_t> pairs[] = {{0, 1}, {1, 2}, {7, 1u << 20}, {(1ULL << 59) + 3, 42}};
  for (auto [x, y] : pairs) {
    std::vector<double> cells(16, 0);
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      std::mt19937_64 rng(seed);
      const auto h = PairwiseHash::draw(rng, 4);
      cells[h(x) * 4 + h(y)] += 1;
    }
    double stat = 0;
    for (double c : cells) stat += (c - 625.0) * (c - 625.0) / 625.0;
    CAPTURE(x);
    CAPTURE(y);
    CHECK(stat <= bound);
  }
}

TEST_CASE("plan JSON round trip") {
  const auto params = derive_params(100000, 6);
  for (auto mode : {HashMode::succinct, HashMode::carter, HashMode::raw_bits}) {
    const auto plan = HashPlan::build(params, 77, mode);
    const auto j = plan.to_json();
    CHECK(HashPlan::from_json(nlohmann::json::parse(j.dump())) == plan);
    CHECK(j.at("mode") == to_string(mode));
  }
  CHECK(parse_hash_mode("carter") == HashMode::carter);
  CHECK_THROWS_AS(parse_hash_mode("md5"), std::invalid_argument);
}
