#include <cmath>
#include <random>
#include <unordered_map>

#include "doctest.h"
#include "rmsfilter/rms_dictionary.hpp"

using namespace rmsf;

namespace {

auto defaults() -> FilterParams { return derive_params(100000, 6); }

auto key(const FilterParams& p, std::uint64_t bin, std::uint64_t q, std::uint64_t r) -> std::uint64_t {
  return ((bin * p.bin_mean_eff + q) << p.remainder_bits) | r;
}

}  // namespace

TEST_CASE("empty dictionary") {
  const auto p = defaults();
  RmsDictionary d(p, 1);
  const auto st = d.stats();
  CHECK(st.spare_live == 0);
  CHECK(st.live_count == 0);
  CHECK(st.full_bins == 0);
  CHECK(st.bin_load_histogram[0] == p.bins);
  CHECK_FALSE(d.query(0));
  CHECK(d.remove(123) == Status::not_found);
  CHECK(d.key_universe() == 12500ULL * 8 * 64);
  CHECK(d.insert(d.key_universe()) == Status::out_of_universe);
}

TEST_CASE("split decodes the key layout") {
  const auto p = defaults();
  RmsDictionary d(p, 1);
  const auto s = d.split(key(p, 777, 5, 33));
  CHECK(s.bin == 777);
  CHECK(s.quotient == 5);
  CHECK(s.remainder == 33);
}

TEST_CASE("a full bin forwards to the spare") {
  const auto p = defaults();
  RmsDictionary d(p, 1);
  for (std::uint64_t i = 0; i < p.bin_capacity; ++i) REQUIRE(d.insert(key(p, 5, i % 8, i)) == Status::ok);
  CHECK(d.bin_occupancy(5) == p.bin_capacity);
  CHECK(d.stats().spare_live == 0);
  const std::uint64_t extra = key(p, 5, 3, 60);
  CHECK(d.insert(extra) == Status::ok);
  CHECK(d.stats().spare_live == 1);
  CHECK(d.stats().full_bins == 1);
  CHECK(d.query(extra));
  CHECK(d.multiplicity(extra) == 1);
  for (std::uint64_t i = 0; i < p.bin_capacity; ++i) CHECK(d.query(key(p, 5, i % 8, i)));
  CHECK(d.remove(extra) == Status::ok);
  CHECK(d.stats().spare_live == 0);
  CHECK(d.check_invariants());
}

TEST_CASE("a spare copy outlives the deletion of its bin twin") {
  const auto p = defaults();
  RmsDictionary d(p, 1);
  const std::uint64_t y = key(p, 9, 2, 17);
  REQUIRE(d.insert(y) == Status::ok);
  for (std::uint64_t i = 1; i < p.bin_capacity; ++i) REQUIRE(d.insert(key(p, 9, 7, i)) == Status::ok);
  REQUIRE(d.insert(y) == Status::ok);  // bin full: this copy lands in the spare
  CHECK(d.spare().query(y) == 1);
  CHECK(d.multiplicity(y) == 2);
  REQUIRE(d.remove(y) == Status::ok);  // removes the bin copy first
  CHECK(d.spare().query(y) == 1);
  CHECK(d.bin_occupancy(9) == p.bin_capacity - 1);
  CHECK(d.multiplicity(y) == 1);
  CHECK(d.query(y));
  REQUIRE(d.remove(y) == Status::ok);
  CHECK_FALSE(d.query(y));
  CHECK(d.check_invariants());
}

TEST_CASE("capacity and overflow statuses") {
  ParamOverrides ov;
  ov.spare_capacity = 1;
  const auto p = derive_params(1024, 4, ov);
  RmsDictionary d(p, 3);
  for (std::uint64_t i = 0; i < p.bin_capacity; ++i) REQUIRE(d.insert(key(p, 0, 0, i % 16)) == Status::ok);
  CHECK(d.insert(key(p, 0, 1, 1)) == Status::ok);
  CHECK(d.insert(key(p, 0, 1, 2)) == Status::overflow);
  CHECK(d.live_count() == p.bin_capacity + 1);
  std::mt19937_64 rng(1);
  while (d.live_count() < p.n) {
    const std::uint64_t y = key(p, 1 + rng() % (p.bins - 1), rng() % p.bin_mean_eff, rng() % 16);
    (void)d.insert(y);
  }
  CHECK(d.insert(key(p, 2, 0, 0)) == Status::at_capacity);
}

TEST_CASE("bits_used closed form") {
  const auto p = defaults();
  RmsDictionary d(p, 1);
  const auto st = d.stats();
  CHECK(st.pocket_bits == 12500ULL * (8 + 20 + 20 * 6));
  CHECK(st.pocket_bits == p.bins * p.pocket_bits());
  // spare: (2 * 22 + 64) records of bit_width(6.4e6 - 1) = 23 key bits + bit_width(22) = 5 counter bits
  CHECK(st.spare_bits == (44 + 64) * (23 + 5));
  CHECK(st.bits_used == st.pocket_bits + st.spare_bits);
}

TEST_CASE("bin loads after n/2 uniform keys follow the binomial law") {
  const auto p = defaults();
  RmsDictionary d(p, 2);
  std::mt19937_64 rng(2);
  for (std::uint64_t i = 0; i < p.n / 2; ++i) REQUIRE(d.insert(rng() % d.key_universe()) == Status::ok);
  const double m = static_cast<double>(p.bins);
  double sum = 0;
  double sq = 0;
  for (std::size_t b = 0; b < p.bins; ++b) {
    const double occ = static_cast<double>(d.bin_occupancy(b));
    sum += occ;
    sq += occ * occ;
  }
  const double mean = sum / m;
  const double expected = static_cast<double>(p.bin_mean_eff) * 0.5;
  CHECK(std::abs(mean - expected) <= 3.0 * std::sqrt(static_cast<double>(p.bin_mean_eff)) / std::sqrt(m));
  // Variance of Bin(n/2, 1/m) is about 4; the sample variance has sd sqrt((mu4 - sigma^4) / m).
  const double var = sq / m - mean * mean;
  const double lambda = (p.n / 2.0) / m;
  const double sd = std::sqrt((lambda + 3 * lambda * lambda - lambda * lambda) / m);
  CHECK(std::abs(var - lambda * (1 - 1 / m)) <= 3 * sd);
  CHECK(d.check_invariants());
}

TEST_CASE("spare stays below 2% after n uniform inserts in each of 100 trials") {
  const auto p = defaults();
  for (std::uint64_t t = 0; t < 100; ++t) {
    RmsDictionary d(p, t);
    std::mt19937_64 rng(1000 + t);
    std::uint64_t overflow = 0;
    for (std::uint64_t i = 0; i < p.n; ++i) overflow += d.insert(rng() % d.key_universe()) == Status::overflow;
    CAPTURE(t);
    CHECK(overflow == 0);
    CHECK(static_cast<double>(d.stats().spare_live) < 0.02 * p.n);
    CHECK(d.stats().spare_live < p.spare_capacity);
  }
}

TEST_CASE("conservation and oracle agreement under colliding keys") {
  const auto p = defaults();
  RmsDictionary d(p, 4);
  std::unordered_map<std::uint64_t, std::size_t> oracle;
  std::vector<std::uint64_t> live;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200000; ++i) {
    // Three hot bins and tiny remainder ranges: lots of full bins and duplicates.
    const std::uint64_t y = key(p, rng() % 3, rng() % 8, rng() % 4);
    const int kind = static_cast<int>(rng() % 3);
    if (kind == 0) {
      const Status st = d.insert(y);
      if (st == Status::ok) {
        ++oracle[y];
        live.push_back(y);
      } else {
        REQUIRE(st == Status::overflow);
        REQUIRE(d.spare().live_count() == p.spare_capacity);
      }
    } else if (kind == 1 && !live.empty()) {
      const std::size_t idx = rng() % live.size();
      const std::uint64_t victim = live[idx];
      REQUIRE(d.remove(victim) == Status::ok);
      live[idx] = live.back();
      live.pop_back();
      if (--oracle[victim] == 0) oracle.erase(victim);
    } else {
      const auto it = oracle.find(y);
      const std::size_t expect = it == oracle.end() ? 0 : it->second;
      REQUIRE(d.multiplicity(y) == expect);
      REQUIRE(d.query(y) == (expect > 0));
    }
    std::size_t in_bins = d.bin_occupancy(0) + d.bin_occupancy(1) + d.bin_occupancy(2);
    REQUIRE(in_bins + d.spare().live_count() == d.live_count());
    REQUIRE(d.live_count() == live.size());
  }
  CHECK(d.check_invariants());
}

TEST_CASE("header fault is visible to the invariant checker") {
  const auto p = defaults();
  RmsDictionary d(p, 5);
  REQUIRE(d.insert(key(p, 4, 1, 9)) == Status::ok);
  REQUIRE(d.insert(key(p, 4, 1, 10)) == Status::ok);
  CHECK(d.check_invariants());
  const auto g = pocket::select_group(d.layout(), d.bin_words(4), 1);
  d.flip_header_bit_for_testing(4, g.start + g.count + 1 - 1);
  CHECK_FALSE(d.check_invariants());
  CHECK(d.multiplicity(key(p, 4, 1, 10)) == 0);
}
