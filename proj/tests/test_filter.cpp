#include <cmath>
#include <random>
#include <unordered_set>

#include "doctest.h"
#include "rmsfilter/filter.hpp"

using namespace rmsf;

namespace {

auto random_key(std::mt19937_64& rng, const DynamicFilter& f) -> std::uint64_t {
  return rng() & bits::low_mask(f.universe_bits());
}

}  // namespace

TEST_CASE("mode selection") {
  CHECK(DynamicFilter::create(1u << 16, 6, 42).mode() == CaseKind::dense);
  CHECK(DynamicFilter::create(1u << 16, 24, 42).mode() == CaseKind::sparse);
  FilterOptions forced;
  forced.force_case = CaseKind::sparse;
  CHECK(DynamicFilter::create(1u << 16, 6, 42, forced).mode() == CaseKind::sparse);
  CHECK(DynamicFilter::create(1u << 16, 6, 42).plan() != nullptr);
  CHECK(DynamicFilter::create(1u << 16, 24, 42).retrieval() != nullptr);
}

TEST_CASE("one-sided answers and multiset deletes in both modes") {
  for (unsigned k : {6U, 20U}) {
    auto f = DynamicFilter::create(1u << 14, k, 7);
    CAPTURE(k);
    std::mt19937_64 rng(k);
    for (int i = 0; i < 1000; ++i) CHECK_FALSE(f.query(random_key(rng, f)));  // empty filter
    const std::uint64_t x = random_key(rng, f);
    CHECK(f.insert(x) == Status::ok);
    CHECK(f.query(x));
    CHECK(f.insert(x) == Status::ok);
    CHECK(f.remove(x) == Status::ok);
    CHECK(f.query(x));
    CHECK(f.remove(x) == Status::ok);
    CHECK(f.live_count() == 0);
    CHECK(f.remove(random_key(rng, f)) == Status::not_found);
    CHECK(f.insert(std::uint64_t{1} << f.universe_bits()) == Status::out_of_universe);
    CHECK_FALSE(f.query(std::uint64_t{1} << f.universe_bits()));
  }
}

TEST_CASE("capacity is enforced") {
  for (unsigned k : {4U, 30U}) {
    auto f = DynamicFilter::create(1024, k, 3);
    std::mt19937_64 rng(3);
    std::vector<std::uint64_t> members;
    while (f.live_count() < 1024) {
      const std::uint64_t x = random_key(rng, f);
      if (f.insert(x) == Status::ok) members.push_back(x);
    }
    CHECK(f.insert(random_key(rng, f)) == Status::at_capacity);
    for (auto x : members) REQUIRE(f.query(x));
    CHECK(f.remove(members.front()) == Status::ok);
    CHECK(f.insert(members.front()) == Status::ok);
  }
}

TEST_CASE("colliding keys in raw_bits mode") {
  FilterOptions raw;
  raw.hash_mode = HashMode::raw_bits;
  auto f = DynamicFilter::create(1u << 14, 6, 11, raw);
  const std::uint64_t space = f.params().dictionary_universe();
  const std::uint64_t x = 4242;
  const std::uint64_t y = x + 3 * space;
  REQUIRE(f.plan()->reduce(x) == f.plan()->reduce(y));
  CHECK(f.insert(x) == Status::ok);
  CHECK(f.insert(y) == Status::ok);
  CHECK(f.remove(x) == Status::ok);
  CHECK(f.query(y));
  CHECK(f.query(x));  // residual positive through y's image
  CHECK(f.remove(y) == Status::ok);
  CHECK_FALSE(f.query(x));
}

TEST_CASE("post-delete residual rate is about epsilon") {
  const std::uint64_t n = 10000;
  auto f = DynamicFilter::create(n, 6, 5);
  std::mt19937_64 rng(5);
  std::unordered_set<std::uint64_t> members;
  while (f.live_count() < n - 1) {
    const std::uint64_t x = random_key(rng, f);
    if (members.insert(x).second) REQUIRE(f.insert(x) == Status::ok);
  }
  const int trials = 200000;
  int residual = 0;
  for (int i = 0; i < trials; ++i) {
    std::uint64_t x = random_key(rng, f);
    while (members.contains(x)) x = random_key(rng, f);
    REQUIRE(f.insert(x) == Status::ok);
    REQUIRE(f.remove(x) == Status::ok);
    residual += f.query(x);
  }
  // Each of the n-1 stored images is hit with probability 1 / (n 2^6).
  const double p = 1.0 - std::pow(1.0 - 1.0 / (n * 64.0), static_cast<double>(n - 1));
  const double rate = static_cast<double>(residual) / trials;
  CHECK(std::abs(rate - p) <= 4.0 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("sparse mode stores fingerprints") {
  auto f = DynamicFilter::create(10000, 16, 9);
  REQUIRE(f.mode() == CaseKind::sparse);
  std::mt19937_64 rng(9);
  std::vector<std::uint64_t> members;
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t x = random_key(rng, f);
    REQUIRE(f.insert(x) == Status::ok);
    members.push_back(x);
    CHECK(f.fingerprint(x) < (1u << 16));
    CHECK(f.retrieval()->retrieve(x) == f.fingerprint(x));
  }
  for (auto x : members) REQUIRE(f.query(x));
  const auto st = f.stats();
  REQUIRE(st.sparse.has_value());
  CHECK(st.sparse->slot_count == 10000 + static_cast<std::size_t>(std::ceil(10000 / std::log2(10000.0))));
  CHECK(st.sparse->satellite_bits == st.sparse->slot_count * 16);
  for (std::size_t i = 0; i < members.size(); i += 2) REQUIRE(f.remove(members[i]) == Status::ok);
  for (std::size_t i = 0; i < members.size(); ++i) CHECK(f.query(members[i]) == (i % 2 == 1));
}

TEST_CASE("determinism") {
  auto a = DynamicFilter::create(50000, 8, 123);
  auto b = DynamicFilter::create(50000, 8, 123);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 30000; ++i) {
    const std::uint64_t x = random_key(rng, a);
    REQUIRE(a.insert(x) == b.insert(x));
  }
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t x = random_key(rng, a);
    const bool first = a.query(x);
    REQUIRE(first == b.query(x));
    REQUIRE(first == a.query(x));
  }
  CHECK(a.stats().bits_used == b.stats().bits_used);
}

TEST_CASE("dense space at k=8 stays within (1+delta)k + 10 bits per element") {
  const auto f = DynamicFilter::create(100000, 8, 1);
  const auto st = f.stats();
  const auto& p = f.params();
  CHECK(st.bits_per_element <= (1 + p.delta) * 8 + 10);
  CHECK(st.dense->pocket_bits == p.bins * ((p.bin_mean_eff + p.bin_capacity) + p.bin_capacity * 8));
}
