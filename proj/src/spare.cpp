#include "rmsfilter/spare.hpp"

#include <algorithm>
#include <bit>
#include <random>

namespace rmsf {

namespace {
constexpr std::uint64_t kSpareSeedSalt = 0x5be0cd19137e2179ULL;
}

SpareStore::SpareStore(std::size_t capacity, std::uint64_t key_universe, std::uint64_t seed)
    : capacity_(capacity), key_universe_(key_universe), table_(std::max<std::size_t>(2 * capacity, 1)) {
  std::mt19937_64 rng(seed ^ kSpareSeedSalt);
  home_ = PairwiseHash::draw(rng, table_.slot_count());
}

auto SpareStore::insert(std::uint64_t key) -> Status {
  if (key >= key_universe_) return Status::out_of_universe;
  if (live_ == capacity_) return Status::overflow;
  const std::uint64_t home = home_(key);
  if (auto* count = table_.find(home, key)) {
    ++*count;
  } else if (table_.emplace(home, key, 1) == nullptr) {
    return Status::overflow;
  }
  ++live_;
  return Status::ok;
}

auto SpareStore::remove(std::uint64_t key) -> Status {
  if (key >= key_universe_) return Status::out_of_universe;
  const std::uint64_t home = home_(key);
  auto* count = table_.find(home, key);
  if (count == nullptr) return Status::not_found;
  if (--*count == 0) table_.erase(home, key);
  --live_;
  return Status::ok;
}

auto SpareStore::query(std::uint64_t key) const -> std::size_t {
  if (key >= key_universe_) return 0;
  const auto* count = table_.find(home_(key), key);
  return count == nullptr ? 0 : *count;
}

auto SpareStore::stats() const -> SpareStats {
  SpareStats s;
  s.live_count = live_;
  s.distinct_keys = table_.size();
  s.stash_used = table_.stash_used();
  table_.for_each([&](std::uint32_t c) { s.max_multiplicity = std::max<std::size_t>(s.max_multiplicity, c); });
  return s;
}

auto SpareStore::size_in_bits() const noexcept -> std::uint64_t {
  const auto key_bits = static_cast<std::uint64_t>(std::bit_width(key_universe_ - 1));
  const auto counter_bits = static_cast<std::uint64_t>(std::bit_width(capacity_));
  return (table_.slot_count() + table_.stash_capacity()) * (key_bits + counter_bits);
}

auto SpareStore::check_invariants() const -> bool {
  std::size_t total = 0;
  bool positive = true;
  table_.for_each([&](std::uint32_t c) {
    total += c;
    positive = positive && c > 0;
  });
  return positive && total == live_ && live_ <= capacity_;
}

}  // namespace rmsf
