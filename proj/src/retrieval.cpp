#include "rmsfilter/retrieval.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "rmsfilter/bits.hpp"

namespace rmsf {

namespace {

constexpr std::uint64_t kLocatorSeedSalt = 0x3c6ef372fe94f82bULL;
constexpr std::uint64_t kDisplacementBits = 5;  // probe limit 32

auto locator_bits_for(std::size_t slots, unsigned universe_bits) -> unsigned {
  // Table of at least 2 * slots entries, leaving at least one bit for h2.
  const auto bits = static_cast<unsigned>(std::bit_width(slots - 1)) + 1;
  return std::min(bits, universe_bits - 1);
}

}  // namespace

RetrievalStore::RetrievalStore(std::uint64_t n, unsigned value_bits, unsigned universe_bits, std::uint64_t seed)
    : n_(n),
      value_bits_(value_bits),
      slot_count_(n + static_cast<std::size_t>(std::ceil(static_cast<double>(n) / std::log2(static_cast<double>(n))))) {
  if (value_bits == 0 || value_bits > 64) throw std::invalid_argument("satellite width must be in [1, 64]");
  std::mt19937_64 rng(seed ^ kLocatorSeedSalt);
  const unsigned left = locator_bits_for(slot_count_, universe_bits);
  permutation_ = FeistelPermutation::draw(rng, universe_bits, left, default_independence(n));
  locator_ = detail::BoundedProbeTable<Entry>(std::size_t{1} << left);
  satellite_.assign(bits::words_for(slot_count_ * value_bits_), 0);
  free_slots_.reserve(slot_count_);
  for (std::size_t s = slot_count_; s-- > 0;) free_slots_.push_back(static_cast<std::uint32_t>(s));
}

auto RetrievalStore::read_slot(std::uint32_t slot) const -> std::uint64_t {
  return bits::ConstBitSpan(satellite_).read(std::size_t{slot} * value_bits_, value_bits_);
}

void RetrievalStore::write_slot(std::uint32_t slot, std::uint64_t value) {
  bits::BitSpan(satellite_).write(std::size_t{slot} * value_bits_, value_bits_, value);
}

auto RetrievalStore::insert(std::uint64_t key, std::uint64_t value) -> Status {
  if ((key >> permutation_.domain_bits()) != 0) return Status::out_of_universe;
  const auto [h1, h2] = permutation_.evaluate(key);
  if (auto* e = locator_.find(h1, h2)) {
    ++e->count;
    return Status::ok;
  }
  if (free_slots_.empty()) return Status::overflow;
  const std::uint32_t slot = free_slots_.back();
  if (locator_.emplace(h1, h2, Entry{slot, 1}) == nullptr) return Status::overflow;
  free_slots_.pop_back();
  write_slot(slot, value);
  return Status::ok;
}

auto RetrievalStore::remove(std::uint64_t key) -> Status {
  if ((key >> permutation_.domain_bits()) != 0) return Status::out_of_universe;
  const auto [h1, h2] = permutation_.evaluate(key);
  auto* e = locator_.find(h1, h2);
  if (e == nullptr) return Status::not_found;
  if (--e->count == 0) {
    const std::uint32_t slot = e->slot;
    locator_.erase(h1, h2);
    write_slot(slot, 0);
    free_slots_.push_back(slot);
  }
  return Status::ok;
}

auto RetrievalStore::retrieve(std::uint64_t key) const -> std::optional<std::uint64_t> {
  if ((key >> permutation_.domain_bits()) != 0) return std::nullopt;
  const auto [h1, h2] = permutation_.evaluate(key);
  const auto* e = locator_.find(h1, h2);
  if (e == nullptr) return std::nullopt;
  return read_slot(e->slot);
}

auto RetrievalStore::multiplicity(std::uint64_t key) const -> std::size_t {
  if ((key >> permutation_.domain_bits()) != 0) return 0;
  const auto [h1, h2] = permutation_.evaluate(key);
  const auto* e = locator_.find(h1, h2);
  return e == nullptr ? 0 : e->count;
}

auto RetrievalStore::stats() const -> RetrievalStats {
  RetrievalStats s;
  s.live_keys = locator_.size();
  s.slot_count = slot_count_;
  s.free_slots = free_slots_.size();
  s.locator_slots = locator_.slot_count();
  s.stash_used = locator_.stash_used();
  const auto slot_index_bits = static_cast<std::uint64_t>(std::bit_width(slot_count_ - 1));
  const auto counter_bits = static_cast<std::uint64_t>(std::bit_width(n_));
  const std::uint64_t entry_bits =
      permutation_.right_bits() + kDisplacementBits + slot_index_bits + counter_bits;
  s.satellite_bits = std::uint64_t{slot_count_} * value_bits_;
  s.locator_bits = (locator_.slot_count() + locator_.stash_capacity()) * entry_bits;
  s.free_pool_bits = std::uint64_t{slot_count_} * slot_index_bits;
  s.bits_used = s.satellite_bits + s.locator_bits + s.free_pool_bits;
  return s;
}

}  // namespace rmsf
