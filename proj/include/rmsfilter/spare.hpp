#pragma once

#include <cstddef>
#include <cstdint>

#include "rmsfilter/hashing.hpp"
#include "rmsfilter/probe_table.hpp"
#include "rmsfilter/status.hpp"

namespace rmsf {

struct SpareStats {
  std::size_t live_count = 0;
  std::size_t distinct_keys = 0;
  std::size_t max_multiplicity = 0;
  std::size_t stash_used = 0;
};

// Exact multiset over [key_universe] holding at most `capacity` elements
// (counting multiplicity). A set table of (key, counter) records; the last
// copy of a key removes its record.
class SpareStore {
 public:
  SpareStore() = default;
  SpareStore(std::size_t capacity, std::uint64_t key_universe, std::uint64_t seed);

  auto insert(std::uint64_t key) -> Status;  // ok | overflow | out_of_universe
  auto remove(std::uint64_t key) -> Status;  // ok | not_found | out_of_universe
  [[nodiscard]] auto query(std::uint64_t key) const -> std::size_t;

  [[nodiscard]] auto live_count() const noexcept -> std::size_t { return live_; }
  [[nodiscard]] auto capacity() const noexcept -> std::size_t { return capacity_; }
  [[nodiscard]] auto stats() const -> SpareStats;
  // Space of the record table plus stash: slots * (key bits + counter bits).
  [[nodiscard]] auto size_in_bits() const noexcept -> std::uint64_t;
  [[nodiscard]] auto check_invariants() const -> bool;

 private:
  std::size_t capacity_ = 0;
  std::uint64_t key_universe_ = 1;
  std::size_t live_ = 0;
  PairwiseHash home_;
  detail::BoundedProbeTable<std::uint32_t> table_;
};

}  // namespace rmsf
