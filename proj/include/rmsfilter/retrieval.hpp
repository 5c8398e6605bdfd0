#pragma once

// Dynamic retrieval store for the sparse case: maps each live key to a
// private slot of an (n + t)-entry array of k-bit satellite values,
// t = ceil(n / log2 n). A Feistel permutation splits a key into (h1, h2); h1
// addresses a bounded-probe locator table and only h2 is stored there.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rmsfilter/hashing.hpp"
#include "rmsfilter/probe_table.hpp"
#include "rmsfilter/status.hpp"

namespace rmsf {

struct RetrievalStats {
  std::size_t live_keys = 0;
  std::size_t slot_count = 0;
  std::size_t free_slots = 0;
  std::size_t locator_slots = 0;
  std::size_t stash_used = 0;
  std::uint64_t satellite_bits = 0;
  std::uint64_t locator_bits = 0;
  std::uint64_t free_pool_bits = 0;
  std::uint64_t bits_used = 0;
};

class RetrievalStore {
 public:
  RetrievalStore(std::uint64_t n, unsigned value_bits, unsigned universe_bits, std::uint64_t seed);

  // First insert of a key stores `value`; repeated inserts only bump the
  // key's counter. ok | overflow | out_of_universe
  auto insert(std::uint64_t key, std::uint64_t value) -> Status;
  auto remove(std::uint64_t key) -> Status;  // ok | not_found | out_of_universe
  // Satellite value of a live key; nullopt ("fail") otherwise.
  [[nodiscard]] auto retrieve(std::uint64_t key) const -> std::optional<std::uint64_t>;
  [[nodiscard]] auto multiplicity(std::uint64_t key) const -> std::size_t;

  [[nodiscard]] auto stats() const -> RetrievalStats;
  [[nodiscard]] auto permutation() const noexcept -> const FeistelPermutation& { return permutation_; }

 private:
  struct Entry {
    std::uint32_t slot = 0;
    std::uint32_t count = 0;
  };

  [[nodiscard]] auto read_slot(std::uint32_t slot) const -> std::uint64_t;
  void write_slot(std::uint32_t slot, std::uint64_t value);

  std::uint64_t n_;
  unsigned value_bits_;
  std::size_t slot_count_;
  FeistelPermutation permutation_;
  detail::BoundedProbeTable<Entry> locator_;
  std::vector<std::uint64_t> satellite_;
  std::vector<std::uint32_t> free_slots_;
};

}  // namespace rmsf
