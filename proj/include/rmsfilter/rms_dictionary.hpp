#pragma once

// Dictionary for random multisets over [m * B_eff * 2^rb]: m pocket
// dictionaries plus one shared spare. A key y splits by its raw bits into
//   r   = y mod 2^rb
//   q   = (y >> rb) mod B_eff
//   bin = (y >> rb) / B_eff
// Inserts go to pocket `bin` and fall through to the spare when it is full;
// deletes and queries try the pocket first, then the spare.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rmsfilter/params.hpp"
#include "rmsfilter/pocket.hpp"
#include "rmsfilter/spare.hpp"
#include "rmsfilter/status.hpp"

namespace rmsf {

struct RmsStats {
  std::size_t live_count = 0;
  std::size_t spare_live = 0;
  std::vector<std::size_t> bin_load_histogram;  // [occupancy] -> number of bins
  std::size_t full_bins = 0;
  std::uint64_t pocket_bits = 0;  // m * ((B + n') + n' * rb)
  std::uint64_t spare_bits = 0;
  std::uint64_t bits_used = 0;
  SpareStats spare;
};

class RmsDictionary {
 public:
  explicit RmsDictionary(const FilterParams& params, std::uint64_t seed = 0);

  auto insert(std::uint64_t y) -> Status;  // ok | overflow | at_capacity | out_of_universe
  auto remove(std::uint64_t y) -> Status;  // ok | not_found | out_of_universe
  [[nodiscard]] auto query(std::uint64_t y) const -> bool;
  [[nodiscard]] auto multiplicity(std::uint64_t y) const -> std::size_t;

  [[nodiscard]] auto live_count() const noexcept -> std::size_t { return live_; }
  [[nodiscard]] auto key_universe() const noexcept -> std::uint64_t { return key_universe_; }
  [[nodiscard]] auto bin_count() const noexcept -> std::size_t { return params_.bins; }
  [[nodiscard]] auto layout() const noexcept -> const pocket::Layout& { return layout_; }
  [[nodiscard]] auto params() const noexcept -> const FilterParams& { return params_; }
  [[nodiscard]] auto spare() const noexcept -> const SpareStore& { return spare_; }
  [[nodiscard]] auto bin_occupancy(std::size_t bin) const -> std::size_t;
  [[nodiscard]] auto bin_words(std::size_t bin) const -> pocket::ConstWords;
  [[nodiscard]] auto stats() const -> RmsStats;
  // Σ bin occupancies + spare live count == live count, and every pocket is well formed.
  [[nodiscard]] auto check_invariants() const -> bool;

  // Pocket word accesses of subsequent operations go to `trace` (may be null).
  // Indices are relative to the accessed pocket.
  void trace_into(bits::AccessTrace* trace) noexcept { trace_ = trace; }

  // Test hook for checker validation: flips one header bit of `bin`.
  void flip_header_bit_for_testing(std::size_t bin, std::size_t position);

  struct Split {
    std::uint64_t bin;
    std::uint64_t quotient;
    std::uint64_t remainder;
  };
  [[nodiscard]] auto split(std::uint64_t y) const noexcept -> Split {
    const std::uint64_t rest = y >> layout_.remainder_bits;
    return Split{rest / layout_.quotients, rest % layout_.quotients, y & bits::low_mask(layout_.remainder_bits)};
  }

 private:
  [[nodiscard]] auto words_of(std::uint64_t bin) noexcept -> pocket::Words {
    return {storage_.data() + bin * words_per_bin_, words_per_bin_};
  }
  [[nodiscard]] auto words_of(std::uint64_t bin) const noexcept -> pocket::ConstWords {
    return {storage_.data() + bin * words_per_bin_, words_per_bin_};
  }

  FilterParams params_;
  pocket::Layout layout_;
  std::size_t words_per_bin_;
  std::uint64_t key_universe_;
  std::vector<std::uint64_t> storage_;
  SpareStore spare_;
  std::size_t live_ = 0;
  bits::AccessTrace* trace_ = nullptr;
};

}  // namespace rmsf
