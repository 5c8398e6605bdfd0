#pragma once

// Pocket dictionary: a bin-local multiset of (quotient, remainder) pairs in a
// fixed number of words.
//
// Layout of the bit string (bit 0 first):
//
//   [0, B + n')              header: 1^{n_0} 0 1^{n_1} 0 ... 1^{n_{B-1}} 0, zero padded
//   [B + n', B + n' + n'rb)  body: remainders, sorted by (q, r), rb bits each
//
// The header holds exactly B zeros in its first B + occupancy bits, so the
// occupancy is its popcount and nothing else is stored.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmsfilter/bits.hpp"
#include "rmsfilter/status.hpp"

namespace rmsf::pocket {

struct Layout {
  std::uint64_t quotients = 0;  // B_eff
  std::uint64_t capacity = 0;   // n'
  unsigned remainder_bits = 0;
  unsigned word_budget = 4;

  // Throws ParamError(pocket_over_word) when the pocket exceeds the word budget.
  static auto make(std::uint64_t quotients, std::uint64_t capacity, unsigned remainder_bits,
                   unsigned word_budget = 4) -> Layout;

  [[nodiscard]] auto header_bits() const noexcept -> std::size_t { return quotients + capacity; }
  [[nodiscard]] auto body_bits() const noexcept -> std::size_t { return capacity * remainder_bits; }
  [[nodiscard]] auto total_bits() const noexcept -> std::size_t { return header_bits() + body_bits(); }
  [[nodiscard]] auto words() const noexcept -> std::size_t { return bits::words_for(total_bits()); }

  friend auto operator==(const Layout&, const Layout&) -> bool = default;
};

struct Group {
  std::size_t start;  // body index of the first remainder with this quotient
  std::size_t count;  // n_q
  friend auto operator==(const Group&, const Group&) -> bool = default;
};

using Words = std::span<std::uint64_t>;
using ConstWords = std::span<const std::uint64_t>;

// Operations on a pocket stored in `words` (exactly layout.words() words).
// Preconditions q < quotients and r < 2^remainder_bits are asserted.
[[nodiscard]] auto occupancy(const Layout& layout, ConstWords words, bits::AccessTrace* trace = nullptr)
    -> std::size_t;
[[nodiscard]] auto select_group(const Layout& layout, ConstWords words, std::uint64_t q,
                                bits::AccessTrace* trace = nullptr) -> Group;
[[nodiscard]] auto query(const Layout& layout, ConstWords words, std::uint64_t q, std::uint64_t r,
                         bits::AccessTrace* trace = nullptr) -> std::size_t;
auto insert(const Layout& layout, Words words, std::uint64_t q, std::uint64_t r, bits::AccessTrace* trace = nullptr)
    -> Status;
auto remove(const Layout& layout, Words words, std::uint64_t q, std::uint64_t r, bits::AccessTrace* trace = nullptr)
    -> Status;

// "H:<header bits> B:<remainders, msb first> occ:<k>", printing only the used
// B + occ header bits and occ remainders.
[[nodiscard]] auto dump(const Layout& layout, ConstWords words) -> std::string;

// Structural invariants: B zeros in the used header, sorted groups, zero padding.
[[nodiscard]] auto check_invariants(const Layout& layout, ConstWords words) -> bool;

}  // namespace rmsf::pocket

namespace rmsf {

// Owning pocket, mostly for tests and tools; the RMS dictionary stores its
// pockets in one flat word array and uses the free functions above.
class PocketDictionary {
 public:
  explicit PocketDictionary(pocket::Layout layout) : layout_(layout), words_(layout.words(), 0) {}
  PocketDictionary(std::uint64_t quotients, std::uint64_t capacity, unsigned remainder_bits, unsigned word_budget = 4)
      : PocketDictionary(pocket::Layout::make(quotients, capacity, remainder_bits, word_budget)) {}

  auto insert(std::uint64_t q, std::uint64_t r) -> Status { return pocket::insert(layout_, words_, q, r, trace_); }
  auto remove(std::uint64_t q, std::uint64_t r) -> Status { return pocket::remove(layout_, words_, q, r, trace_); }
  [[nodiscard]] auto query(std::uint64_t q, std::uint64_t r) const -> std::size_t {
    return pocket::query(layout_, words_, q, r, trace_);
  }
  [[nodiscard]] auto contains(std::uint64_t q, std::uint64_t r) const -> bool { return query(q, r) > 0; }
  [[nodiscard]] auto select_group(std::uint64_t q) const -> pocket::Group {
    return pocket::select_group(layout_, words_, q, trace_);
  }
  [[nodiscard]] auto occupancy() const -> std::size_t { return pocket::occupancy(layout_, words_); }
  [[nodiscard]] auto full() const -> bool { return occupancy() == layout_.capacity; }
  [[nodiscard]] auto dump() const -> std::string { return pocket::dump(layout_, words_); }
  [[nodiscard]] auto check_invariants() const -> bool { return pocket::check_invariants(layout_, words_); }

  [[nodiscard]] auto layout() const noexcept -> const pocket::Layout& { return layout_; }
  [[nodiscard]] auto words() const noexcept -> std::span<const std::uint64_t> { return words_; }
  [[nodiscard]] auto mutable_words() noexcept -> std::span<std::uint64_t> { return words_; }
  [[nodiscard]] auto size_in_bits() const noexcept -> std::size_t { return layout_.total_bits(); }

  // Subsequent operations record their word accesses into `trace` (may be null).
  void trace_into(bits::AccessTrace* trace) noexcept { trace_ = trace; }

  friend auto operator==(const PocketDictionary& a, const PocketDictionary& b) -> bool {
    return a.layout_ == b.layout_ && a.words_ == b.words_;
  }

 private:
  pocket::Layout layout_;
  std::vector<std::uint64_t> words_;
  bits::AccessTrace* trace_ = nullptr;
};

}  // namespace rmsf
