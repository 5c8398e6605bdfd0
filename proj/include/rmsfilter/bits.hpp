#pragma once

// Word-level primitives over little-endian bit strings stored in 64-bit words:
// bit i of the string lives in word i/64 at position i%64.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>

namespace rmsf::bits {

inline constexpr std::size_t kWordBits = 64;

constexpr auto low_mask(std::size_t width) noexcept -> std::uint64_t {
  return width >= kWordBits ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

constexpr auto words_for(std::size_t nbits) noexcept -> std::size_t {
  return (nbits + kWordBits - 1) / kWordBits;
}

// Position of the rank-th (0-based) set bit of x, or 64 if x has fewer set bits.
// Byte-wise prefix popcounts locate the byte, a 256x8 table finishes.
auto select64(std::uint64_t x, unsigned rank) noexcept -> unsigned;

// Records which words of a span an operation touched. Indices are relative to
// the start of the traced span.
struct AccessTrace {
  std::uint64_t touched = 0;
  bool out_of_span = false;

  void mark(std::size_t word) noexcept {
    if (word >= kWordBits) {
      out_of_span = true;
      return;
    }
    touched |= std::uint64_t{1} << word;
  }
  [[nodiscard]] auto count() const noexcept -> int { return std::popcount(touched); }
  void reset() noexcept { *this = AccessTrace{}; }
};

// View of a bit string with optional access tracing. Word is std::uint64_t or
// const std::uint64_t; mutators exist only for the former.
template <class Word>
class BasicBitSpan {
  static constexpr bool kMutable = !std::is_const_v<Word>;

 public:
  BasicBitSpan(std::span<Word> words, AccessTrace* trace = nullptr) noexcept
      : words_(words), trace_(trace) {}

  [[nodiscard]] auto word_count() const noexcept -> std::size_t { return words_.size(); }

  [[nodiscard]] auto load(std::size_t w) const noexcept -> std::uint64_t {
    mark(w);
    return words_[w];
  }
  void store(std::size_t w, std::uint64_t v) const noexcept
    requires kMutable
  {
    mark(w);
    words_[w] = v;
  }

  // width in [1, 64]; the field may straddle two words.
  [[nodiscard]] auto read(std::size_t pos, std::size_t width) const noexcept -> std::uint64_t {
    const std::size_t w = pos / kWordBits;
    const std::size_t off = pos % kWordBits;
    std::uint64_t v = load(w) >> off;
    if (off + width > kWordBits) v |= load(w + 1) << (kWordBits - off);
    return v & low_mask(width);
  }

  void write(std::size_t pos, std::size_t width, std::uint64_t value) const noexcept
    requires kMutable
  {
    const std::size_t w = pos / kWordBits;
    const std::size_t off = pos % kWordBits;
    value &= low_mask(width);
    const std::uint64_t lo_mask = low_mask(width) << off;
    store(w, (load(w) & ~lo_mask) | (value << off));
    if (off + width > kWordBits) {
      const std::size_t spill = off + width - kWordBits;
      const std::uint64_t hi_mask = low_mask(spill);
      store(w + 1, (load(w + 1) & ~hi_mask) | (value >> (kWordBits - off)));
    }
  }

  [[nodiscard]] auto test(std::size_t pos) const noexcept -> bool { return read(pos, 1) != 0; }

  [[nodiscard]] auto popcount(std::size_t begin, std::size_t end) const noexcept -> std::size_t {
    std::size_t total = 0;
    while (begin < end) {
      const std::size_t chunk_end = std::min(end, (begin / kWordBits + 1) * kWordBits);
      total += static_cast<std::size_t>(std::popcount(read(begin, chunk_end - begin)));
      begin = chunk_end;
    }
    return total;
  }

  // Position of the rank-th (0-based) zero in [0, limit); limit if there is none.
  [[nodiscard]] auto select0(std::size_t limit, std::size_t rank) const noexcept -> std::size_t {
    for (std::size_t w = 0; w * kWordBits < limit; ++w) {
      const std::size_t valid = std::min(kWordBits, limit - w * kWordBits);
      const std::uint64_t zeros = ~load(w) & low_mask(valid);
      const auto c = static_cast<std::size_t>(std::popcount(zeros));
      if (rank < c) return w * kWordBits + select64(zeros, static_cast<unsigned>(rank));
      rank -= c;
    }
    return limit;
  }

  // Moves bits [pos, end - by) to [pos + by, end). Bits [pos, pos + by) keep
  // their old contents and the top `by` bits of the region are discarded.
  void shift_up(std::size_t pos, std::size_t end, std::size_t by) const noexcept
    requires kMutable
  {
    if (by == 0) return;
    std::size_t hi = end;
    while (hi > pos + by) {
      const std::size_t lo = std::max(pos + by, (hi - 1) / kWordBits * kWordBits);
      write(lo, hi - lo, read(lo - by, hi - lo));
      hi = lo;
    }
  }

  // Moves bits [pos + by, end) to [pos, end - by) and zeroes [end - by, end).
  void shift_down(std::size_t pos, std::size_t end, std::size_t by) const noexcept
    requires kMutable
  {
    if (by == 0) return;
    const std::size_t stop = end > pos + by ? end - by : pos;
    std::size_t lo = pos;
    while (lo < stop) {
      const std::size_t hi = std::min(stop, (lo / kWordBits + 1) * kWordBits);
      write(lo, hi - lo, read(lo + by, hi - lo));
      lo = hi;
    }
    while (lo < end) {
      const std::size_t hi = std::min(end, (lo / kWordBits + 1) * kWordBits);
      write(lo, hi - lo, 0);
      lo = hi;
    }
  }

 private:
  void mark(std::size_t w) const noexcept {
    if (trace_ != nullptr) trace_->mark(w);
  }

  std::span<Word> words_;
  AccessTrace* trace_;
};

using BitSpan = BasicBitSpan<std::uint64_t>;
using ConstBitSpan = BasicBitSpan<const std::uint64_t>;

}  // namespace rmsf::bits
