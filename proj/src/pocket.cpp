#include "rmsfilter/pocket.hpp"

#include <cassert>
#include <string>

#include "rmsfilter/params.hpp"

namespace rmsf::pocket {

auto Layout::make(std::uint64_t quotients, std::uint64_t capacity, unsigned remainder_bits, unsigned word_budget)
    -> Layout {
  if (quotients == 0 || capacity == 0) throw ParamError(ParamErrc::invalid_override, "pocket needs B >= 1 and n' >= 1");
  if (remainder_bits == 0 || remainder_bits > 63) {
    throw ParamError(ParamErrc::invalid_override, "pocket remainder width must be in [1, 63]");
  }
  if (word_budget == 0 || word_budget > kMaxPocketWords) {
    throw ParamError(ParamErrc::invalid_override, "pocket word budget must be in [1, 64]");
  }
  Layout layout{quotients, capacity, remainder_bits, word_budget};
  if (layout.total_bits() > std::size_t{word_budget} * bits::kWordBits) {
    throw ParamError(ParamErrc::pocket_over_word, "pocket of " + std::to_string(layout.total_bits()) +
                                                      " bits exceeds " + std::to_string(word_budget) + " words");
  }
  return layout;
}

auto occupancy(const Layout& layout, ConstWords words, bits::AccessTrace* trace) -> std::size_t {
  return bits::ConstBitSpan(words, trace).popcount(0, layout.header_bits());
}

namespace {

auto group_of(const Layout& layout, const bits::ConstBitSpan& s, std::uint64_t q) -> Group {
  // i and j are the header positions of zero number q-1 and zero number q.
  const std::size_t limit = layout.header_bits();
  const std::size_t j = s.select0(limit, q);
  const std::size_t start = q == 0 ? 0 : s.select0(limit, q - 1) + 1 - q;
  return Group{start, j - q - start};
}

}  // namespace

auto select_group(const Layout& layout, ConstWords words, std::uint64_t q, bits::AccessTrace* trace) -> Group {
  assert(q < layout.quotients);
  return group_of(layout, bits::ConstBitSpan(words, trace), q);
}

auto query(const Layout& layout, ConstWords words, std::uint64_t q, std::uint64_t r, bits::AccessTrace* trace)
    -> std::size_t {
  assert(q < layout.quotients && r <= bits::low_mask(layout.remainder_bits));
  const bits::ConstBitSpan s(words, trace);
  const Group g = group_of(layout, s, q);
  const std::size_t rb = layout.remainder_bits;
  const std::size_t base = layout.header_bits();
  std::size_t hits = 0;
  for (std::size_t t = g.start; t < g.start + g.count; ++t) {
    const std::uint64_t v = s.read(base + t * rb, rb);
    if (v > r) break;
    hits += (v == r);
  }
  return hits;
}

auto insert(const Layout& layout, Words words, std::uint64_t q, std::uint64_t r, bits::AccessTrace* trace) -> Status {
  assert(q < layout.quotients && r <= bits::low_mask(layout.remainder_bits));
  const bits::BitSpan s(words, trace);
  const std::size_t occ = s.popcount(0, layout.header_bits());
  if (occ == layout.capacity) return Status::full;

  const Group g = group_of(layout, bits::ConstBitSpan(words, trace), q);
  const std::size_t rb = layout.remainder_bits;
  const std::size_t base = layout.header_bits();

  // Insertion point p: after every remainder <= r in the group.
  std::size_t p = g.start;
  while (p < g.start + g.count && s.read(base + p * rb, rb) <= r) ++p;

  // Header: a new 1 at the position of the q-th zero, suffix shifted by one.
  const std::size_t j = g.start + g.count + q;
  const std::size_t used = layout.quotients + occ + 1;
  s.shift_up(j, used, 1);
  s.write(j, 1, 1);

  // Body: open an rb-bit hole at p.
  s.shift_up(base + p * rb, base + (occ + 1) * rb, rb);
  s.write(base + p * rb, rb, r);
  return Status::ok;
}

auto remove(const Layout& layout, Words words, std::uint64_t q, std::uint64_t r, bits::AccessTrace* trace) -> Status {
  assert(q < layout.quotients && r <= bits::low_mask(layout.remainder_bits));
  const bits::BitSpan s(words, trace);
  const Group g = group_of(layout, bits::ConstBitSpan(words, trace), q);
  const std::size_t rb = layout.remainder_bits;
  const std::size_t base = layout.header_bits();

  std::size_t t = g.start;
  const std::size_t end = g.start + g.count;
  for (; t < end; ++t) {
    const std::uint64_t v = s.read(base + t * rb, rb);
    if (v == r) break;
    if (v > r) return Status::not_found;
  }
  if (t == end) return Status::not_found;

  const std::size_t occ = s.popcount(0, layout.header_bits());
  const std::size_t j = g.start + g.count + q;
  s.shift_down(j - 1, layout.quotients + occ, 1);
  s.shift_down(base + t * rb, base + occ * rb, rb);
  return Status::ok;
}

auto dump(const Layout& layout, ConstWords words) -> std::string {
  const bits::ConstBitSpan s(words);
  const std::size_t occ = s.popcount(0, layout.header_bits());
  std::string out = "H:";
  for (std::size_t i = 0; i < layout.quotients + occ; ++i) out += s.test(i) ? '1' : '0';
  out += " B:";
  const std::size_t rb = layout.remainder_bits;
  for (std::size_t t = 0; t < occ; ++t) {
    const std::uint64_t v = s.read(layout.header_bits() + t * rb, rb);
    for (std::size_t b = rb; b-- > 0;) out += ((v >> b) & 1U) ? '1' : '0';
  }
  out += " occ:" + std::to_string(occ);
  return out;
}

auto check_invariants(const Layout& layout, ConstWords words) -> bool {
  if (words.size() != layout.words()) return false;
  const bits::ConstBitSpan s(words);
  const std::size_t header = layout.header_bits();
  const std::size_t occ = s.popcount(0, header);
  if (occ > layout.capacity) return false;
  // All ones sit in the used prefix, so it holds exactly B zeros.
  if (s.popcount(0, layout.quotients + occ) != occ) return false;
  const std::size_t rb = layout.remainder_bits;
  for (std::uint64_t q = 0; q < layout.quotients; ++q) {
    const Group g = group_of(layout, s, q);
    for (std::size_t t = g.start + 1; t < g.start + g.count; ++t) {
      if (s.read(header + (t - 1) * rb, rb) > s.read(header + t * rb, rb)) return false;
    }
  }
  // Unused body and word padding are zero.
  return s.popcount(header + occ * rb, words.size() * bits::kWordBits) == 0;
}

}  // namespace rmsf::pocket
