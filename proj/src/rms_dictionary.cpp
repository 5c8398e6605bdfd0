#include "rmsfilter/rms_dictionary.hpp"

#include <stdexcept>

namespace rmsf {

RmsDictionary::RmsDictionary(const FilterParams& params, std::uint64_t seed)
    : params_(params),
      layout_(pocket::Layout::make(params.bin_mean_eff, params.bin_capacity, params.remainder_bits, params.word_budget)),
      words_per_bin_(layout_.words()),
      key_universe_(params.dictionary_universe()),
      storage_(params.bins * words_per_bin_, 0),
      spare_(params.spare_capacity, key_universe_, seed) {}

auto RmsDictionary::insert(std::uint64_t y) -> Status {
  if (y >= key_universe_) return Status::out_of_universe;
  if (live_ == params_.n) return Status::at_capacity;
  const Split s = split(y);
  Status st = pocket::insert(layout_, words_of(s.bin), s.quotient, s.remainder, trace_);
  if (st == Status::full) st = spare_.insert(y);
  if (st == Status::ok) ++live_;
  return st;
}

auto RmsDictionary::remove(std::uint64_t y) -> Status {
  if (y >= key_universe_) return Status::out_of_universe;
  const Split s = split(y);
  Status st = pocket::remove(layout_, words_of(s.bin), s.quotient, s.remainder, trace_);
  if (st == Status::not_found) st = spare_.remove(y);
  if (st == Status::ok) --live_;
  return st;
}

auto RmsDictionary::query(std::uint64_t y) const -> bool {
  if (y >= key_universe_) return false;
  const Split s = split(y);
  if (pocket::query(layout_, words_of(s.bin), s.quotient, s.remainder, trace_) > 0) return true;
  return spare_.query(y) > 0;
}

auto RmsDictionary::multiplicity(std::uint64_t y) const -> std::size_t {
  if (y >= key_universe_) return 0;
  const Split s = split(y);
  const std::size_t in_bin = pocket::query(layout_, words_of(s.bin), s.quotient, s.remainder, trace_);
  // A copy of y may sit in the spare even when the bin also holds one.
  return in_bin + spare_.query(y);
}

auto RmsDictionary::bin_occupancy(std::size_t bin) const -> std::size_t {
  return pocket::occupancy(layout_, words_of(bin));
}

auto RmsDictionary::bin_words(std::size_t bin) const -> pocket::ConstWords { return words_of(bin); }

auto RmsDictionary::stats() const -> RmsStats {
  RmsStats st;
  st.live_count = live_;
  st.spare_live = spare_.live_count();
  st.spare = spare_.stats();
  st.bin_load_histogram.assign(layout_.capacity + 1, 0);
  for (std::size_t b = 0; b < params_.bins; ++b) {
    const std::size_t occ = bin_occupancy(b);
    ++st.bin_load_histogram[occ];
    st.full_bins += (occ == layout_.capacity);
  }
  st.pocket_bits = params_.bins * layout_.total_bits();
  st.spare_bits = spare_.size_in_bits();
  st.bits_used = st.pocket_bits + st.spare_bits;
  return st;
}

auto RmsDictionary::check_invariants() const -> bool {
  std::size_t in_bins = 0;
  for (std::size_t b = 0; b < params_.bins; ++b) {
    if (!pocket::check_invariants(layout_, words_of(b))) return false;
    in_bins += bin_occupancy(b);
  }
  return spare_.check_invariants() && in_bins + spare_.live_count() == live_ && live_ <= params_.n;
}

void RmsDictionary::flip_header_bit_for_testing(std::size_t bin, std::size_t position) {
  if (bin >= params_.bins || position >= layout_.header_bits()) throw std::out_of_range("no such header bit");
  auto w = words_of(bin);
  w[position / 64] ^= std::uint64_t{1} << (position % 64);
}

}  // namespace rmsf
