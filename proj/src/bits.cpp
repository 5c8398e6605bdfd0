#include "rmsfilter/bits.hpp"

#include <array>

namespace rmsf::bits {

namespace {

constexpr auto make_select_in_byte() {
  std::array<std::array<std::uint8_t, 8>, 256> table{};
  for (unsigned b = 0; b < 256; ++b) {
    unsigned rank = 0;
    for (unsigned i = 0; i < 8; ++i) table[b][i] = 8;
    for (unsigned i = 0; i < 8; ++i) {
      if ((b >> i) & 1U) table[b][rank++] = static_cast<std::uint8_t>(i);
    }
  }
  return table;
}

constexpr auto kSelectInByte = make_select_in_byte();
constexpr std::uint64_t kOnesStep8 = 0x0101010101010101ULL;

}  // namespace

auto select64(std::uint64_t x, unsigned rank) noexcept -> unsigned {
  if (rank >= static_cast<unsigned>(std::popcount(x))) return 64;
  // Per-byte popcounts, then inclusive prefix sums in each byte.
  std::uint64_t s = x - ((x >> 1) & 0x5555555555555555ULL);
  s = (s & 0x3333333333333333ULL) + ((s >> 2) & 0x3333333333333333ULL);
  s = (s + (s >> 4)) & 0x0F0F0F0F0F0F0F0FULL;
  const std::uint64_t prefix = s * kOnesStep8;
  unsigned byte = 0;
  unsigned before = 0;
  for (; byte < 8; ++byte) {
    const auto upto = static_cast<unsigned>((prefix >> (8 * byte)) & 0xFF);
    if (upto > rank) break;
    before = upto;
  }
  const auto b = static_cast<unsigned>((x >> (8 * byte)) & 0xFF);
  return 8 * byte + kSelectInByte[b][rank - before];
}

}  // namespace rmsf::bits
