#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rmsf {

enum class CaseKind { dense, sparse };

constexpr auto to_string(CaseKind c) noexcept -> std::string_view {
  return c == CaseKind::dense ? "dense" : "sparse";
}

enum class ParamErrc { invalid_epsilon, capacity_too_small, pocket_over_word, invalid_override };

class ParamError : public std::invalid_argument {
 public:
  ParamError(ParamErrc code, const std::string& what) : std::invalid_argument(what), code_(code) {}
  [[nodiscard]] auto code() const noexcept -> ParamErrc { return code_; }

 private:
  ParamErrc code_;
};

inline constexpr std::uint64_t kMinCapacity = std::uint64_t{1} << 10;
inline constexpr unsigned kMaxUniverseBits = 60;
inline constexpr unsigned kMaxPocketWords = 64;

// Knobs that replace a derived value. Anything left empty is derived.
struct ParamOverrides {
  std::optional<std::uint64_t> bin_mean;        // B_eff
  std::optional<std::uint64_t> bin_mean_floor;  // B_min, default 8
  std::optional<std::uint64_t> bin_capacity;    // n'
  std::optional<double> delta;
  std::optional<std::uint64_t> spare_capacity;  // n_s
  std::optional<unsigned> word_budget;          // pocket words, default 4
  std::optional<double> c_dense;                // default 4
  std::optional<unsigned> universe_exponent;    // u^ = 2^(exp * ceil(log2 n)), default 4
  std::optional<std::uint64_t> subsets;         // M, rounded up to a power of two

  // Applies "key=value". Throws ParamError(invalid_override) on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
};

struct FilterParams {
  std::uint64_t n = 0;
  unsigned k = 0;  // epsilon = 2^-k
  std::uint64_t u = 0;  // n / epsilon
  unsigned universe_bits = 0;  // u^ = 2^universe_bits

  double b_prime = 0;            // ln n / ln(1 + u/n)
  double delta_fixed_point = 0;  // delta from the circular (delta, B) definition
  double bin_mean = 0;           // real B at the fixed point
  unsigned fixed_point_iterations = 0;

  std::uint64_t bin_mean_eff = 0;  // B_eff
  double delta = 0;                // slack used for n', log2 log2 n / sqrt(B_eff)
  std::uint64_t bins = 0;          // m
  std::uint64_t bin_capacity = 0;  // n'
  std::uint64_t spare_capacity = 0;  // n_s

  unsigned remainder_bits = 0;
  unsigned quotient_bits = 0;
  unsigned bin_index_bits = 0;
  unsigned word_budget = 4;
  unsigned subset_bits = 0;  // M = 2^subset_bits
  double c_dense = 4;
  CaseKind case_kind = CaseKind::dense;

  [[nodiscard]] auto epsilon() const noexcept -> double;
  [[nodiscard]] auto subsets() const noexcept -> std::uint64_t { return std::uint64_t{1} << subset_bits; }
  // Keys accepted by the RMS dictionary: [m * B_eff * 2^remainder_bits] (>= u).
  [[nodiscard]] auto dictionary_universe() const noexcept -> std::uint64_t;
  // Bits of one pocket: (B_eff + n') + n' * remainder_bits.
  [[nodiscard]] auto pocket_bits() const noexcept -> std::uint64_t;
  // e^{-delta^2 B_eff / 3}, the per-bin fullness bound.
  [[nodiscard]] auto gamma() const noexcept -> double;

  friend auto operator==(const FilterParams&, const FilterParams&) -> bool = default;
};

auto select_case(std::uint64_t n, unsigned k, double c_dense = 4.0) -> CaseKind;

auto derive_params(std::uint64_t n, unsigned k, const ParamOverrides& overrides = {}) -> FilterParams;

// Parses "2^-k", "1/2^k", "0.015625"-style exact powers of two; returns k.
auto parse_epsilon(std::string_view text) -> unsigned;

}  // namespace rmsf
