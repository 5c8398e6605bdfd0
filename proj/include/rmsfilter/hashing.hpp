#pragma once

// Seeded hash families over the Mersenne field GF(2^61 - 1): a pairwise
// (degree-1) family, a k-wise (degree k-1) family, a one-round Feistel
// permutation of a power-of-two universe, and the HashPlan that combines them
// into the (subset, bin, quotient, remainder) decomposition of a key.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rmsfilter/params.hpp"

namespace rmsf {

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

class OutOfUniverse : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Field helpers; inputs must already be < kMersenne61.
auto mod_mersenne(unsigned __int128 x) noexcept -> std::uint64_t;
auto mul_mod(std::uint64_t a, std::uint64_t b) noexcept -> std::uint64_t;
// Uniform field element in [lo, p) drawn by rejection, reproducible across platforms.
auto draw_field_element(std::mt19937_64& rng, std::uint64_t lo = 0) -> std::uint64_t;

// x -> ((a x + b) mod p) mod range, a != 0.
class PairwiseHash {
 public:
  PairwiseHash() = default;
  PairwiseHash(std::uint64_t a, std::uint64_t b, std::uint64_t range);
  static auto draw(std::mt19937_64& rng, std::uint64_t range) -> PairwiseHash;

  [[nodiscard]] auto operator()(std::uint64_t x) const noexcept -> std::uint64_t {
    return mod_mersenne(static_cast<unsigned __int128>(a_) * x + b_) % range_;
  }
  [[nodiscard]] auto a() const noexcept -> std::uint64_t { return a_; }
  [[nodiscard]] auto b() const noexcept -> std::uint64_t { return b_; }
  [[nodiscard]] auto range() const noexcept -> std::uint64_t { return range_; }

  friend auto operator==(const PairwiseHash&, const PairwiseHash&) -> bool = default;

 private:
  std::uint64_t a_ = 1;
  std::uint64_t b_ = 0;
  std::uint64_t range_ = 1;
};

// Polynomial of degree k-1 evaluated by Horner's rule, reduced mod range.
class KWiseHash {
 public:
  KWiseHash() = default;
  KWiseHash(std::vector<std::uint64_t> coefficients, std::uint64_t range);
  static auto draw(std::mt19937_64& rng, unsigned k, std::uint64_t range) -> KWiseHash;

  [[nodiscard]] auto operator()(std::uint64_t x) const noexcept -> std::uint64_t {
    std::uint64_t acc = 0;
    for (auto c : coefficients_) acc = mod_mersenne(static_cast<unsigned __int128>(acc) * x + c);
    return acc % range_;
  }
  [[nodiscard]] auto independence() const noexcept -> unsigned {
    return static_cast<unsigned>(coefficients_.size());
  }
  [[nodiscard]] auto coefficients() const noexcept -> const std::vector<std::uint64_t>& { return coefficients_; }
  [[nodiscard]] auto range() const noexcept -> std::uint64_t { return range_; }

  friend auto operator==(const KWiseHash&, const KWiseHash&) -> bool = default;

 private:
  std::vector<std::uint64_t> coefficients_{0};
  std::uint64_t range_ = 1;
};

// One-round Feistel permutation of [2^domain_bits]. A key splits into its top
// left_bits (L) and low right_bits (R); pi(L, R) = (L xor F(R), R) with F a
// k-wise polynomial onto [2^left_bits].
class FeistelPermutation {
 public:
  struct Image {
    std::uint64_t left;   // h1
    std::uint64_t right;  // h2
    friend auto operator==(const Image&, const Image&) -> bool = default;
  };

  FeistelPermutation() = default;
  FeistelPermutation(unsigned domain_bits, unsigned left_bits, KWiseHash round);
  static auto draw(std::mt19937_64& rng, unsigned domain_bits, unsigned left_bits, unsigned k) -> FeistelPermutation;

  // Throws OutOfUniverse for x >= 2^domain_bits.
  [[nodiscard]] auto evaluate(std::uint64_t x) const -> Image;
  [[nodiscard]] auto invert(Image image) const -> std::uint64_t;

  [[nodiscard]] auto domain_bits() const noexcept -> unsigned { return domain_bits_; }
  [[nodiscard]] auto left_bits() const noexcept -> unsigned { return left_bits_; }
  [[nodiscard]] auto right_bits() const noexcept -> unsigned { return domain_bits_ - left_bits_; }
  [[nodiscard]] auto round() const noexcept -> const KWiseHash& { return round_; }

  friend auto operator==(const FeistelPermutation&, const FeistelPermutation&) -> bool = default;

 private:
  unsigned domain_bits_ = 0;
  unsigned left_bits_ = 0;
  KWiseHash round_;
};

// How the dense filter maps a key of U^ to a dictionary key.
enum class HashMode {
  succinct,  // Feistel permutation, then f_b / f_q / g_r on h2
  carter,    // pairwise hash onto [u], dictionary splits its raw bits
  raw_bits,  // key bits used directly (random-multiset test mode)
};

auto to_string(HashMode mode) -> std::string;
auto parse_hash_mode(std::string_view text) -> HashMode;

struct Location {
  std::uint64_t subset;
  std::uint64_t bin;
  std::uint64_t quotient;
  std::uint64_t remainder;
  friend auto operator==(const Location&, const Location&) -> bool = default;
};

// Independence used by the Feistel round function and f_b:
// ceil(n^{1/10} + n^{3/40}) capped at 64.
auto default_independence(std::uint64_t n) -> unsigned;

class HashPlan {
 public:
  HashPlan() = default;

  [[nodiscard]] static auto build(const FilterParams& params, std::uint64_t seed, HashMode mode = HashMode::succinct)
      -> HashPlan;

  // (h1, h2) = pi(x). Throws OutOfUniverse for x >= u^.
  [[nodiscard]] auto permute(std::uint64_t x) const -> FeistelPermutation::Image;
  [[nodiscard]] auto invert_permute(std::uint64_t h1, std::uint64_t h2) const -> std::uint64_t;

  // Bin, quotient and remainder of x under the active mode.
  [[nodiscard]] auto locate(std::uint64_t x) const -> Location;

  // Dictionary key in [m * B_eff * 2^rb] for x.
  [[nodiscard]] auto reduce(std::uint64_t x) const -> std::uint64_t;

  [[nodiscard]] auto seed() const noexcept -> std::uint64_t { return seed_; }
  [[nodiscard]] auto mode() const noexcept -> HashMode { return mode_; }
  [[nodiscard]] auto subsets() const noexcept -> std::uint64_t { return std::uint64_t{1} << permutation_.left_bits(); }
  [[nodiscard]] auto universe_bits() const noexcept -> unsigned { return permutation_.domain_bits(); }
  [[nodiscard]] auto permutation() const noexcept -> const FeistelPermutation& { return permutation_; }
  [[nodiscard]] auto bin_hash() const noexcept -> const KWiseHash& { return f_b_; }
  [[nodiscard]] auto quotient_hash() const noexcept -> const PairwiseHash& { return f_q_; }
  [[nodiscard]] auto remainder_hash() const noexcept -> const PairwiseHash& { return g_r_; }
  [[nodiscard]] auto carter_hash() const noexcept -> const PairwiseHash& { return carter_; }

  [[nodiscard]] auto to_json() const -> nlohmann::json;
  [[nodiscard]] static auto from_json(const nlohmann::json& j) -> HashPlan;

  friend auto operator==(const HashPlan&, const HashPlan&) -> bool = default;

 private:
  std::uint64_t seed_ = 0;
  HashMode mode_ = HashMode::succinct;
  std::uint64_t bin_mean_ = 1;
  unsigned remainder_bits_ = 0;
  std::uint64_t key_space_ = 1;
  FeistelPermutation permutation_;
  KWiseHash f_b_;
  PairwiseHash f_q_;
  PairwiseHash g_r_;
  PairwiseHash carter_;
};

}  // namespace rmsf
