#include "rmsfilter/params.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <string>

namespace rmsf {

namespace {

constexpr std::uint64_t kDefaultBinMeanFloor = 8;
constexpr unsigned kDefaultWordBudget = 4;
constexpr unsigned kDefaultUniverseExponent = 4;
constexpr double kFixedPointTolerance = 1e-6;
constexpr unsigned kFixedPointMaxIterations = 100;

auto ceil_log2(std::uint64_t x) -> unsigned {
  return x <= 1 ? 0 : static_cast<unsigned>(std::bit_width(x - 1));
}

template <class T>
auto parse_number(std::string_view key, std::string_view text) -> T {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParamError(ParamErrc::invalid_override,
                     "bad value for override '" + std::string(key) + "': " + std::string(text));
  }
  return value;
}

template <>
auto parse_number<double>(std::string_view key, std::string_view text) -> double {
  std::string s(text);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw ParamError(ParamErrc::invalid_override, "bad value for override '" + std::string(key) + "': " + s);
  }
  return v;
}

}  // namespace

void ParamOverrides::set(std::string_view key, std::string_view value) {
  if (key == "b_eff" || key == "bin_mean") {
    bin_mean = parse_number<std::uint64_t>(key, value);
  } else if (key == "b_min") {
    bin_mean_floor = parse_number<std::uint64_t>(key, value);
  } else if (key == "bin_capacity" || key == "n_prime") {
    bin_capacity = parse_number<std::uint64_t>(key, value);
  } else if (key == "delta") {
    delta = parse_number<double>(key, value);
  } else if (key == "spare_capacity" || key == "n_s") {
    spare_capacity = parse_number<std::uint64_t>(key, value);
  } else if (key == "word_budget") {
    word_budget = parse_number<unsigned>(key, value);
  } else if (key == "c_dense") {
    c_dense = parse_number<double>(key, value);
  } else if (key == "universe_exponent") {
    universe_exponent = parse_number<unsigned>(key, value);
  } else if (key == "subsets" || key == "M") {
    subsets = parse_number<std::uint64_t>(key, value);
  } else {
    throw ParamError(ParamErrc::invalid_override, "unknown override '" + std::string(key) + "'");
  }
}

auto FilterParams::epsilon() const noexcept -> double { return std::ldexp(1.0, -static_cast<int>(k)); }

auto FilterParams::dictionary_universe() const noexcept -> std::uint64_t {
  return (bins * bin_mean_eff) << remainder_bits;
}

auto FilterParams::pocket_bits() const noexcept -> std::uint64_t {
  return bin_mean_eff + bin_capacity + bin_capacity * remainder_bits;
}

auto FilterParams::gamma() const noexcept -> double {
  return std::exp(-delta * delta * static_cast<double>(bin_mean_eff) / 3.0);
}

auto select_case(std::uint64_t n, unsigned k, double c_dense) -> CaseKind {
  const double loglog = std::log2(std::log2(static_cast<double>(n)));
  return static_cast<double>(k) <= c_dense * loglog ? CaseKind::dense : CaseKind::sparse;
}

auto derive_params(std::uint64_t n, unsigned k, const ParamOverrides& ov) -> FilterParams {
  if (n < kMinCapacity) {
    throw ParamError(ParamErrc::capacity_too_small,
                     "capacity " + std::to_string(n) + " below minimum " + std::to_string(kMinCapacity));
  }
  FilterParams p;
  p.n = n;
  p.k = k;

  const unsigned log_n = ceil_log2(n);
  const unsigned exponent = ov.universe_exponent.value_or(kDefaultUniverseExponent);
  if (exponent < 1) throw ParamError(ParamErrc::invalid_override, "universe_exponent must be >= 1");
  p.universe_bits = std::min<unsigned>(exponent * log_n, kMaxUniverseBits);
  // epsilon ranges over [n/u^, 1/2].
  if (k < 1 || k + log_n > p.universe_bits) {
    throw ParamError(ParamErrc::invalid_epsilon,
                     "epsilon 2^-" + std::to_string(k) + " outside [n/u^, 1/2] for universe 2^" +
                         std::to_string(p.universe_bits));
  }
  p.u = n << k;
  p.remainder_bits = k;

  const double nd = static_cast<double>(n);
  const double loglog = std::log2(std::log2(nd));
  p.b_prime = std::log(nd) / std::log1p(std::ldexp(1.0, static_cast<int>(k)));

  // delta = loglog n / sqrt(B), B = ln2 / (4 (1 + delta)) * B'. Start from B'.
  double delta = loglog / std::sqrt(p.b_prime);
  double bin_mean = 0;
  unsigned it = 0;
  for (; it < kFixedPointMaxIterations; ++it) {
    bin_mean = std::log(2.0) / (4.0 * (1.0 + delta)) * p.b_prime;
    const double next = loglog / std::sqrt(bin_mean);
    const double step = std::abs(next - delta);
    delta = next;
    if (step < kFixedPointTolerance) break;
  }
  p.delta_fixed_point = delta;
  p.bin_mean = std::log(2.0) / (4.0 * (1.0 + delta)) * p.b_prime;
  p.fixed_point_iterations = it + 1;

  const std::uint64_t floor_b = ov.bin_mean_floor.value_or(kDefaultBinMeanFloor);
  if (ov.bin_mean && *ov.bin_mean == 0) throw ParamError(ParamErrc::invalid_override, "b_eff must be positive");
  p.bin_mean_eff = ov.bin_mean.value_or(
      std::max<std::uint64_t>(static_cast<std::uint64_t>(std::floor(p.bin_mean)), std::max<std::uint64_t>(floor_b, 1)));
  p.delta = ov.delta.value_or(loglog / std::sqrt(static_cast<double>(p.bin_mean_eff)));
  p.bins = (n + p.bin_mean_eff - 1) / p.bin_mean_eff;
  p.bin_capacity = ov.bin_capacity.value_or(
      static_cast<std::uint64_t>(std::ceil((1.0 + p.delta) * static_cast<double>(p.bin_mean_eff))));
  if (p.bin_capacity == 0) throw ParamError(ParamErrc::invalid_override, "bin_capacity must be positive");

  const double log_n_real = std::log2(nd);
  p.spare_capacity =
      ov.spare_capacity.value_or(static_cast<std::uint64_t>(std::ceil(nd / (log_n_real * log_n_real * log_n_real))));

  p.quotient_bits = ceil_log2(p.bin_mean_eff);
  p.bin_index_bits = ceil_log2(p.bins);
  p.word_budget = ov.word_budget.value_or(kDefaultWordBudget);
  if (p.word_budget < 1 || p.word_budget > kMaxPocketWords) {
    throw ParamError(ParamErrc::invalid_override, "word_budget must be in [1, 64]");
  }

  const std::uint64_t subsets =
      ov.subsets.value_or(static_cast<std::uint64_t>(std::ceil(std::pow(nd, 0.9))));
  if (subsets < 1) throw ParamError(ParamErrc::invalid_override, "subsets must be >= 1");
  p.subset_bits = ceil_log2(subsets);
  if (p.subset_bits >= p.universe_bits) {
    throw ParamError(ParamErrc::invalid_override, "subset count exceeds the universe");
  }

  p.c_dense = ov.c_dense.value_or(4.0);
  p.case_kind = select_case(n, k, p.c_dense);

  if (p.case_kind == CaseKind::dense &&
      p.bin_capacity * (p.remainder_bits + 2) > std::uint64_t{p.word_budget} * 64) {
    throw ParamError(ParamErrc::pocket_over_word,
                     "pocket needs " + std::to_string(p.bin_capacity * (p.remainder_bits + 2)) +
                         " bits, word budget is " + std::to_string(p.word_budget * 64));
  }
  return p;
}

auto parse_epsilon(std::string_view text) -> unsigned {
  auto fail = [&]() -> ParamError {
    return ParamError(ParamErrc::invalid_epsilon, "epsilon must be a power of two 2^-k, got '" + std::string(text) + "'");
  };
  auto parse_k = [&](std::string_view digits) -> unsigned {
    unsigned k = 0;
    const auto* end = digits.data() + digits.size();
    auto [ptr, ec] = std::from_chars(digits.data(), end, k);
    if (ec != std::errc{} || ptr != end) throw fail();
    return k;
  };
  if (text.starts_with("2^-")) return parse_k(text.substr(3));
  if (text.starts_with("1/2^")) return parse_k(text.substr(4));
  if (text.starts_with("1/")) {
    std::uint64_t d = 0;
    const auto digits = text.substr(2);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || !std::has_single_bit(d)) throw fail();
    return static_cast<unsigned>(std::countr_zero(d));
  }
  double v = 0;
  std::size_t used = 0;
  try {
    v = std::stod(std::string(text), &used);
  } catch (const std::exception&) {
    throw fail();
  }
  if (used != text.size() || !(v > 0.0) || !(v < 1.0)) throw fail();
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  if (mant != 0.5) throw fail();
  return static_cast<unsigned>(1 - exp);
}

}  // namespace rmsf
