#include "rmsfilter/hashing.hpp"

#include <bit>
#include <cmath>
#include <utility>

#include "rmsfilter/bits.hpp"

namespace rmsf {

auto mod_mersenne(unsigned __int128 x) noexcept -> std::uint64_t {
  auto folded = static_cast<unsigned __int128>(static_cast<std::uint64_t>(x) & kMersenne61) + (x >> 61);
  auto r = static_cast<std::uint64_t>(folded & kMersenne61) + static_cast<std::uint64_t>(folded >> 61);
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

auto mul_mod(std::uint64_t a, std::uint64_t b) noexcept -> std::uint64_t {
  return mod_mersenne(static_cast<unsigned __int128>(a) * b);
}

auto draw_field_element(std::mt19937_64& rng, std::uint64_t lo) -> std::uint64_t {
  for (;;) {
    const std::uint64_t v = rng() >> 3;
    if (v >= lo && v < kMersenne61) return v;
  }
}

PairwiseHash::PairwiseHash(std::uint64_t a, std::uint64_t b, std::uint64_t range) : a_(a), b_(b), range_(range) {
  if (a == 0 || a >= kMersenne61 || b >= kMersenne61) throw std::invalid_argument("pairwise hash coefficients out of field");
  if (range == 0) throw std::invalid_argument("pairwise hash range must be positive");
}

auto PairwiseHash::draw(std::mt19937_64& rng, std::uint64_t range) -> PairwiseHash {
  const std::uint64_t a = draw_field_element(rng, 1);
  const std::uint64_t b = draw_field_element(rng);
  return PairwiseHash(a, b, range);
}

KWiseHash::KWiseHash(std::vector<std::uint64_t> coefficients, std::uint64_t range)
    : coefficients_(std::move(coefficients)), range_(range) {
  if (coefficients_.empty()) throw std::invalid_argument("k-wise hash needs at least one coefficient");
  for (auto c : coefficients_) {
    if (c >= kMersenne61) throw std::invalid_argument("k-wise hash coefficient out of field");
  }
  if (range == 0) throw std::invalid_argument("k-wise hash range must be positive");
}

auto KWiseHash::draw(std::mt19937_64& rng, unsigned k, std::uint64_t range) -> KWiseHash {
  std::vector<std::uint64_t> coefficients(std::max(k, 1U));
  for (auto& c : coefficients) c = draw_field_element(rng);
  return KWiseHash(std::move(coefficients), range);
}

FeistelPermutation::FeistelPermutation(unsigned domain_bits, unsigned left_bits, KWiseHash round)
    : domain_bits_(domain_bits), left_bits_(left_bits), round_(std::move(round)) {
  if (domain_bits > 61 || left_bits > domain_bits) throw std::invalid_argument("bad Feistel split");
  if (round_.range() != (std::uint64_t{1} << left_bits)) throw std::invalid_argument("Feistel round range mismatch");
}

auto FeistelPermutation::draw(std::mt19937_64& rng, unsigned domain_bits, unsigned left_bits, unsigned k)
    -> FeistelPermutation {
  return FeistelPermutation(domain_bits, left_bits, KWiseHash::draw(rng, k, std::uint64_t{1} << left_bits));
}

auto FeistelPermutation::evaluate(std::uint64_t x) const -> Image {
  if ((x >> domain_bits_) != 0) throw OutOfUniverse("key outside the permutation domain");
  const unsigned right = right_bits();
  const std::uint64_t r = x & bits::low_mask(right);
  const std::uint64_t l = right >= 64 ? 0 : x >> right;
  return Image{l ^ round_(r), r};
}

auto FeistelPermutation::invert(Image image) const -> std::uint64_t {
  const unsigned right = right_bits();
  if ((image.left >> left_bits_) != 0 || (image.right >> right) != 0) {
    throw OutOfUniverse("image outside the permutation range");
  }
  const std::uint64_t l = image.left ^ round_(image.right);
  return (left_bits_ == 0 ? 0 : l << right) | image.right;
}

auto to_string(HashMode mode) -> std::string {
  switch (mode) {
    case HashMode::succinct: return "succinct";
    case HashMode::carter: return "carter";
    case HashMode::raw_bits: return "raw_bits";
  }
  return "unknown";
}

auto parse_hash_mode(std::string_view text) -> HashMode {
  if (text == "succinct") return HashMode::succinct;
  if (text == "carter") return HashMode::carter;
  if (text == "raw_bits") return HashMode::raw_bits;
  throw std::invalid_argument("unknown hash mode '" + std::string(text) + "'");
}

auto default_independence(std::uint64_t n) -> unsigned {
  const double nd = static_cast<double>(n);
  const double k = std::ceil(std::pow(nd, 0.1) + std::pow(nd, 0.075));
  return static_cast<unsigned>(std::min(k, 64.0));
}

auto HashPlan::build(const FilterParams& params, std::uint64_t seed, HashMode mode) -> HashPlan {
  std::mt19937_64 rng(seed);
  const unsigned k = default_independence(params.n);
  HashPlan plan;
  plan.seed_ = seed;
  plan.mode_ = mode;
  plan.bin_mean_ = params.bin_mean_eff;
  plan.remainder_bits_ = params.remainder_bits;
  plan.key_space_ = params.dictionary_universe();
  plan.permutation_ = FeistelPermutation::draw(rng, params.universe_bits, params.subset_bits, k);
  plan.f_b_ = KWiseHash::draw(rng, k, params.bins);
  plan.f_q_ = PairwiseHash::draw(rng, params.bin_mean_eff);
  plan.g_r_ = PairwiseHash::draw(rng, std::uint64_t{1} << params.remainder_bits);
  plan.carter_ = PairwiseHash::draw(rng, params.u);
  return plan;
}

auto HashPlan::permute(std::uint64_t x) const -> FeistelPermutation::Image { return permutation_.evaluate(x); }

auto HashPlan::invert_permute(std::uint64_t h1, std::uint64_t h2) const -> std::uint64_t {
  return permutation_.invert({h1, h2});
}

auto HashPlan::locate(std::uint64_t x) const -> Location {
  if ((x >> permutation_.domain_bits()) != 0) throw OutOfUniverse("key outside the universe");
  std::uint64_t y = 0;
  switch (mode_) {
    case HashMode::succinct: {
      const auto [h1, h2] = permutation_.evaluate(x);
      return Location{h1, f_b_(h2), f_q_(h2), g_r_(h2)};
    }
    case HashMode::carter:
      y = carter_(x);
      break;
    case HashMode::raw_bits:
      y = x % key_space_;
      break;
  }
  const std::uint64_t rest = y >> remainder_bits_;
  return Location{0, rest / bin_mean_, rest % bin_mean_, y & bits::low_mask(remainder_bits_)};
}

auto HashPlan::reduce(std::uint64_t x) const -> std::uint64_t {
  const Location loc = locate(x);
  return ((loc.bin * bin_mean_ + loc.quotient) << remainder_bits_) | loc.remainder;
}

namespace {

auto pairwise_json(const PairwiseHash& h) -> nlohmann::json {
  return {{"a", h.a()}, {"b", h.b()}, {"range", h.range()}};
}

auto pairwise_from(const nlohmann::json& j) -> PairwiseHash {
  return PairwiseHash(j.at("a").get<std::uint64_t>(), j.at("b").get<std::uint64_t>(), j.at("range").get<std::uint64_t>());
}

}  // namespace

auto HashPlan::to_json() const -> nlohmann::json {
  return {
      {"seed", seed_},
      {"mode", to_string(mode_)},
      {"M", subsets()},
      {"prime", kMersenne61},
      {"universe_bits", permutation_.domain_bits()},
      {"bin_mean", bin_mean_},
      {"remainder_bits", remainder_bits_},
      {"key_space", key_space_},
      {"feistel", permutation_.round().coefficients()},
      {"f_b", {{"coefficients", f_b_.coefficients()}, {"range", f_b_.range()}}},
      {"f_q", pairwise_json(f_q_)},
      {"g_r", pairwise_json(g_r_)},
      {"carter", pairwise_json(carter_)},
  };
}

auto HashPlan::from_json(const nlohmann::json& j) -> HashPlan {
  if (j.at("prime").get<std::uint64_t>() != kMersenne61) throw std::invalid_argument("plan uses a different prime");
  HashPlan plan;
  plan.seed_ = j.at("seed").get<std::uint64_t>();
  plan.mode_ = parse_hash_mode(j.at("mode").get<std::string>());
  plan.bin_mean_ = j.at("bin_mean").get<std::uint64_t>();
  plan.remainder_bits_ = j.at("remainder_bits").get<unsigned>();
  plan.key_space_ = j.at("key_space").get<std::uint64_t>();
  const auto subsets = j.at("M").get<std::uint64_t>();
  const auto left_bits = static_cast<unsigned>(std::bit_width(subsets) - 1);
  plan.permutation_ = FeistelPermutation(
      j.at("universe_bits").get<unsigned>(), left_bits,
      KWiseHash(j.at("feistel").get<std::vector<std::uint64_t>>(), subsets));
  plan.f_b_ = KWiseHash(j.at("f_b").at("coefficients").get<std::vector<std::uint64_t>>(),
                        j.at("f_b").at("range").get<std::uint64_t>());
  plan.f_q_ = pairwise_from(j.at("f_q"));
  plan.g_r_ = pairwise_from(j.at("g_r"));
  plan.carter_ = pairwise_from(j.at("carter"));
  return plan;
}

}  // namespace rmsf
