#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmsfilter/harness.hpp"

namespace rmsf::harness {

namespace {
constexpr std::size_t kHotPoolSize = 64;
constexpr std::uint64_t kHotPoolAttempts = 50'000'000;
}  // namespace

auto to_string(KeyDistribution d) -> std::string {
  return d == KeyDistribution::uniform ? "uniform" : "colliding";
}

auto parse_key_distribution(std::string_view text) -> KeyDistribution {
  if (text == "uniform") return KeyDistribution::uniform;
  if (text == "colliding") return KeyDistribution::colliding;
  throw std::invalid_argument("unknown key distribution: " + std::string(text));
}

auto to_string(OpKind k) -> std::string {
  switch (k) {
    case OpKind::insert: return "insert";
    case OpKind::remove: return "delete";
    case OpKind::query: return "query";
  }
  return "?";
}

void WorkloadSpec::validate() const {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  const double total = mix.insert + mix.remove + mix.query;
  if (mix.insert < 0 || mix.remove < 0 || mix.query < 0 || std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("op mix ratios must be non-negative and sum to 1");
  }
  if (load_factor < 0 || load_factor > 1) throw std::invalid_argument("load factor must lie in [0, 1]");
  if (hot_fraction < 0 || hot_fraction > 1) throw std::invalid_argument("hot fraction must lie in [0, 1]");
  if (keys == KeyDistribution::colliding) {
    if (hot_bins == 0) throw std::invalid_argument("colliding keys need at least one hot bin");
    if (!raw_bits && hash_mode == HashMode::carter) {
      throw std::invalid_argument("colliding keys need the succinct or raw_bits hash mode");
    }
  }
}

auto WorkloadSpec::filter_options() const -> FilterOptions {
  FilterOptions o;
  o.force_case = mode;
  o.hash_mode = raw_bits ? HashMode::raw_bits : hash_mode;
  o.overrides = overrides;
  return o;
}

auto WorkloadSpec::trial_seed(unsigned trial) const -> std::uint64_t {
  // splitmix64 step so neighbouring trials get unrelated seeds
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

WorkloadGenerator::WorkloadGenerator(const WorkloadSpec& spec, const DynamicFilter& filter, std::uint64_t seed)
    : spec_(spec), capacity_(filter.params().n), universe_bits_(filter.universe_bits()), rng_(seed) {
  live_.reserve(capacity_);
  if (spec.keys == KeyDistribution::colliding) build_hot_pool(filter);
}

void WorkloadGenerator::build_hot_pool(const DynamicFilter& filter) {
  plan_ = filter.plan();
  if (plan_ == nullptr) throw std::invalid_argument("colliding keys need the dense case");
  mode_ = plan_->mode();
  const FilterParams& p = filter.params();
  key_space_ = p.dictionary_universe();
  std::vector<std::uint64_t> hot;
  for (std::size_t i = 0; i < spec_.hot_bins; ++i) hot.push_back(below(p.bins));

  if (mode_ == HashMode::raw_bits) {
    for (std::size_t i = 0; i < kHotPoolSize; ++i) {
      const std::uint64_t bin = hot[i % hot.size()];
      const std::uint64_t q = below(p.bin_mean_eff);
      const std::uint64_t r = below(std::uint64_t{1} << p.remainder_bits);
      hot_pool_.push_back(((bin * p.bin_mean_eff + q) << p.remainder_bits) | r);
    }
    return;
  }
  // Succinct: collect right halves h2 whose bin hash lands in a hot bin.
  const unsigned right_bits = plan_->permutation().right_bits();
  for (std::uint64_t attempt = 0; attempt < kHotPoolAttempts && hot_pool_.size() < kHotPoolSize; ++attempt) {
    const std::uint64_t h2 = rng_() & bits::low_mask(right_bits);
    const std::uint64_t bin = plan_->bin_hash()(h2);
    for (auto b : hot) {
      if (b == bin) {
        hot_pool_.push_back(h2);
        break;
      }
    }
  }
  if (hot_pool_.empty()) throw std::runtime_error("could not find keys for the hot bins");
}

auto WorkloadGenerator::unit() -> double { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

auto WorkloadGenerator::below(std::uint64_t bound) -> std::uint64_t {
  return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng_);
}

auto WorkloadGenerator::uniform_key() -> std::uint64_t { return rng_() & bits::low_mask(universe_bits_); }

auto WorkloadGenerator::fresh_key() -> std::uint64_t {
  if (hot_pool_.empty() || unit() >= spec_.hot_fraction) return uniform_key();
  const std::uint64_t pick = hot_pool_[below(hot_pool_.size())];
  if (mode_ == HashMode::raw_bits) {
    const std::uint64_t lifts = (bits::low_mask(universe_bits_) - pick) / key_space_ + 1;
    return pick + below(lifts) * key_space_;
  }
  const unsigned left_bits = plan_->permutation().left_bits();
  const std::uint64_t h1 = left_bits == 0 ? 0 : (rng_() & bits::low_mask(left_bits));
  return plan_->invert_permute(h1, pick);
}

auto WorkloadGenerator::next() -> Op {
  pending_remove_.reset();
  const double roll = unit();
  OpKind kind = roll < spec_.mix.insert                   ? OpKind::insert
                : roll < spec_.mix.insert + spec_.mix.remove ? OpKind::remove
                                                             : OpKind::query;
  if (kind == OpKind::insert && live_.size() >= capacity_) kind = OpKind::remove;
  if (kind == OpKind::remove && live_.empty()) kind = OpKind::insert;

  switch (kind) {
    case OpKind::insert:
      return {kind, fresh_key()};
    case OpKind::remove: {
      const std::size_t idx = below(live_.size());
      pending_remove_ = idx;
      return {kind, live_[idx]};
    }
    case OpKind::query:
      if (!live_.empty() && unit() < 0.5) return {kind, live_[below(live_.size())]};
      return {kind, fresh_key()};
  }
  return {OpKind::query, 0};
}

void WorkloadGenerator::commit(const Op& op, Status status) {
  if (status != Status::ok) return;
  if (op.kind == OpKind::insert) {
    live_.push_back(op.key);
  } else if (op.kind == OpKind::remove) {
    std::size_t idx = 0;
    if (pending_remove_ && *pending_remove_ < live_.size() && live_[*pending_remove_] == op.key) {
      idx = *pending_remove_;
    } else {
      idx = static_cast<std::size_t>(std::find(live_.begin(), live_.end(), op.key) - live_.begin());
      if (idx == live_.size()) return;
    }
    live_[idx] = live_.back();
    live_.pop_back();
  }
  pending_remove_.reset();
}

}  // namespace rmsf::harness
