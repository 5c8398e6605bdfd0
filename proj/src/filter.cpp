#include "rmsfilter/filter.hpp"

#include <random>

namespace rmsf {

namespace {
constexpr std::uint64_t kFingerprintSeedSalt = 0xa54ff53a5f1d36f1ULL;
}

auto DynamicFilter::create(std::uint64_t n, unsigned k, std::uint64_t seed, const FilterOptions& options)
    -> DynamicFilter {
  FilterParams params = derive_params(n, k, options.overrides);
  if (options.force_case && *options.force_case != params.case_kind) {
    params.case_kind = *options.force_case;
  }
  if (params.case_kind == CaseKind::dense) {
    HashPlan plan = HashPlan::build(params, seed, options.hash_mode);
    RmsDictionary dict(params, seed);
    return DynamicFilter(params, Dense{std::move(plan), std::move(dict)});
  }
  std::mt19937_64 rng(seed ^ kFingerprintSeedSalt);
  PairwiseHash fp = PairwiseHash::draw(rng, std::uint64_t{1} << k);
  RetrievalStore store(n, k, params.universe_bits, seed);
  return DynamicFilter(params, Sparse{std::move(store), fp});
}

auto DynamicFilter::insert(std::uint64_t x) -> Status {
  if (!in_universe(x)) return Status::out_of_universe;
  if (live_ == params_.n) return Status::at_capacity;
  Status st = std::visit(
      [&](auto& s) -> Status {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Dense>) {
          return s.dict.insert(s.plan.reduce(x));
        } else {
          return s.store.insert(x, s.fingerprint(x));
        }
      },
      state_);
  if (st == Status::ok) ++live_;
  return st;
}

auto DynamicFilter::remove(std::uint64_t x) -> Status {
  if (!in_universe(x)) return Status::out_of_universe;
  Status st = std::visit(
      [&](auto& s) -> Status {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Dense>) {
          return s.dict.remove(s.plan.reduce(x));
        } else {
          return s.store.remove(x);
        }
      },
      state_);
  if (st == Status::ok) --live_;
  return st;
}

auto DynamicFilter::query(std::uint64_t x) const -> bool {
  if (!in_universe(x)) return false;
  return std::visit(
      [&](const auto& s) -> bool {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Dense>) {
          return s.dict.query(s.plan.reduce(x));
        } else {
          const auto stored = s.store.retrieve(x);
          return stored.has_value() && *stored == s.fingerprint(x);
        }
      },
      state_);
}

auto DynamicFilter::stats() const -> FilterStats {
  FilterStats st;
  st.mode = params_.case_kind;
  st.live_count = live_;
  if (const auto* d = std::get_if<Dense>(&state_)) {
    st.dense = d->dict.stats();
    st.bits_used = st.dense->bits_used;
  } else {
    st.sparse = std::get<Sparse>(state_).store.stats();
    st.bits_used = st.sparse->bits_used;
  }
  st.bits_per_element = static_cast<double>(st.bits_used) / static_cast<double>(params_.n);
  return st;
}

auto DynamicFilter::plan() const noexcept -> const HashPlan* {
  const auto* d = std::get_if<Dense>(&state_);
  return d == nullptr ? nullptr : &d->plan;
}

auto DynamicFilter::dictionary() const noexcept -> const RmsDictionary* {
  const auto* d = std::get_if<Dense>(&state_);
  return d == nullptr ? nullptr : &d->dict;
}

auto DynamicFilter::dictionary() noexcept -> RmsDictionary* {
  auto* d = std::get_if<Dense>(&state_);
  return d == nullptr ? nullptr : &d->dict;
}

auto DynamicFilter::retrieval() const noexcept -> const RetrievalStore* {
  const auto* s = std::get_if<Sparse>(&state_);
  return s == nullptr ? nullptr : &s->store;
}

auto DynamicFilter::fingerprint(std::uint64_t x) const -> std::uint64_t {
  const auto* s = std::get_if<Sparse>(&state_);
  return s == nullptr ? 0 : s->fingerprint(x);
}

}  // namespace rmsf
