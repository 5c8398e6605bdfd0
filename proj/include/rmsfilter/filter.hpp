#pragma once

// Dynamic approximate-membership filter over [2^universe_bits].
//
// Dense case: every key is hashed to a dictionary key in [m * B_eff * 2^k]
// and the image multiset is stored exactly in an RmsDictionary, so a member
// always answers true and a non-member answers true only when its image
// collides with a stored one.
//
// Sparse case: a retrieval store keeps a k-bit fingerprint per live key and a
// query compares the retrieved value with the key's fingerprint.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>

#include "rmsfilter/hashing.hpp"
#include "rmsfilter/params.hpp"
#include "rmsfilter/retrieval.hpp"
#include "rmsfilter/rms_dictionary.hpp"
#include "rmsfilter/status.hpp"

namespace rmsf {

struct FilterOptions {
  std::optional<CaseKind> force_case;  // default: select_case
  HashMode hash_mode = HashMode::succinct;
  ParamOverrides overrides;
};

struct FilterStats {
  CaseKind mode = CaseKind::dense;
  std::size_t live_count = 0;
  std::uint64_t bits_used = 0;
  double bits_per_element = 0;  // bits_used / n
  std::optional<RmsStats> dense;
  std::optional<RetrievalStats> sparse;
};

class DynamicFilter {
 public:
  // Throws ParamError when the parameters cannot be derived.
  static auto create(std::uint64_t n, unsigned k, std::uint64_t seed, const FilterOptions& options = {})
      -> DynamicFilter;

  auto insert(std::uint64_t x) -> Status;  // ok | overflow | at_capacity | out_of_universe
  auto remove(std::uint64_t x) -> Status;  // ok | not_found | out_of_universe
  [[nodiscard]] auto query(std::uint64_t x) const -> bool;

  [[nodiscard]] auto mode() const noexcept -> CaseKind { return params_.case_kind; }
  [[nodiscard]] auto params() const noexcept -> const FilterParams& { return params_; }
  [[nodiscard]] auto universe_bits() const noexcept -> unsigned { return params_.universe_bits; }
  [[nodiscard]] auto live_count() const noexcept -> std::size_t { return live_; }
  [[nodiscard]] auto stats() const -> FilterStats;

  // Dense-mode internals; null in sparse mode.
  [[nodiscard]] auto plan() const noexcept -> const HashPlan*;
  [[nodiscard]] auto dictionary() const noexcept -> const RmsDictionary*;
  [[nodiscard]] auto dictionary() noexcept -> RmsDictionary*;
  // Sparse-mode internals; null in dense mode.
  [[nodiscard]] auto retrieval() const noexcept -> const RetrievalStore*;
  [[nodiscard]] auto fingerprint(std::uint64_t x) const -> std::uint64_t;

 private:
  struct Dense {
    HashPlan plan;
    RmsDictionary dict;
  };
  struct Sparse {
    RetrievalStore store;
    PairwiseHash fingerprint;
  };

  DynamicFilter(FilterParams params, std::variant<Dense, Sparse> state)
      : params_(std::move(params)), state_(std::move(state)) {}

  [[nodiscard]] auto in_universe(std::uint64_t x) const noexcept -> bool {
    return (x >> params_.universe_bits) == 0;
  }

  FilterParams params_;
  std::variant<Dense, Sparse> state_;
  std::size_t live_ = 0;
};

}  // namespace rmsf
