#pragma once

// Validation harness: reproducible workloads, oracle replay, false-positive
// measurement, spare census, space audit and latency bench. Every run is a
// pure function of its WorkloadSpec (seed included).

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "rmsfilter/filter.hpp"

namespace rmsf::harness {

inline constexpr std::string_view kReportSchema = "rmsfilter-report/1";

enum class KeyDistribution { uniform, colliding };

auto to_string(KeyDistribution d) -> std::string;
auto parse_key_distribution(std::string_view text) -> KeyDistribution;

struct OpMix {
  double insert = 0.5;
  double remove = 0.2;
  double query = 0.3;
};

struct WorkloadSpec {
  std::uint64_t n = 100'000;
  unsigned k = 6;
  std::uint64_t seed = 1;
  std::uint64_t op_count = 1'000'000;
  OpMix mix;
  KeyDistribution keys = KeyDistribution::uniform;
  double hot_fraction = 0.01;  // colliding: share of fresh keys aimed at the hot bins
  std::size_t hot_bins = 4;
  unsigned trials = 1;
  std::optional<CaseKind> mode;  // empty: chosen from (n, epsilon)
  bool raw_bits = false;
  HashMode hash_mode = HashMode::succinct;  // ignored when raw_bits is set
  ParamOverrides overrides;
  std::uint64_t negative_queries = 1'000'000;
  double load_factor = 1.0;  // fpr / space-audit: live elements = floor(load_factor * n) before measuring

  // Throws std::invalid_argument when the workload is inconsistent.
  void validate() const;
  [[nodiscard]] auto filter_options() const -> FilterOptions;
  [[nodiscard]] auto trial_seed(unsigned trial) const -> std::uint64_t;
};

enum class OpKind { insert, remove, query };
auto to_string(OpKind k) -> std::string;

struct Op {
  OpKind kind;
  std::uint64_t key;
  friend auto operator==(const Op&, const Op&) -> bool = default;
};

// Produces operations against a dynamic set of at most n elements. Deletes pick
// a uniformly random live insertion record; an insert at capacity becomes a
// delete and a delete on an empty set becomes an insert.
class WorkloadGenerator {
 public:
  WorkloadGenerator(const WorkloadSpec& spec, const DynamicFilter& filter, std::uint64_t seed);

  [[nodiscard]] auto next() -> Op;
  // Fresh key from the configured distribution (never used as a live key's twin).
  [[nodiscard]] auto fresh_key() -> std::uint64_t;
  // Uniform key of U^.
  [[nodiscard]] auto uniform_key() -> std::uint64_t;
  // Records the filter's verdict so the live list tracks accepted inserts.
  void commit(const Op& op, Status status);

  [[nodiscard]] auto live() const noexcept -> const std::vector<std::uint64_t>& { return live_; }
  [[nodiscard]] auto rng() noexcept -> std::mt19937_64& { return rng_; }

 private:
  [[nodiscard]] auto unit() -> double;
  [[nodiscard]] auto below(std::uint64_t bound) -> std::uint64_t;
  void build_hot_pool(const DynamicFilter& filter);

  const WorkloadSpec& spec_;
  std::uint64_t capacity_;
  unsigned universe_bits_;
  std::mt19937_64 rng_;
  std::vector<std::uint64_t> live_;
  std::optional<std::size_t> pending_remove_;
  // Colliding distribution.
  HashMode mode_ = HashMode::succinct;
  const HashPlan* plan_ = nullptr;
  std::uint64_t key_space_ = 0;
  std::vector<std::uint64_t> hot_pool_;  // h2 values (succinct) or dictionary keys (raw_bits)
};

struct Gate {
  std::string name;
  bool passed;
  std::string detail;
};

struct Counterexample {
  unsigned trial = 0;
  std::uint64_t op_index = 0;
  Op op{OpKind::query, 0};
  std::string reason;
  std::string expected;
  std::string actual;
  std::uint64_t prefix_length = 0;
  std::vector<Op> prefix_tail;  // last ops of the failing prefix (regenerate the rest from the spec)
};

struct OracleOptions {
  // Flip one pocket header bit right before this op index (checker self-test).
  std::optional<std::uint64_t> inject_fault_at;
};

struct OracleReport {
  bool passed = true;
  unsigned trials = 0;
  std::uint64_t ops = 0;
  std::uint64_t queries = 0;
  std::uint64_t member_queries = 0;
  std::uint64_t false_negatives = 0;
  std::uint64_t overflow_events = 0;
  std::uint64_t max_spare_live = 0;
  double seconds = 0;
  std::optional<Counterexample> counterexample;
  [[nodiscard]] auto to_json(const WorkloadSpec& spec) const -> nlohmann::json;
};

auto run_oracle_check(const WorkloadSpec& spec, const OracleOptions& options = {}) -> OracleReport;

struct ProportionInterval {
  double low;
  double high;
};
// Wilson score interval at 95% confidence.
auto wilson_interval(std::uint64_t successes, std::uint64_t trials) -> ProportionInterval;

struct StatsReport {
  std::string command;
  CaseKind mode = CaseKind::dense;
  std::uint64_t n = 0;
  unsigned k = 0;
  double fpr_bound = 0;  // epsilon
  std::uint64_t negative_queries = 0;
  std::uint64_t false_positives = 0;
  double empirical_fpr = 0;
  ProportionInterval fpr_ci{0, 0};
  std::uint64_t false_negatives = 0;
  std::uint64_t bits_used = 0;
  double bits_per_element = 0;
  std::uint64_t info_lower_bound = 0;  // n * log2(1/epsilon)
  std::uint64_t spare_capacity = 0;
  std::uint64_t spare_peak = 0;
  double spare_peak_fraction = 0;
  std::vector<std::uint64_t> spare_peaks;  // per trial
  std::uint64_t spare_at_fill = 0;         // spare load when the live set first reaches n (worst trial)
  double full_bin_rate = 0;                // worst trial
  std::vector<double> full_bin_rates;      // per trial
  double predicted_full_bin_probability = 0;
  double gamma = 0;
  double delta = 0;
  std::uint64_t bin_mean = 0;
  std::uint64_t bin_capacity = 0;
  std::uint64_t overflow_events = 0;
  std::unordered_map<std::string, std::vector<double>> op_latency_ns;  // op -> {p50, p99, p99.9}
  std::unordered_map<std::string, std::uint64_t> op_counts;
  int max_pocket_words_touched = 0;
  unsigned word_budget = 0;
  double seconds = 0;
  std::vector<Gate> gates;

  [[nodiscard]] auto passed() const -> bool;
  [[nodiscard]] auto to_json() const -> nlohmann::json;
};

auto run_fpr(const WorkloadSpec& spec) -> StatsReport;

struct CensusOptions {
  bool gate_spare = true;      // spare peak < n_s in >= 99% of trials
  bool gate_full_bins = false; // full-bin rate <= gamma in >= 95% of trials
};
auto run_spare_census(const WorkloadSpec& spec, const CensusOptions& options = {}) -> StatsReport;

struct SpaceAuditRow {
  std::uint64_t n = 0;
  unsigned k = 0;
  double delta = 0;
  std::uint64_t bin_mean = 0;
  std::uint64_t bin_capacity = 0;
  std::uint64_t bins = 0;
  std::uint64_t pocket_bits = 0;
  std::uint64_t spare_bits = 0;
  std::uint64_t bits_used = 0;
  std::uint64_t lower_bound = 0;
  double bits_per_element = 0;
  double overhead_ratio = 0;   // bits_per_element / k
  double additive_constant = 0;  // bits_per_element - (1 + delta) k
  double spare_share = 0;        // spare_bits / bits_used
  bool pocket_identity = false;  // pocket_bits == m * ((B + n') + n' k)
};

struct SpaceAudit {
  std::vector<SpaceAuditRow> rows;
  std::vector<Gate> gates;
  double max_additive_constant = 10.0;
  double max_spare_share = 0.05;
  [[nodiscard]] auto passed() const -> bool;
  [[nodiscard]] auto to_json() const -> nlohmann::json;
  [[nodiscard]] auto to_csv() const -> std::string;
};

struct AuditCell {
  std::uint64_t n;
  unsigned k;
};
auto run_space_audit(const std::vector<AuditCell>& grid, const WorkloadSpec& base) -> SpaceAudit;

auto run_bench(const WorkloadSpec& spec) -> StatsReport;

// P[Bin(trials, p) >= threshold].
auto binomial_upper_tail(std::uint64_t trials, double p, std::uint64_t threshold) -> double;

// Flattens scalar fields of a report object into "key,value" CSV lines.
auto json_to_csv(const nlohmann::json& report) -> std::string;

}  // namespace rmsf::harness
