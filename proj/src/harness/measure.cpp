#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "rmsfilter/harness.hpp"

namespace rmsf::harness {

namespace {

constexpr std::uint64_t kGeneratorSalt = 0x2545f4914f6cdd1dULL;
constexpr double kWilsonZ = 1.959963984540054;

using Clock = std::chrono::steady_clock;

auto seconds_since(Clock::time_point start) -> double {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

auto fmt(double v) -> std::string {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

auto quorum(unsigned trials, double share) -> unsigned {
  return static_cast<unsigned>(std::ceil(share * trials - 1e-9));
}

// Inserts fresh keys until the filter holds n of them; returns the member set.
auto fill(DynamicFilter& filter, WorkloadGenerator& gen, double load_factor, std::uint64_t& overflow_events)
    -> std::unordered_set<std::uint64_t> {
  const auto target = static_cast<std::uint64_t>(std::floor(load_factor * static_cast<double>(filter.params().n)));
  std::unordered_set<std::uint64_t> members;
  members.reserve(target);
  const std::uint64_t attempts = 4 * target + 1024;
  for (std::uint64_t i = 0; i < attempts && filter.live_count() < target; ++i) {
    const Op op{OpKind::insert, gen.fresh_key()};
    if (members.contains(op.key)) continue;
    const Status st = filter.insert(op.key);
    gen.commit(op, st);
    if (st == Status::ok) members.insert(op.key);
    if (st == Status::overflow) ++overflow_events;
  }
  return members;
}

void describe(StatsReport& r, const DynamicFilter& filter) {
  const FilterParams& p = filter.params();
  r.mode = p.case_kind;
  r.n = p.n;
  r.k = p.k;
  r.fpr_bound = p.epsilon();
  r.delta = p.delta;
  r.bin_mean = p.bin_mean_eff;
  r.bin_capacity = p.bin_capacity;
  r.spare_capacity = p.spare_capacity;
  r.gamma = p.gamma();
  r.word_budget = p.word_budget;
  r.info_lower_bound = p.n * p.k;
}

auto percentile(std::vector<double>& v, double q) -> double {
  if (v.empty()) return 0;
  const auto idx = static_cast<std::size_t>(std::min<double>(v.size() - 1, std::floor(q * v.size())));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) flatten(value, prefix.empty() ? key : prefix + "." + key, os);
    return;
  }
  if (j.is_array()) {
    bool scalars = std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_primitive(); });
    if (scalars) {
      os << prefix << ",\"";
      for (std::size_t i = 0; i < j.size(); ++i) os << (i ? ";" : "") << (j[i].is_string() ? j[i].get<std::string>() : j[i].dump());
      os << "\"\n";
    } else {
      for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
    }
    return;
  }
  os << prefix << ',' << (j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
}

auto gates_json(const std::vector<Gate>& gates) -> nlohmann::json {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : gates) out.push_back({{"name", g.name}, {"passed", g.passed}, {"detail", g.detail}});
  return out;
}

}  // namespace

auto wilson_interval(std::uint64_t successes, std::uint64_t trials) -> ProportionInterval {
  if (trials == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2 * nn)) / denom;
  const double half = kWilsonZ * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  // The bounds are exactly 0 and 1 at the extremes.
  const double low = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double high = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {low, high};
}

auto binomial_upper_tail(std::uint64_t trials, double p, std::uint64_t threshold) -> double {
  if (threshold == 0) return 1.0;
  if (threshold > trials || p <= 0) return 0.0;
  if (p >= 1) return 1.0;
  const double nn = static_cast<double>(trials);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  double sum = 0;
  for (std::uint64_t i = threshold; i <= trials; ++i) {
    const double ii = static_cast<double>(i);
    const double term =
        std::exp(std::lgamma(nn + 1) - std::lgamma(ii + 1) - std::lgamma(nn - ii + 1) + ii * log_p + (nn - ii) * log_q);
    sum += term;
    if (ii > nn * p && term < sum * 1e-17) break;
  }
  return std::min(1.0, sum);
}

auto StatsReport::passed() const -> bool {
  return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.passed; });
}

auto StatsReport::to_json() const -> nlohmann::json {
  nlohmann::json j{
      {"schema", kReportSchema},
      {"command", command},
      {"passed", passed()},
      {"mode", std::string(rmsf::to_string(mode))},
      {"n", n},
      {"k", k},
      {"epsilon", fpr_bound},
      {"delta", delta},
      {"bin_mean", bin_mean},
      {"bin_capacity", bin_capacity},
      {"spare_capacity", spare_capacity},
      {"gamma", gamma},
      {"word_budget", word_budget},
      {"seconds", seconds},
      {"gates", gates_json(gates)},
  };
  if (command == "fpr") {
    j["negative_queries"] = negative_queries;
    j["false_positives"] = false_positives;
    j["empirical_fpr"] = empirical_fpr;
    j["fpr_ci"] = {{"low", fpr_ci.low}, {"high", fpr_ci.high}, {"confidence", 0.95}};
    j["false_negatives"] = false_negatives;
    j["bits_used"] = bits_used;
    j["bits_per_element"] = bits_per_element;
    j["info_lower_bound"] = info_lower_bound;
    j["overflow_events"] = overflow_events;
  } else if (command == "spare-census") {
    j["spare_peak"] = spare_peak;
    j["spare_peak_fraction"] = spare_peak_fraction;
    j["spare_peaks"] = spare_peaks;
    j["spare_at_fill"] = spare_at_fill;
    j["full_bin_rate"] = full_bin_rate;
    j["full_bin_rates"] = full_bin_rates;
    j["predicted_full_bin_probability"] = predicted_full_bin_probability;
    j["overflow_events"] = overflow_events;
  } else if (command == "bench") {
    nlohmann::json lat = nlohmann::json::object();
    for (const auto& [op, ps] : op_latency_ns) {
      lat[op] = {{"count", op_counts.at(op)}, {"p50_ns", ps[0]}, {"p99_ns", ps[1]}, {"p999_ns", ps[2]}};
    }
    j["latency"] = lat;
    j["max_pocket_words_touched"] = max_pocket_words_touched;
    j["overflow_events"] = overflow_events;
    j["bits_used"] = bits_used;
    j["bits_per_element"] = bits_per_element;
  }
  return j;
}

auto json_to_csv(const nlohmann::json& report) -> std::string {
  std::ostringstream os;
  os << "metric,value\n";
  flatten(report, "", os);
  return os.str();
}

auto run_fpr(const WorkloadSpec& spec) -> StatsReport {
  spec.validate();
  const auto start = Clock::now();
  StatsReport r;
  r.command = "fpr";
  for (unsigned t = 0; t < spec.trials; ++t) {
    auto filter = DynamicFilter::create(spec.n, spec.k, spec.trial_seed(t), spec.filter_options());
    WorkloadGenerator gen(spec, filter, spec.trial_seed(t) ^ kGeneratorSalt);
    if (t == 0) describe(r, filter);
    const auto members = fill(filter, gen, spec.load_factor, r.overflow_events);
    for (auto x : members) {
      if (!filter.query(x)) ++r.false_negatives;
    }
    for (std::uint64_t i = 0; i < spec.negative_queries; ++i) {
      std::uint64_t x = gen.uniform_key();
      while (members.contains(x)) x = gen.uniform_key();
      if (filter.query(x)) ++r.false_positives;
    }
    r.negative_queries += spec.negative_queries;
    const auto st = filter.stats();
    r.bits_used = std::max(r.bits_used, st.bits_used);
    r.bits_per_element = std::max(r.bits_per_element, st.bits_per_element);
  }
  r.empirical_fpr = r.negative_queries == 0 ? 0.0 : static_cast<double>(r.false_positives) / r.negative_queries;
  r.fpr_ci = wilson_interval(r.false_positives, r.negative_queries);
  r.gates.push_back({"no_false_negatives", r.false_negatives == 0, std::to_string(r.false_negatives) + " misses"});
  r.gates.push_back({"fpr_within_1.2_epsilon", r.empirical_fpr <= 1.2 * r.fpr_bound,
                     fmt(r.empirical_fpr) + " vs " + fmt(1.2 * r.fpr_bound)});
  r.gates.push_back({"wilson_upper_within_1.3_epsilon", r.fpr_ci.high <= 1.3 * r.fpr_bound,
                     fmt(r.fpr_ci.high) + " vs " + fmt(1.3 * r.fpr_bound)});
  r.seconds = seconds_since(start);
  return r;
}

auto run_spare_census(const WorkloadSpec& spec, const CensusOptions& options) -> StatsReport {
  spec.validate();
  const auto start = Clock::now();
  StatsReport r;
  r.command = "spare-census";
  unsigned spare_ok = 0;
  unsigned bins_ok = 0;
  for (unsigned t = 0; t < spec.trials; ++t) {
    auto filter = DynamicFilter::create(spec.n, spec.k, spec.trial_seed(t), spec.filter_options());
    const RmsDictionary* dict = filter.dictionary();
    if (dict == nullptr) throw std::invalid_argument("spare census needs the dense case");
    WorkloadGenerator gen(spec, filter, spec.trial_seed(t) ^ kGeneratorSalt);
    if (t == 0) {
      describe(r, filter);
      const FilterParams& p = filter.params();
      r.predicted_full_bin_probability = binomial_upper_tail(p.n, 1.0 / static_cast<double>(p.bins), p.bin_capacity);
    }
    // One op stream from an empty filter; the full-bin snapshot is taken the
    // first time the live set reaches n.
    std::uint64_t peak = 0;
    std::optional<double> rate;
    for (std::uint64_t i = 0; i < spec.op_count; ++i) {
      const Op op = gen.next();
      if (op.kind == OpKind::query) continue;
      const Status st = op.kind == OpKind::insert ? filter.insert(op.key) : filter.remove(op.key);
      gen.commit(op, st);
      if (st == Status::overflow) ++r.overflow_events;
      peak = std::max<std::uint64_t>(peak, dict->spare().live_count());
      if (!rate && filter.live_count() == spec.n) {
        rate = static_cast<double>(dict->stats().full_bins) / static_cast<double>(dict->bin_count());
        r.spare_at_fill = std::max<std::uint64_t>(r.spare_at_fill, dict->spare().live_count());
      }
    }
    if (!rate) rate = static_cast<double>(dict->stats().full_bins) / static_cast<double>(dict->bin_count());
    r.spare_peaks.push_back(peak);
    r.full_bin_rates.push_back(*rate);
    r.spare_peak = std::max(r.spare_peak, peak);
    r.full_bin_rate = std::max(r.full_bin_rate, *rate);
    if (peak < r.spare_capacity) ++spare_ok;
    if (*rate <= r.gamma) ++bins_ok;
  }
  r.spare_peak_fraction = static_cast<double>(r.spare_peak) / static_cast<double>(r.n);
  if (options.gate_spare) {
    r.gates.push_back({"spare_peak_below_capacity", spare_ok >= quorum(spec.trials, 0.99),
                       std::to_string(spare_ok) + "/" + std::to_string(spec.trials) + " trials"});
    r.gates.push_back({"spare_peak_fraction_below_2pct", r.spare_peak_fraction < 0.02, fmt(r.spare_peak_fraction)});
  }
  if (options.gate_full_bins) {
    r.gates.push_back({"full_bin_rate_within_gamma", bins_ok >= quorum(spec.trials, 0.95),
                       std::to_string(bins_ok) + "/" + std::to_string(spec.trials) + " trials"});
  }
  r.seconds = seconds_since(start);
  return r;
}

auto run_bench(const WorkloadSpec& spec) -> StatsReport {
  spec.validate();
  const auto start = Clock::now();
  StatsReport r;
  r.command = "bench";
  auto filter = DynamicFilter::create(spec.n, spec.k, spec.trial_seed(0), spec.filter_options());
  describe(r, filter);
  WorkloadGenerator gen(spec, filter, spec.trial_seed(0) ^ kGeneratorSalt);
  bits::AccessTrace trace;
  RmsDictionary* dict = filter.dictionary();
  if (dict != nullptr) dict->trace_into(&trace);

  std::unordered_map<std::string, std::vector<double>> samples;
  bool out_of_span = false;
  for (std::uint64_t i = 0; i < spec.op_count; ++i) {
    const Op op = gen.next();
    trace.reset();
    const auto t0 = Clock::now();
    Status st = Status::ok;
    switch (op.kind) {
      case OpKind::insert: st = filter.insert(op.key); break;
      case OpKind::remove: st = filter.remove(op.key); break;
      case OpKind::query: {
        const bool hit = filter.query(op.key);
        asm volatile("" : : "r"(hit));
        break;
      }
    }
    const auto t1 = Clock::now();
    gen.commit(op, st);
    if (st == Status::overflow) ++r.overflow_events;
    samples[to_string(op.kind)].push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    r.max_pocket_words_touched = std::max(r.max_pocket_words_touched, trace.count());
    out_of_span = out_of_span || trace.out_of_span;
  }
  if (dict != nullptr) dict->trace_into(nullptr);
  for (auto& [op, v] : samples) {
    r.op_counts[op] = v.size();
    r.op_latency_ns[op] = {percentile(v, 0.5), percentile(v, 0.99), percentile(v, 0.999)};
  }
  const auto st = filter.stats();
  r.bits_used = st.bits_used;
  r.bits_per_element = st.bits_per_element;
  if (dict != nullptr) {
    r.gates.push_back({"pocket_words_within_budget",
                       !out_of_span && r.max_pocket_words_touched <= static_cast<int>(r.word_budget),
                       std::to_string(r.max_pocket_words_touched) + " <= " + std::to_string(r.word_budget)});
  }
  r.seconds = seconds_since(start);
  return r;
}

auto SpaceAudit::passed() const -> bool {
  return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.passed; });
}

auto SpaceAudit::to_json() const -> nlohmann::json {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& row : rows) {
    rs.push_back({{"n", row.n},
                  {"k", row.k},
                  {"delta", row.delta},
                  {"bin_mean", row.bin_mean},
                  {"bin_capacity", row.bin_capacity},
                  {"bins", row.bins},
                  {"pocket_bits", row.pocket_bits},
                  {"spare_bits", row.spare_bits},
                  {"bits_used", row.bits_used},
                  {"lower_bound", row.lower_bound},
                  {"bits_per_element", row.bits_per_element},
                  {"overhead_ratio", row.overhead_ratio},
                  {"additive_constant", row.additive_constant},
                  {"spare_share", row.spare_share},
                  {"pocket_identity", row.pocket_identity}});
  }
  return {{"schema", kReportSchema}, {"command", "space-audit"}, {"passed", passed()},
          {"rows", rs},              {"gates", gates_json(gates)}};
}

auto SpaceAudit::to_csv() const -> std::string {
  std::ostringstream os;
  os << "n,k,delta,bin_mean,bin_capacity,bins,pocket_bits,spare_bits,bits_used,lower_bound,"
        "bits_per_element,overhead_ratio,additive_constant,spare_share,pocket_identity\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.k << ',' << fmt(r.delta) << ',' << r.bin_mean << ',' << r.bin_capacity << ',' << r.bins
       << ',' << r.pocket_bits << ',' << r.spare_bits << ',' << r.bits_used << ',' << r.lower_bound << ','
       << fmt(r.bits_per_element) << ',' << fmt(r.overhead_ratio) << ',' << fmt(r.additive_constant) << ','
       << fmt(r.spare_share) << ',' << (r.pocket_identity ? "true" : "false") << '\n';
  }
  return os.str();
}

auto run_space_audit(const std::vector<AuditCell>& grid, const WorkloadSpec& base) -> SpaceAudit {
  SpaceAudit audit;
  for (const auto& cell : grid) {
    WorkloadSpec spec = base;
    spec.n = cell.n;
    spec.k = cell.k;
    spec.validate();
    auto filter = DynamicFilter::create(spec.n, spec.k, spec.trial_seed(0), spec.filter_options());
    WorkloadGenerator gen(spec, filter, spec.trial_seed(0) ^ kGeneratorSalt);
    std::uint64_t overflow = 0;
    (void)fill(filter, gen, spec.load_factor, overflow);
    const FilterParams& p = filter.params();
    const auto st = filter.stats();
    SpaceAuditRow row;
    row.n = p.n;
    row.k = p.k;
    row.delta = p.delta;
    row.bin_mean = p.bin_mean_eff;
    row.bin_capacity = p.bin_capacity;
    row.bins = p.bins;
    row.bits_used = st.bits_used;
    row.lower_bound = p.n * p.k;
    row.bits_per_element = st.bits_per_element;
    row.overhead_ratio = row.bits_per_element / p.k;
    row.additive_constant = row.bits_per_element - (1.0 + p.delta) * p.k;
    if (st.dense) {
      row.pocket_bits = st.dense->pocket_bits;
      row.spare_bits = st.dense->spare_bits;
      row.pocket_identity =
          row.pocket_bits == p.bins * ((p.bin_mean_eff + p.bin_capacity) + p.bin_capacity * p.remainder_bits);
    } else {
      row.pocket_identity = true;
    }
    row.spare_share = static_cast<double>(row.spare_bits) / static_cast<double>(row.bits_used);
    const std::string tag = "n=" + std::to_string(row.n) + ",k=" + std::to_string(row.k);
    audit.gates.push_back({"additive_constant[" + tag + "]", row.additive_constant <= audit.max_additive_constant,
                           fmt(row.additive_constant) + " <= " + fmt(audit.max_additive_constant)});
    audit.gates.push_back({"spare_share[" + tag + "]", row.spare_share < audit.max_spare_share,
                           fmt(row.spare_share) + " < " + fmt(audit.max_spare_share)});
    audit.gates.push_back({"pocket_identity[" + tag + "]", row.pocket_identity, ""});
    audit.rows.push_back(row);
  }
  return audit;
}

}  // namespace rmsf::harness
