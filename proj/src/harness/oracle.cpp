#include <chrono>
#include <deque>
#include <stdexcept>

#include "rmsfilter/harness.hpp"

namespace rmsf::harness {

namespace {

constexpr std::size_t kPrefixTail = 32;
constexpr std::uint64_t kGeneratorSalt = 0x5851f42d4c957f2dULL;

auto op_json(const Op& op) -> nlohmann::json { return {{"op", to_string(op.kind)}, {"key", op.key}}; }

class TrialRunner {
 public:
  TrialRunner(const WorkloadSpec& spec, unsigned trial, const OracleOptions& options, OracleReport& report)
      : spec_(spec),
        trial_(trial),
        options_(options),
        report_(report),
        filter_(DynamicFilter::create(spec.n, spec.k, spec.trial_seed(trial), spec.filter_options())),
        gen_(spec, filter_, spec.trial_seed(trial) ^ kGeneratorSalt) {}

  // Returns false once a counterexample has been recorded.
  auto run() -> bool {
    for (std::uint64_t i = 0; i < spec_.op_count; ++i) {
      if (options_.inject_fault_at && *options_.inject_fault_at == i && trial_ == 0) inject_fault();
      const Op op = gen_.next();
      remember(op);
      if (!step(i, op)) return false;
      ++report_.ops;
    }
    return final_sweep();
  }

 private:
  [[nodiscard]] auto image(std::uint64_t x) const -> std::uint64_t {
    const HashPlan* plan = filter_.plan();
    return plan == nullptr ? x : plan->reduce(x);
  }

  [[nodiscard]] auto stored_multiplicity(std::uint64_t x, std::uint64_t y) const -> std::size_t {
    if (const auto* dict = filter_.dictionary()) return dict->multiplicity(y);
    return filter_.retrieval()->multiplicity(x);
  }

  void remember(const Op& op) {
    tail_.push_back(op);
    if (tail_.size() > kPrefixTail) tail_.pop_front();
  }

  auto fail(std::uint64_t index, const Op& op, std::string reason, std::string expected, std::string actual)
      -> bool {
    Counterexample c;
    c.trial = trial_;
    c.op_index = index;
    c.op = op;
    c.reason = std::move(reason);
    c.expected = std::move(expected);
    c.actual = std::move(actual);
    c.prefix_length = index + 1;
    c.prefix_tail.assign(tail_.begin(), tail_.end());
    report_.counterexample = std::move(c);
    report_.passed = false;
    return false;
  }

  auto step(std::uint64_t index, const Op& op) -> bool {
    const std::uint64_t y = image(op.key);
    switch (op.kind) {
      case OpKind::insert: {
        const bool at_cap = filter_.live_count() >= spec_.n;
        const Status st = filter_.insert(op.key);
        gen_.commit(op, st);
        if (at_cap != (st == Status::at_capacity)) {
          return fail(index, op, "capacity status mismatch", at_cap ? "at_capacity" : "ok|overflow", std::string(to_string(st)));
        }
        if (st == Status::ok) {
          ++keys_[op.key];
          ++images_[y];
        } else if (st == Status::overflow) {
          ++report_.overflow_events;
        } else if (st != Status::at_capacity) {
          return fail(index, op, "unexpected insert status", "ok|overflow|at_capacity", std::string(to_string(st)));
        }
        if (const auto* dict = filter_.dictionary()) {
          report_.max_spare_live = std::max<std::uint64_t>(report_.max_spare_live, dict->spare().live_count());
        }
        return true;
      }
      case OpKind::remove: {
        const Status st = filter_.remove(op.key);
        gen_.commit(op, st);
        if (st != Status::ok) return fail(index, op, "delete of a live key failed", "ok", std::string(to_string(st)));
        if (--keys_[op.key] == 0) keys_.erase(op.key);
        if (--images_[y] == 0) images_.erase(y);
        return true;
      }
      case OpKind::query:
        ++report_.queries;
        return check_query(index, op, y);
    }
    return true;
  }

  auto check_query(std::uint64_t index, const Op& op, std::uint64_t y) -> bool {
    const auto key_it = keys_.find(op.key);
    const bool member = key_it != keys_.end();
    const auto img_it = images_.find(y);
    const std::size_t expected = img_it == images_.end() ? 0 : img_it->second;
    const bool answer = filter_.query(op.key);
    if (member) ++report_.member_queries;
    if (member && !answer) {
      ++report_.false_negatives;
      return fail(index, op, "false negative", "true", "false");
    }
    if (filter_.dictionary() != nullptr && answer != (expected > 0)) {
      return fail(index, op, "query disagrees with the oracle image multiset", expected > 0 ? "true" : "false",
                  answer ? "true" : "false");
    }
    const std::size_t actual = stored_multiplicity(op.key, y);
    if (actual != expected) {
      return fail(index, op, "stored multiplicity differs from the oracle", std::to_string(expected),
                  std::to_string(actual));
    }
    return true;
  }

  auto final_sweep() -> bool {
    const std::uint64_t index = spec_.op_count;
    for (const auto& [x, count] : keys_) {
      const Op op{OpKind::query, x};
      if (!filter_.query(x)) {
        ++report_.false_negatives;
        return fail(index, op, "false negative in final sweep", "true", "false");
      }
      const std::uint64_t y = image(x);
      const std::size_t expected = images_.at(y);
      const std::size_t actual = stored_multiplicity(x, y);
      if (actual != expected) {
        return fail(index, op, "stored multiplicity differs in final sweep", std::to_string(expected),
                    std::to_string(actual));
      }
    }
    std::size_t total = 0;
    for (const auto& [x, count] : keys_) total += count;
    if (filter_.live_count() != total) {
      return fail(index, Op{OpKind::query, 0}, "live count differs from the oracle", std::to_string(total),
                  std::to_string(filter_.live_count()));
    }
    if (const auto* dict = filter_.dictionary(); dict != nullptr && !dict->check_invariants()) {
      return fail(index, Op{OpKind::query, 0}, "dictionary invariants violated", "consistent", "inconsistent");
    }
    return true;
  }

  void inject_fault() {
    RmsDictionary* dict = filter_.dictionary();
    if (dict == nullptr) throw std::invalid_argument("fault injection needs the dense case");
    for (std::uint64_t x : gen_.live()) {
      const auto s = dict->split(image(x));
      const pocket::Group g = pocket::select_group(dict->layout(), dict->bin_words(s.bin), s.quotient);
      if (g.count == 0) continue;
      dict->flip_header_bit_for_testing(s.bin, g.start + g.count + s.quotient - 1);
      return;
    }
  }

  const WorkloadSpec& spec_;
  unsigned trial_;
  const OracleOptions& options_;
  OracleReport& report_;
  DynamicFilter filter_;
  WorkloadGenerator gen_;
  std::unordered_map<std::uint64_t, std::size_t> keys_;
  std::unordered_map<std::uint64_t, std::size_t> images_;
  std::deque<Op> tail_;
};

}  // namespace

auto run_oracle_check(const WorkloadSpec& spec, const OracleOptions& options) -> OracleReport {
  spec.validate();
  OracleReport report;
  const auto start = std::chrono::steady_clock::now();
  for (unsigned t = 0; t < spec.trials; ++t) {
    ++report.trials;
    TrialRunner runner(spec, t, options, report);
    if (!runner.run()) break;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

auto OracleReport::to_json(const WorkloadSpec& spec) const -> nlohmann::json {
  nlohmann::json j{
      {"schema", kReportSchema},
      {"command", "oracle-check"},
      {"passed", passed},
      {"n", spec.n},
      {"k", spec.k},
      {"seed", spec.seed},
      {"keys", to_string(spec.keys)},
      {"trials", trials},
      {"ops", ops},
      {"queries", queries},
      {"member_queries", member_queries},
      {"false_negatives", false_negatives},
      {"overflow_events", overflow_events},
      {"max_spare_live", max_spare_live},
      {"seconds", seconds},
  };
  if (counterexample) {
    const auto& c = *counterexample;
    nlohmann::json tail = nlohmann::json::array();
    for (const auto& op : c.prefix_tail) tail.push_back(op_json(op));
    j["counterexample"] = {{"seed", spec.seed},         {"trial", c.trial},
                           {"trial_seed", spec.trial_seed(c.trial)},
                           {"op_index", c.op_index},    {"op", op_json(c.op)},
                           {"reason", c.reason},        {"expected", c.expected},
                           {"actual", c.actual},        {"prefix_length", c.prefix_length},
                           {"prefix_tail", tail}};
  }
  return j;
}

}  // namespace rmsf::harness
