// rmsfilter: command-line front end for the validation harness.
// Exit status: 0 all gates pass, 1 a gate failed, 2 usage error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rmsfilter/harness.hpp"

namespace {

using namespace rmsf;
using namespace rmsf::harness;

struct Options {
  std::vector<std::string> n{"100000"};
  std::vector<std::string> epsilon{"2^-6"};
  std::uint64_t seed = 1;
  std::string ops = "1000000";
  std::string queries = "1000000";
  unsigned trials = 1;
  std::string mode = "auto";
  bool raw_bits = false;
  std::string hash = "succinct";
  std::vector<std::string> overrides;
  std::string format = "json";
  std::string out;
  std::string keys = "uniform";
  double hot_fraction = 0.01;
  std::size_t hot_bins = 4;
  std::string mix = "0.5,0.2,0.3";
  double load = 1.0;
  std::optional<std::uint64_t> inject_fault;
  bool gate_full_bins = false;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Accepts plain integers and exact scientific forms such as 1e5.
auto parse_count(const std::string& text, double min = 1) -> std::uint64_t {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: " + text);
  }
  if (used != text.size() || v < min || v > 1e18 || std::floor(v) != v) throw UsageError("not a count: " + text);
  return static_cast<std::uint64_t>(v);
}

auto parse_mix(const std::string& text) -> OpMix {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(std::stod(item));
  if (parts.size() != 3) throw UsageError("--mix expects insert,delete,query ratios");
  return {parts[0], parts[1], parts[2]};
}

auto build_spec(const Options& o) -> WorkloadSpec {
  WorkloadSpec s;
  s.n = parse_count(o.n.front());
  s.k = parse_epsilon(o.epsilon.front());
  s.seed = o.seed;
  s.op_count = parse_count(o.ops, 0);
  s.negative_queries = parse_count(o.queries, 0);
  s.trials = o.trials;
  s.mix = parse_mix(o.mix);
  s.keys = parse_key_distribution(o.keys);
  s.hot_fraction = o.hot_fraction;
  s.hot_bins = o.hot_bins;
  s.load_factor = o.load;
  s.raw_bits = o.raw_bits;
  s.hash_mode = parse_hash_mode(o.hash);
  if (o.mode == "dense") s.mode = CaseKind::dense;
  else if (o.mode == "sparse") s.mode = CaseKind::sparse;
  else if (o.mode != "auto") throw UsageError("--mode must be dense, sparse or auto");
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--override expects key=value: " + kv);
    s.overrides.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  s.validate();
  return s;
}

void add_shared(CLI::App* cmd, Options& o) {
  cmd->add_option("--n", o.n, "capacity (space-audit accepts several)")->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "false-positive rate as 2^-k (space-audit accepts several)")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
  cmd->add_option("--ops", o.ops, "operations per trial")->capture_default_str();
  cmd->add_option("--queries", o.queries, "negative queries per trial")->capture_default_str();
  cmd->add_option("--trials", o.trials, "independent trials")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--mode", o.mode, "dense | sparse | auto")->capture_default_str();
  cmd->add_flag("--raw-bits", o.raw_bits, "use x mod |key space| instead of hashing (collision scenarios)");
  cmd->add_option("--hash", o.hash, "succinct | carter | raw_bits")->capture_default_str();
  cmd->add_option("--override", o.overrides, "parameter override key=value (repeatable)");
  cmd->add_option("--format", o.format, "json | csv")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out, "write the report here instead of stdout");
  cmd->add_option("--keys", o.keys, "uniform | colliding")->capture_default_str();
  cmd->add_option("--hot-fraction", o.hot_fraction, "colliding: share of keys aimed at hot bins")
      ->capture_default_str();
  cmd->add_option("--hot-bins", o.hot_bins, "colliding: number of hot bins")->capture_default_str();
  cmd->add_option("--mix", o.mix, "insert,delete,query ratios")->capture_default_str();
  cmd->add_option("--load", o.load, "fpr/space-audit: fill level as a fraction of n")->capture_default_str();
}

void emit(const Options& o, const std::string& json_text, const std::string& csv_text) {
  const std::string& body = o.format == "csv" ? csv_text : json_text;
  if (o.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw std::runtime_error("cannot write " + o.out);
  f << body;
}

auto emit_report(const Options& o, const nlohmann::json& j) -> void { emit(o, j.dump(2) + "\n", json_to_csv(j)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic filter validation harness"};
  app.require_subcommand(1);
  Options o;

  auto* oracle = app.add_subcommand("oracle-check", "replay workloads against an exact oracle");
  add_shared(oracle, o);
  oracle->add_option("--inject-fault", o.inject_fault, "flip a pocket header bit before this op (self-test)");
  auto* fpr = app.add_subcommand("fpr", "measure the false-positive rate of a full filter");
  add_shared(fpr, o);
  auto* census = app.add_subcommand("spare-census", "track spare occupancy and full bins");
  add_shared(census, o);
  census->add_flag("--gate-full-bins", o.gate_full_bins, "also gate the full-bin rate against gamma");
  auto* audit = app.add_subcommand("space-audit", "compare bits used with the information bound");
  add_shared(audit, o);
  auto* bench = app.add_subcommand("bench", "latency percentiles and pocket word accesses");
  add_shared(bench, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    bool passed = true;
    if (audit->parsed()) {
      WorkloadSpec base = build_spec(o);
      std::vector<AuditCell> grid;
      for (const auto& n : o.n) {
        for (const auto& e : o.epsilon) grid.push_back({parse_count(n), parse_epsilon(e)});
      }
      const SpaceAudit result = run_space_audit(grid, base);
      emit(o, result.to_json().dump(2) + "\n", result.to_csv());
      passed = result.passed();
    } else {
      if (o.n.size() != 1 || o.epsilon.size() != 1) throw UsageError("--n and --epsilon take one value here");
      const WorkloadSpec spec = build_spec(o);
      if (oracle->parsed()) {
        OracleOptions opts;
        opts.inject_fault_at = o.inject_fault;
        const OracleReport r = run_oracle_check(spec, opts);
        emit_report(o, r.to_json(spec));
        passed = r.passed;
      } else {
        StatsReport r;
        if (fpr->parsed()) r = run_fpr(spec);
        else if (census->parsed()) r = run_spare_census(spec, {true, o.gate_full_bins});
        else r = run_bench(spec);
        emit_report(o, r.to_json());
        passed = r.passed();
      }
    }
    return passed ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
