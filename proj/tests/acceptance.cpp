// Acceptance suite: one [PASS]/[FAIL] line per criterion.
//   acceptance                 run all criteria
//   acceptance --criterion N   run only criterion N (repeatable)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "pocket_reference.hpp"
#include "rmsfilter/harness.hpp"

using namespace rmsf;
using namespace rmsf::harness;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

auto fmt(double v) -> std::string {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

auto defaults() -> WorkloadSpec {
  WorkloadSpec s;
  s.n = 100000;
  s.k = 6;
  s.seed = 20240601;
  s.op_count = 1'000'000;
  return s;
}

auto criterion1() -> Outcome {
  WorkloadSpec uniform = defaults();
  uniform.trials = 100;
  const auto u = run_oracle_check(uniform);
  std::string detail = "uniform: " + std::to_string(u.trials) + " x 1e6 ops, " + std::to_string(u.member_queries) +
                       " member queries, " + std::to_string(u.false_negatives) + " false negatives, " +
                       std::to_string(u.overflow_events) + " overflows";
  bool ok = u.passed && u.false_negatives == 0;
  if (u.counterexample) detail += ", counterexample: " + u.counterexample->reason;

  for (bool raw : {true, false}) {
    WorkloadSpec adv = defaults();
    adv.trials = 5;
    adv.keys = KeyDistribution::colliding;
    adv.raw_bits = raw;
    adv.seed += raw ? 1 : 2;
    const auto a = run_oracle_check(adv);
    ok = ok && a.passed && a.false_negatives == 0;
    detail += std::string("; colliding ") + (raw ? "raw_bits" : "succinct") + ": " + std::to_string(a.trials) +
              " x 1e6 ops, " + std::to_string(a.false_negatives) + " false negatives, " +
              std::to_string(a.overflow_events) + " overflows" + (a.passed ? "" : ", oracle mismatch");
  }
  return {ok, detail};
}

auto criterion2() -> Outcome {
  bool ok = true;
  std::string detail;
  for (unsigned k : {4U, 6U, 8U}) {
    WorkloadSpec s = defaults();
    s.k = k;
    s.negative_queries = 1'000'000;
    const auto r = run_fpr(s);
    ok = ok && r.passed();
    if (!detail.empty()) detail += "; ";
    detail += "eps=2^-" + std::to_string(k) + ": fpr " + fmt(r.empirical_fpr) + " <= " + fmt(1.2 * r.fpr_bound) +
              ", wilson upper " + fmt(r.fpr_ci.high) + " <= " + fmt(1.3 * r.fpr_bound) + (r.passed() ? "" : " FAILED");
  }
  return {ok, detail};
}

// Every multiset of size <= n' over B * 2^rb pairs, visited by recursion over
// pairs in increasing order.
template <class Visit>
void for_each_multiset(std::size_t pairs, std::size_t max_size, reference::Multiset& m, std::size_t next,
                       std::uint64_t rb, Visit&& visit) {
  visit(m);
  if (m.size() == max_size) return;
  for (std::size_t p = next; p < pairs; ++p) {
    const reference::Pair pair{p >> rb, p & ((1u << rb) - 1)};
    m.add(pair);
    for_each_multiset(pairs, max_size, m, p, rb, visit);
    m.erase(pair);
  }
}

auto criterion3() -> Outcome {
  const auto layout = pocket::Layout::make(4, 6, 3);
  const std::size_t pairs = 4 * 8;
  std::uint64_t states = 0;
  std::uint64_t transitions = 0;
  std::uint64_t failures = 0;
  reference::Multiset m;
  for_each_multiset(pairs, 6, m, 0, 3, [&](const reference::Multiset& s) {
    ++states;
    const auto image = reference::encode(layout, s);
    if (!pocket::check_invariants(layout, image)) ++failures;
    for (std::size_t p = 0; p < pairs; ++p) {
      const reference::Pair pair{p >> 3, p & 7};
      if (pocket::query(layout, image, pair.first, pair.second) != s.count(pair)) ++failures;

      auto w = image;
      const Status ins = pocket::insert(layout, w, pair.first, pair.second);
      if (s.size() == 6) {
        failures += ins != Status::full || w != image;
      } else {
        reference::Multiset next = s;
        next.add(pair);
        failures += ins != Status::ok || w != reference::encode(layout, next);
      }
      w = image;
      const Status del = pocket::remove(layout, w, pair.first, pair.second);
      if (s.count(pair) == 0) {
        failures += del != Status::not_found || w != image;
      } else {
        reference::Multiset next = s;
        next.erase(pair);
        failures += del != Status::ok || w != reference::encode(layout, next);
      }
      transitions += 3;
    }
  });

  std::mt19937_64 rng(3);
  std::uint64_t random_failures = 0;
  for (int seq = 0; seq < 100000; ++seq) {
    PocketDictionary pd(layout);
    reference::Multiset ref;
    for (int i = 0; i < 50; ++i) {
      const std::uint64_t q = rng() % 4;
      const std::uint64_t r = rng() % 8;
      switch (rng() % 3) {
        case 0: {
          const Status st = pd.insert(q, r);
          if (ref.size() == 6) {
            random_failures += st != Status::full;
          } else {
            random_failures += st != Status::ok;
            ref.add({q, r});
          }
          break;
        }
        case 1: {
          const bool present = ref.erase({q, r});
          random_failures += pd.remove(q, r) != (present ? Status::ok : Status::not_found);
          break;
        }
        default:
          random_failures += pd.query(q, r) != ref.count({q, r});
      }
      random_failures += std::vector<std::uint64_t>(pd.words().begin(), pd.words().end()) != reference::encode(layout, ref);
    }
  }
  // C(32 + 6, 6) multisets of size <= 6 over 32 pairs.
  const bool complete = states == 2760681;
  return {failures == 0 && random_failures == 0 && complete,
          std::to_string(states) + " reachable states x 96 ops (" + std::to_string(transitions) +
              " transitions; the reachable set is closed, so every op sequence is covered), " + std::to_string(failures) +
              " mismatches; 1e5 random length-50 sequences, " + std::to_string(random_failures) + " mismatches"};
}

auto criterion4() -> Outcome {
  std::uint64_t configs = 0;
  std::uint64_t failures = 0;
  for (std::uint64_t b = 1; b <= 64; b = b < 16 ? b + 1 : b * 2) {
    for (std::uint64_t cap = 1; cap <= 128; cap += (cap < 24 ? 1 : 13)) {
      for (unsigned rb = 1; rb <= 16; ++rb) {
        const std::uint64_t bits = (b + cap) + cap * rb;
        if (bits > 64 * 64) continue;
        const auto layout = pocket::Layout::make(b, cap, rb, 64);
        PocketDictionary pd(layout);
        failures += pd.size_in_bits() != bits || layout.total_bits() != bits ||
                    pd.words().size() != (bits + 63) / 64;
        ++configs;
      }
    }
  }
  for (unsigned e = 10; e <= 20; e += 2) {
    for (unsigned k = 1; k <= 10; ++k) {
      const auto f = DynamicFilter::create(std::uint64_t{1} << e, k, 1);
      if (f.mode() != CaseKind::dense) continue;
      const auto& p = f.params();
      const auto st = f.stats();
      failures += st.dense->pocket_bits != p.bins * ((p.bin_mean_eff + p.bin_capacity) + p.bin_capacity * p.remainder_bits);
      failures += f.dictionary()->layout().total_bits() != p.pocket_bits();
      ++configs;
    }
  }
  return {failures == 0, std::to_string(configs) + " configurations, " + std::to_string(failures) +
                             " violations of bits = (B + n') + n' * rb"};
}

auto criterion5() -> Outcome {
  WorkloadSpec s = defaults();
  s.trials = 100;
  const auto census = run_spare_census(s, {true, false});
  std::size_t below = 0;
  for (auto peak : census.spare_peaks) below += peak < census.spare_capacity;

  WorkloadSpec wide = defaults();
  wide.trials = 100;
  wide.seed += 5;
  wide.op_count = 400'000;  // enough for the live set to reach n, where the snapshot is taken
  wide.overrides.set("b_eff", "64");
  wide.overrides.set("word_budget", "16");
  const auto bins = run_spare_census(wide, {false, true});
  std::size_t within = 0;
  for (double rate : bins.full_bin_rates) within += rate <= bins.gamma;

  const bool ok = below >= 99 && within >= 95;
  return {ok, "spare peak < n_s=" + std::to_string(census.spare_capacity) + " in " + std::to_string(below) +
                  "/100 trials of 1e6 ops (max peak " + std::to_string(census.spare_peak) + ", at first fill max " +
                  std::to_string(census.spare_at_fill) + ", peak fraction " + fmt(census.spare_peak_fraction) +
                  "); B_eff=64: full-bin rate <= gamma=" + fmt(bins.gamma) + " in " + std::to_string(within) +
                  "/100 trials (worst " + fmt(bins.full_bin_rate) + ", binomial tail " +
                  fmt(bins.predicted_full_bin_probability) + ")"};
}

auto criterion6() -> Outcome {
  const auto audit = run_space_audit({{100000, 8}}, defaults());
  const auto& row = audit.rows.front();
  const double bound = (1 + row.delta) * 8 + 10;
  return {row.bits_per_element <= bound && audit.passed(),
          "bits/element " + fmt(row.bits_per_element) + " <= (1+delta)*8 + 10 = " + fmt(bound) + " (C = " +
              fmt(row.additive_constant) + ", spare share " + fmt(row.spare_share) + ")"};
}

auto criterion7() -> Outcome {
  WorkloadSpec s = defaults();
  s.n = 10000;
  s.k = 16;
  s.negative_queries = 10'000'000;
  const auto r = run_fpr(s);
  const double bound = 1.2 * std::ldexp(1.0, -16);
  return {r.mode == CaseKind::sparse && r.empirical_fpr <= bound && r.false_negatives == 0,
          std::string(to_string(r.mode)) + " mode, " + std::to_string(r.false_positives) + " false positives in " +
              std::to_string(r.negative_queries) + " queries, fpr " + fmt(r.empirical_fpr) + " <= " + fmt(bound)};
}

auto criterion8() -> Outcome {
  std::mt19937_64 rng(8);
  std::uint64_t failures = 0;
  for (unsigned left : {1U, 4U, 8U, 15U}) {
    const auto perm = FeistelPermutation::draw(rng, 16, left, default_independence(100000));
    std::vector<bool> seen(1u << 16, false);
    for (std::uint64_t x = 0; x < (1u << 16); ++x) {
      const auto img = perm.evaluate(x);
      const std::uint64_t packed = (img.left << (16 - left)) | img.right;
      failures += seen[packed] || perm.invert(img) != x;
      seen[packed] = true;
    }
  }
  // Pair (h(x), h(y)) over 10^4 seeds, 16 cells: chi-square within mean + 3 sd.
  const double bound = 15.0 + 3.0 * std::sqrt(30.0);
  double worst = 0;
  const std::pair<std::uint64_t, std::uint64_t> pairs[] = {{0, 1}, {12345, 12346}, {1, 1ULL << 40}};
  for (auto [x, y] : pairs) {
    std::vector<double> cells(16, 0);
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      std::mt19937_64 r(seed);
      const auto h = PairwiseHash::draw(r, 4);
      cells[h(x) * 4 + h(y)] += 1;
    }
    double stat = 0;
    for (double c : cells) stat += (c - 625.0) * (c - 625.0) / 625.0;
    worst = std::max(worst, stat);
  }
  return {failures == 0 && worst <= bound, "Feistel on 2^16 for 4 splits: " + std::to_string(failures) +
                                                 " collisions/inversion errors; pairwise chi-square worst " +
                                                 fmt(worst) + " <= " + fmt(bound)};
}

auto criterion9() -> Outcome {
  const auto r = run_bench(defaults());
  std::string lat;
  for (const char* op : {"insert", "delete", "query"}) {
    const auto it = r.op_latency_ns.find(op);
    if (it == r.op_latency_ns.end()) continue;
    lat += std::string(", ") + op + " p50/p99.9 " + fmt(it->second[0]) + "/" + fmt(it->second[2]) + " ns";
  }
  return {r.passed() && r.max_pocket_words_touched <= 4,
          "max pocket words per op " + std::to_string(r.max_pocket_words_touched) + " <= 4 over 1e6 ops" + lat};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion all[] = {
      {1, "no false negatives", criterion1},
      {2, "false-positive rate", criterion2},
      {3, "pocket oracle equivalence", criterion3},
      {4, "pocket space exactness", criterion4},
      {5, "spare occupancy", criterion5},
      {6, "space efficiency", criterion6},
      {7, "sparse false-positive rate", criterion7},
      {8, "hashing", criterion8},
      {9, "constant-word work", criterion9},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  bool ok = true;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %d %s: %s [%.1fs]\n", o.passed ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
    ok = ok && o.passed;
  }
  return ok ? 0 : 1;
}
