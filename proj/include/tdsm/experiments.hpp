// Copyright 2026 The tdsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Censuses over random and exhaustively enumerated instances, the 9-vertex
// host case analysis, and end-to-end verification of the composed
// counterexamples.

#ifndef TDSM_EXPERIMENTS_HPP_
#define TDSM_EXPERIMENTS_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tdsm/constructions.hpp"
#include "tdsm/engines.hpp"
#include "tdsm/model.hpp"
#include "tdsm/rng.hpp"
#include "tdsm/stability.hpp"

namespace tdsm {

enum class InstanceKind { kComplete, kIncomplete };

// complete: every list is an independent uniform permutation.
// incomplete: every list has a uniform length in [0, n] and is a uniform
// ordered subset of that length.
inline Instance random_instance(std::uint32_t n, InstanceKind kind, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  Rng rng(seed);
  Instance inst(n);
  std::vector<AgentId> list;
  for_each_agent(inst, [&](AgentId v) {
    list.clear();
    for (std::uint32_t j = 1; j <= n; ++j) list.push_back({succ(v.gender), j});
    const std::size_t len = kind == InstanceKind::kComplete ? n : rng.below(n + 1);
    rng.shuffle(std::span<AgentId>(list));
    list.resize(len);
    inst.set_preferences(v, list);
  });
  return inst;
}

enum class EngineKind { kBrute, kBacktrack, kSat, kLocal };

inline std::string_view to_string(EngineKind e) {
  switch (e) {
    case EngineKind::kBrute: return "brute";
    case EngineKind::kBacktrack: return "backtrack";
    case EngineKind::kSat: return "sat";
    default: return "local";
  }
}

inline bool is_exact(EngineKind e) { return e != EngineKind::kLocal; }

struct EngineOptions {
  std::uint64_t node_budget = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t conflict_budget = std::numeric_limits<std::uint64_t>::max();
  LocalSearchParams local;
  std::uint64_t seed = 0;
};

inline SolveResult solve_with(EngineKind engine, const Instance& inst, const EngineOptions& opt) {
  switch (engine) {
    case EngineKind::kBrute: return brute_result(inst);
    case EngineKind::kBacktrack: return solve_backtrack(inst, {opt.node_budget, true});
    case EngineKind::kSat: return solve_with_sat(inst, {opt.conflict_budget, opt.seed});
    default: {
      LocalSearchParams p = opt.local;
      p.seed = opt.seed;
      return local_search(inst, p);
    }
  }
}

struct CensusReport {
  std::string description;
  std::uint64_t trials = 0;
  std::uint64_t solvable = 0;
  // Instances proven to have no stable matching, serialized.
  std::vector<std::string> witnesses;
  // Trials that ended without a verdict (timeouts; every local-search miss).
  std::uint64_t unresolved = 0;
  std::string engine;
  std::uint64_t seed = 0;

  bool conjecture_holds() const { return witnesses.empty() && unresolved == 0; }
};

inline std::string serialize_report(const CensusReport& r) {
  std::ostringstream os;
  os << "# seed: " << r.seed << '\n'
     << "class: " << r.description << '\n'
     << "engine: " << r.engine << '\n'
     << "trials: " << r.trials << '\n'
     << "solvable: " << r.solvable << '\n'
     << "unresolved: " << r.unresolved << '\n'
     << "witnesses: " << r.witnesses.size() << '\n';
  for (std::size_t k = 0; k < r.witnesses.size(); ++k) {
    os << "# witness " << k + 1 << '\n' << r.witnesses[k];
  }
  os << "verdict: "
     << (r.conjecture_holds() ? "conjecture holds at this n"
                              : (r.witnesses.empty() ? "inconclusive" : "counterexample found"))
     << '\n';
  return os.str();
}

namespace detail {

// Runs body(i) for i in [0, count) on up to `jobs` threads. Results must be
// written by index so the outcome does not depend on scheduling.
inline void parallel_for(std::uint64_t count, unsigned jobs,
                         const std::function<void(std::uint64_t)>& body) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || count < 2) {
    for (std::uint64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::uint64_t i; (i = next.fetch_add(1)) < count;) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

enum class Verdict : std::uint8_t { kSolvable, kWitness, kUnresolved };

inline Verdict verdict_of(const Instance& inst, const SolveResult& r) {
  switch (r.status) {
    case SolveStatus::kStable:
      if (!r.matching || !is_stable(inst, *r.matching)) {
        throw std::logic_error(r.engine + " returned an unstable matching");
      }
      return Verdict::kSolvable;
    case SolveStatus::kNoStableMatching: return Verdict::kWitness;
    default: return Verdict::kUnresolved;
  }
}

inline void tally(CensusReport& report, const std::vector<Verdict>& verdicts,
                  const std::function<Instance(std::uint64_t)>& make) {
  for (std::uint64_t i = 0; i < verdicts.size(); ++i) {
    switch (verdicts[i]) {
      case Verdict::kSolvable: ++report.solvable; break;
      case Verdict::kWitness: report.witnesses.push_back(serialize_instance(make(i))); break;
      default: ++report.unresolved; break;
    }
  }
}

}  // namespace detail

inline constexpr std::uint64_t ipow(std::uint64_t b, unsigned e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// The i-th raw 3DSMI instance of size n in mixed radix: each of the 3n agents
// picks one of the ordered subsets of the next gender class.
inline Instance small_3dsmi_instance(std::uint32_t n, std::uint64_t code) {
  std::vector<std::vector<std::uint32_t>> lists;  // ordered subsets of {1..n}
  lists.push_back({});
  for (std::size_t k = 0; k < lists.size(); ++k) {
    if (lists[k].size() == n) continue;
    for (std::uint32_t j = 1; j <= n; ++j) {
      if (std::find(lists[k].begin(), lists[k].end(), j) != lists[k].end()) continue;
      auto next = lists[k];
      next.push_back(j);
      lists.push_back(std::move(next));
    }
  }
  Instance inst(n);
  for_each_agent(inst, [&](AgentId v) {
    const auto& pick = lists[code % lists.size()];
    code /= lists.size();
    std::vector<AgentId> targets;
    for (std::uint32_t j : pick) targets.push_back({succ(v.gender), j});
    inst.set_preferences(v, targets);
  });
  return inst;
}

inline std::uint64_t ordered_subset_count(std::uint32_t n) {
  std::uint64_t total = 0, term = 1;  // n! / (n-k)!
  for (std::uint32_t k = 0; k <= n; ++k) {
    total += term;
    term *= n - k;
  }
  return total;
}

// Every raw 3DSMI instance of size 1 or 2, solved by brute force.
inline CensusReport exhaustive_small_3dsmi(std::uint32_t n, unsigned jobs = 1) {
  if (n == 0 || n > 2) throw CapacityError("exhaustive 3DSMI census supports n in {1, 2}");
  const std::uint64_t total = ipow(ordered_subset_count(n), 3 * n);
  std::vector<detail::Verdict> verdicts(total);
  detail::parallel_for(total, jobs, [&](std::uint64_t i) {
    const Instance inst = small_3dsmi_instance(n, i);
    verdicts[i] = detail::verdict_of(inst, brute_result(inst));
  });
  CensusReport report;
  report.description = "all 3dsmi instances, n=" + std::to_string(n);
  report.trials = total;
  report.engine = "brute";
  detail::tally(report, verdicts, [&](std::uint64_t i) { return small_3dsmi_instance(n, i); });
  return report;
}

// Solves `trials` random complete instances; trial i uses derive_seed(seed, i).
inline CensusReport sample_solvability(std::uint32_t n, std::uint64_t trials, EngineKind engine,
                                       std::uint64_t seed, EngineOptions opt = {},
                                       unsigned jobs = 1) {
  std::vector<detail::Verdict> verdicts(trials);
  auto make = [&](std::uint64_t i) {
    return random_instance(n, InstanceKind::kComplete, derive_seed(seed, i));
  };
  detail::parallel_for(trials, jobs, [&](std::uint64_t i) {
    const Instance inst = make(i);
    EngineOptions o = opt;
    o.seed = derive_seed(seed ^ 0x5bd1e995ULL, i);
    verdicts[i] = detail::verdict_of(inst, solve_with(engine, inst, o));
  });
  CensusReport report;
  report.description = "random complete instances, n=" + std::to_string(n);
  report.trials = trials;
  report.engine = std::string(to_string(engine));
  report.seed = seed;
  detail::tally(report, verdicts, make);
  return report;
}

// Every matching of the instance (all sets of pairwise disjoint families).
inline std::vector<Matching> enumerate_matchings(const Instance& inst,
                                                 std::uint64_t limit = kBruteForceLimit) {
  const FamilyTable table(inst);
  std::array<std::vector<char>, 3> used;
  for (Gender g : kGenders) used[slot(g)].assign(inst.count(g), 0);
  std::vector<Family> chosen;
  std::vector<Matching> out;
  auto dfs = [&](auto&& self, std::size_t from) -> void {
    if (out.size() >= limit) throw CapacityError("more than " + std::to_string(limit) + " matchings");
    out.emplace_back(inst, chosen);
    for (std::size_t k = from; k < table.size(); ++k) {
      const Family& t = table[k];
      if (used[0][t.man - 1] || used[1][t.woman - 1] || used[2][t.dog - 1]) continue;
      used[0][t.man - 1] = used[1][t.woman - 1] = used[2][t.dog - 1] = 1;
      chosen.push_back(t);
      self(self, k + 1);
      chosen.pop_back();
      used[0][t.man - 1] = used[1][t.woman - 1] = used[2][t.dog - 1] = 0;
    }
  };
  dfs(dfs, 0);
  return out;
}

struct NoncomplementableMatching {
  Matching matching;
  std::vector<BlockingTriple> blocking;
};

struct AppendixReport {
  std::vector<Family> families;
  std::size_t total_matchings = 0;
  std::size_t complementable = 0;
  std::vector<NoncomplementableMatching> noncomplementable;
  bool no_stable_matching = false;
  // Differences from the expected case analysis; empty when it is reproduced.
  std::vector<std::string> mismatches;

  bool passed() const { return mismatches.empty() && no_stable_matching; }
};

// The expected case analysis of the 9-vertex host, written with host vertex
// numbers: each noncomplementable matching and the blocking triples cited.
struct AppendixCase {
  std::vector<std::array<int, 3>> matching;
  std::vector<std::array<int, 3>> cited;
};

inline const std::vector<AppendixCase>& appendix_cases() {
  static const std::vector<AppendixCase> kCases = {
      {{{0, 1, 5}, {2, 3, 4}}, {{4, 8, 6}}},
      {{{0, 1, 5}, {4, 8, 6}}, {{1, 2, 3}}},
      {{{0, 7, 8}, {1, 2, 3}}, {{3, 4, 5}}},
      {{{0, 7, 8}, {1, 5, 3}}, {{2, 3, 4}}},
      {{{0, 7, 8}, {2, 3, 4}}, {{0, 1, 5}}},
      {{{0, 7, 8}, {3, 4, 5}}, {{0, 1, 5}}},
      {{{1, 2, 3}, {4, 8, 6}}, {{0, 7, 8}, {3, 4, 5}}},
      {{{1, 5, 3}, {4, 8, 6}}, {{0, 7, 8}}},
  };
  return kCases;
}

inline std::vector<Family> appendix_family_list() {
  std::vector<Family> out;
  for (auto [u, v, w] : std::vector<std::array<int, 3>>{
           {0, 1, 5}, {0, 7, 8}, {1, 2, 3}, {1, 5, 3}, {2, 3, 4}, {3, 4, 5}, {4, 8, 6}}) {
    out.push_back(appendix_family(u, v, w));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Host vertex numbers, rotated to start at the smallest, e.g. "(4,8,6)".
inline std::string appendix_name(const Family& f) {
  std::array<int, 3> v = {appendix_vertex(f.member(Gender::kMan)),
                          appendix_vertex(f.member(Gender::kWoman)),
                          appendix_vertex(f.member(Gender::kDog))};
  std::rotate(v.begin(), std::min_element(v.begin(), v.end()), v.end());
  return "(" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]) + ")";
}

inline AppendixReport verify_appendix() {
  const Instance inst = appendix_instance();
  AppendixReport report;
  report.families = enumerate_families(inst);
  if (report.families != appendix_family_list()) {
    report.mismatches.push_back("family census differs from the 7 expected families");
  }

  const auto matchings = enumerate_matchings(inst);
  report.total_matchings = matchings.size();
  bool any_stable = false;
  for (const Matching& m : matchings) {
    auto blocking = blocking_triples(inst, m, report.families);
    if (blocking.empty()) any_stable = true;
    if (is_complementable(inst, m)) {
      ++report.complementable;
    } else {
      report.noncomplementable.push_back({m, std::move(blocking)});
    }
  }
  report.no_stable_matching = !any_stable;
  if (any_stable) report.mismatches.push_back("a stable matching exists");

  const auto& cases = appendix_cases();
  if (report.noncomplementable.size() != cases.size()) {
    report.mismatches.push_back("expected " + std::to_string(cases.size()) +
                                " noncomplementable matchings, found " +
                                std::to_string(report.noncomplementable.size()));
  }
  for (std::size_t k = 0; k < cases.size(); ++k) {
    std::vector<Family> fams;
    for (auto [u, v, w] : cases[k].matching) fams.push_back(appendix_family(u, v, w));
    const Matching expected(inst, fams);
    auto it = std::find_if(report.noncomplementable.begin(), report.noncomplementable.end(),
                           [&](const auto& e) { return e.matching == expected; });
    if (it == report.noncomplementable.end()) {
      report.mismatches.push_back("item " + std::to_string(k + 1) + " is not a noncomplementable matching");
      continue;
    }
    for (auto [u, v, w] : cases[k].cited) {
      const Family cited = appendix_family(u, v, w);
      const bool found = std::any_of(it->blocking.begin(), it->blocking.end(),
                                     [&](const BlockingTriple& b) { return b.family == cited; });
      if (!found) {
        report.mismatches.push_back("item " + std::to_string(k + 1) + ": " + appendix_name(cited) +
                                    " does not block");
      }
    }
  }
  for (const auto& e : report.noncomplementable) {
    if (e.matching.size() != 2) {
      report.mismatches.push_back("noncomplementable matching of size " +
                                  std::to_string(e.matching.size()));
    }
  }
  return report;
}

inline std::string serialize_appendix_report(const AppendixReport& r) {
  std::ostringstream os;
  os << "families: " << r.families.size() << '\n';
  for (const Family& f : r.families) os << "  " << appendix_name(f) << "  " << to_string(f) << '\n';
  os << "matchings: " << r.total_matchings << '\n'
     << "complementable: " << r.complementable << '\n'
     << "noncomplementable: " << r.noncomplementable.size() << '\n';
  for (const auto& e : r.noncomplementable) {
    os << "  {";
    for (std::size_t k = 0; k < e.matching.families().size(); ++k) {
      os << (k ? "," : "") << appendix_name(e.matching.families()[k]);
    }
    os << "} blocked by";
    for (const auto& b : e.blocking) os << ' ' << appendix_name(b.family);
    os << '\n';
  }
  for (const auto& m : r.mismatches) os << "mismatch: " << m << '\n';
  os << "verdict: " << (r.passed() ? "no stable matching" : "FAILED") << '\n';
  return os.str();
}

enum class Counterexample { kTheorem1OfAppendix, kTheorem2 };
enum class VerifyRoute { kInternal, kExport };

struct VerifyOptions {
  VerifyRoute route = VerifyRoute::kInternal;
  Lemma2Variant variant = Lemma2Variant::kCaption;
  CompletionPolicy policy = CompletionPolicy::kLexicographic;
  std::uint64_t completion_seed = 0;
  SatParams sat;
  // Export route: DIMACS destination and an optional external solver command
  // (invoked as "<command> <file>", SAT-competition output expected).
  std::string export_path;
  std::string external_solver;
  // Local-search necessary check; skipped when iterations == 0.
  std::uint64_t local_iterations = 0;
  std::uint64_t local_restart = 100'000;
  std::uint64_t local_seed = 1;
};

struct CounterexampleReport {
  Instance instance;
  ConstructionTrace trace;
  SolveResult result;
  std::optional<SolveResult> local;
  std::string note;

  bool unsat() const { return result.status == SolveStatus::kNoStableMatching; }
};

inline std::pair<Instance, ConstructionTrace> build_counterexample(Counterexample which,
                                                                   const VerifyOptions& opt) {
  if (which == Counterexample::kTheorem2) {
    return theorem2_instance(opt.policy, opt.completion_seed, opt.variant);
  }
  return theorem1_compose(appendix_instance(), opt.policy, opt.completion_seed, "appendix");
}

namespace detail {

// Runs an external SAT solver and reads its "s ..." / "v ..." lines.
inline SolveResult run_external(const Instance& inst, const CnfProblem& cnf,
                                const std::string& command, const std::string& path) {
  SolveResult r;
  r.engine = "external";
  r.status = SolveStatus::kTimeout;
  const std::string cmd = command + " '" + path + "'";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) throw std::runtime_error("cannot run external solver: " + command);
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe.get())) out += buf;
  std::istringstream is(out);
  std::string line;
  std::vector<char> model(static_cast<std::size_t>(cnf.num_vars), 0);
  bool sat = false;
  while (std::getline(is, line)) {
    if (line.rfind("s UNSATISFIABLE", 0) == 0) r.status = SolveStatus::kNoStableMatching;
    if (line.rfind("s SATISFIABLE", 0) == 0) sat = true;
    if (line.rfind("v ", 0) == 0) {
      std::istringstream vs(line.substr(2));
      for (int lit; vs >> lit;) {
        if (lit > 0 && lit <= cnf.num_vars) model[lit - 1] = 1;
      }
    }
  }
  if (sat) {
    r.status = SolveStatus::kStable;
    r.matching = decode_model(inst, cnf, model);
  }
  return r;
}

}  // namespace detail

inline CounterexampleReport verify_counterexample(Counterexample which, const VerifyOptions& opt) {
  auto [inst, trace] = build_counterexample(which, opt);
  CounterexampleReport report{std::move(inst), std::move(trace), {}, std::nullopt, {}};
  const CnfProblem cnf = encode_cnf(report.instance);
  if (opt.route == VerifyRoute::kInternal) {
    const auto start = std::chrono::steady_clock::now();
    const SatOutcome out = solve_sat(cnf, opt.sat);
    report.result.engine = "sat";
    report.result.stats.conflicts = out.stats.conflicts;
    if (out.status == sat::Status::kSat) {
      report.result.status = SolveStatus::kStable;
      report.result.matching = decode_model(report.instance, cnf, out.model);
    } else {
      report.result.status = out.status == sat::Status::kUnsat ? SolveStatus::kNoStableMatching
                                                               : SolveStatus::kTimeout;
    }
    report.result.stats.wall_ms = detail::elapsed_ms(start);
  } else {
    if (opt.export_path.empty()) throw std::invalid_argument("export route needs a DIMACS path");
    {
      std::ofstream f(opt.export_path);
      if (!f) throw std::runtime_error("cannot write " + opt.export_path);
      write_dimacs(cnf, f);
    }
    if (opt.external_solver.empty()) {
      report.result.engine = "export";
      report.result.status = SolveStatus::kTimeout;
      report.note = "DIMACS written to " + opt.export_path + "; awaiting external solver";
    } else {
      report.result = detail::run_external(report.instance, cnf, opt.external_solver, opt.export_path);
    }
  }
  if (opt.local_iterations > 0) {
    report.local = local_search(report.instance,
                                {opt.local_iterations, opt.local_restart, opt.local_seed});
  }
  return report;
}

}  // namespace tdsm

#endif  // TDSM_EXPERIMENTS_HPP_
