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

// Acceptance run: one PASS/FAIL line per criterion, plus indented detail
// lines. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "tdsm/tdsm.hpp"

#ifndef TDSM_SOURCE_DIR
#define TDSM_SOURCE_DIR "."
#endif

namespace {

using namespace tdsm;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

int failures = 0;

void verdict(int id, bool pass, const std::string& summary, double secs) {
  if (!pass) ++failures;
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.2f s)", secs);
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << summary << buf << '\n'
            << std::flush;
}

void detail_line(const std::string& s) { std::cout << "      " << s << '\n' << std::flush; }

constexpr std::uint64_t kConflictBudget = 50'000'000;

// Internal CDCL first; the exported DIMACS goes to an external solver only
// when the internal route does not settle the question.
SolveResult prove(Counterexample which, Lemma2Variant variant, const std::string& tag) {
  VerifyOptions opt;
  opt.variant = variant;
  opt.sat.conflict_budget = kConflictBudget;
  CounterexampleReport rep = verify_counterexample(which, opt);
  detail_line(tag + " internal: " + std::string(to_string(rep.result.status)) +
              " conflicts=" + std::to_string(rep.result.stats.conflicts) +
              " ms=" + std::to_string(static_cast<long long>(rep.result.stats.wall_ms)));
  if (rep.result.status != SolveStatus::kTimeout) return rep.result;
  const auto script = std::filesystem::path(TDSM_SOURCE_DIR) / "tools" / "external_sat.py";
  opt.route = VerifyRoute::kExport;
  opt.export_path = (std::filesystem::temp_directory_path() / ("tdsm_" + tag + ".cnf")).string();
  opt.external_solver = "python3 '" + script.string() + "'";
  rep = verify_counterexample(which, opt);
  detail_line(tag + " export: " + std::string(to_string(rep.result.status)));
  return rep.result;
}

void criterion1() {
  const auto t = Clock::now();
  const AppendixReport r = verify_appendix();
  const double secs = seconds_since(t);
  for (const auto& m : r.mismatches) detail_line("mismatch: " + m);
  detail_line("families=" + std::to_string(r.families.size()) +
              " matchings=" + std::to_string(r.total_matchings) +
              " noncomplementable=" + std::to_string(r.noncomplementable.size()));
  const bool pass = r.passed() && r.families.size() == 7 && r.noncomplementable.size() == 8 && secs < 1.0;
  verdict(1, pass, "appendix census: 7 families, 8 noncomplementable matchings, cited triples block, no stable matching", secs);
}

void criterion2() {
  const auto t = Clock::now();
  bool pass = true;
  for (std::uint32_t n : {1u, 2u}) {
    const CensusReport r = exhaustive_small_3dsmi(n);
    detail_line("n=" + std::to_string(n) + ": instances=" + std::to_string(r.trials) +
                " solvable=" + std::to_string(r.solvable) +
                " witnesses=" + std::to_string(r.witnesses.size()));
    pass = pass && r.conjecture_holds() && r.solvable == r.trials;
    if (n == 2) pass = pass && r.trials == 15625;
  }
  const double secs = seconds_since(t);
  verdict(2, pass && secs < 300, "every raw 3DSMI instance with n=1 (8) and n=2 (15625) is solvable by brute force", secs);
}

void criterion3() {
  const auto t = Clock::now();
  const auto [inst, trace] = theorem1_compose(appendix_instance(), CompletionPolicy::kLexicographic, 0);
  const auto c = inst.counts();
  detail_line("size " + std::to_string(c[0]) + "/" + std::to_string(c[1]) + "/" + std::to_string(c[2]) +
              ", complete=" + (inst.complete() ? "yes" : "no"));
  const bool shape = c == std::array<std::uint32_t, 3>{24, 24, 24} && inst.complete() && validate(inst).ok();
  const SolveResult r = prove(Counterexample::kTheorem1OfAppendix, Lemma2Variant::kCaption, "theorem1");
  verdict(3, shape && r.status == SolveStatus::kNoStableMatching,
          "composition of the 9-vertex host has size 24 per gender and is UNSAT", seconds_since(t));
}

void criterion4() {
  const auto t = Clock::now();
  const auto [inst, trace] = theorem2_instance(CompletionPolicy::kLexicographic, 0);
  const auto c = inst.counts();
  const bool shape = c == std::array<std::uint32_t, 3>{18, 18, 18} && inst.complete() && validate(inst).ok();
  detail_line("size " + std::to_string(c[0]) + "/" + std::to_string(c[1]) + "/" + std::to_string(c[2]) +
              ", validate=" + (validate(inst).ok() ? "ok" : "FAILED"));
  const SolveResult r = prove(Counterexample::kTheorem2, Lemma2Variant::kCaption, "theorem2");
  std::size_t min_blocking = ~std::size_t{0};
  bool local_ok = true;
  for (std::uint64_t run = 0; run < 20; ++run) {
    const SolveResult l = local_search(inst, {1'000'000, 100'000, derive_seed(4242, run)});
    local_ok = local_ok && l.status == SolveStatus::kTimeout && l.blocking_count >= 1;
    min_blocking = std::min(min_blocking, l.blocking_count);
  }
  detail_line("local search: 20 runs x 1e6 iterations, all timed out=" + std::string(local_ok ? "yes" : "no") +
              ", fewest blocking triples seen=" + std::to_string(min_blocking));
  // Recorded, not asserted: the drawing's rank assignment for the two-anchor gadget.
  const SolveResult fig = prove(Counterexample::kTheorem2, Lemma2Variant::kFigure, "theorem2-figure");
  detail_line("figure-variant verdict (informational): " + std::string(to_string(fig.status)));
  verdict(4, shape && r.status == SolveStatus::kNoStableMatching && local_ok,
          "size-18 instance validates, is UNSAT, and 20 local-search runs all fail", seconds_since(t));
}

void criterion5() {
  const auto t = Clock::now();
  const CensusReport n3 = sample_solvability(3, 10'000, EngineKind::kSat, 3);
  const CensusReport n5 = sample_solvability(5, 1'000, EngineKind::kSat, 5);
  detail_line("n=3: " + std::to_string(n3.solvable) + "/10000 solvable, witnesses=" + std::to_string(n3.witnesses.size()));
  detail_line("n=5: " + std::to_string(n5.solvable) + "/1000 solvable, witnesses=" + std::to_string(n5.witnesses.size()));
  EngineOptions opt;
  opt.local = {1'000'000, 100'000, 0};
  const CensusReport n18 = sample_solvability(18, 100, EngineKind::kLocal, 18, opt);
  detail_line("n=18 local search: " + std::to_string(n18.solvable) + "/100 solved");
  const bool pass = n3.conjecture_holds() && n3.solvable == 10'000 && n5.conjecture_holds() &&
                    n5.solvable == 1'000 && n18.solvable == 100;
  verdict(5, pass, "no unsolvable instance in 1e4 samples at n=3 and 1e3 at n=5; local search solves 100/100 at n=18",
          seconds_since(t));
}

std::set<oracle::RawMatching> as_set(const std::vector<Matching>& ms) {
  std::set<oracle::RawMatching> out;
  for (const auto& m : ms) out.insert(oracle::from_matching(m));
  return out;
}

void criterion6() {
  const auto t = Clock::now();
  std::size_t disagreements = 0, unstable = 0, enum_mismatch = 0, solvable = 0, total = 0;
  auto check = [&](const Instance& inst) {
    ++total;
    const auto all = solve_brute(inst);
    const std::array<SolveResult, 3> rs = {brute_result(inst), solve_backtrack(inst), solve_with_sat(inst)};
    const bool exists = !all.empty();
    solvable += exists;
    for (const auto& r : rs) {
      if ((r.status == SolveStatus::kStable) != exists) ++disagreements;
      if (r.matching && !is_stable(inst, *r.matching)) ++unstable;
    }
    if (as_set(enumerate_sat_models(inst)) != as_set(all)) ++enum_mismatch;
  };
  for (std::uint64_t i = 0; i < 1000; ++i) check(random_instance(3, InstanceKind::kIncomplete, derive_seed(601, i)));
  for (std::uint64_t i = 0; i < 200; ++i) check(random_instance(3, InstanceKind::kComplete, derive_seed(602, i)));
  detail_line("instances=" + std::to_string(total) + " solvable=" + std::to_string(solvable) +
              " disagreements=" + std::to_string(disagreements) + " unstable=" + std::to_string(unstable) +
              " enumeration mismatches=" + std::to_string(enum_mismatch));
  const double secs = seconds_since(t);
  verdict(6, disagreements == 0 && unstable == 0 && enum_mismatch == 0 && secs < 600,
          "brute, backtrack and SAT agree on 1200 random n=3 instances; SAT enumeration equals brute force", secs);
}

void criterion7() {
  const auto t = Clock::now();
  std::set<std::string> seen;
  std::size_t hosts = 0, solved = 0, projected_stable = 0, unsat = 0;
  std::vector<Instance> pool;
  // The only isolated-free size-1 host, then distinct random size-2 hosts.
  pool.push_back(random_instance(1, InstanceKind::kComplete, 0));
  for (std::uint64_t i = 0; pool.size() < 50 && i < 1'000'000; ++i) {
    const Instance h = random_instance(2, InstanceKind::kIncomplete, derive_seed(701, i));
    bool isolated = false;
    for_each_agent(h, [&](AgentId v) { isolated |= h.out_degree(v) == 0; });
    if (isolated || !seen.insert(serialize_instance(h)).second) continue;
    if (brute_result(h).status != SolveStatus::kStable) continue;
    pool.push_back(h);
  }
  for (const Instance& host : pool) {
    ++hosts;
    const auto [g, trace] = theorem1_compose(host, CompletionPolicy::kLexicographic, 0);
    const SolveResult r = solve_with_sat(g);
    if (r.status == SolveStatus::kNoStableMatching) ++unsat;
    if (r.status != SolveStatus::kStable) continue;
    ++solved;
    try {
      const Matching h = project_matching(g, *r.matching, trace);
      if (is_stable(host, h)) ++projected_stable;
    } catch (const std::exception& e) {
      detail_line(std::string("projection error: ") + e.what());
    }
  }
  detail_line("hosts=" + std::to_string(hosts) + " composed solved=" + std::to_string(solved) +
              " composed unsat=" + std::to_string(unsat) +
              " projections stable=" + std::to_string(projected_stable));
  verdict(7, hosts == 50 && solved > 0 && projected_stable == solved,
          "projections of stable matchings of 50 composed solvable hosts are stable in the host",
          seconds_since(t));
}

void criterion8() {
  const auto t = Clock::now();
  bool reduce_ok = true;
  for (std::uint32_t rx = 1; rx <= 4; ++rx) {
    for (std::uint32_t rz = 1; rz <= 4; ++rz) {
      std::vector<PatternEdge> reduced;
      for (PatternEdge e : lemma2_pattern(rx, rz)) {
        if (e.from == "x" || e.to == "x" || e.from == "f" || e.to == "f") continue;
        if (e.from == "a" || e.from == "b") --e.rank;
        if (e.from == "z") e.from = "x";
        if (e.to == "z") e.to = "x";
        reduced.push_back(e);
      }
      std::sort(reduced.begin(), reduced.end());
      reduce_ok = reduce_ok && reduced == lemma1_pattern(rz);
    }
  }
  detail_line(std::string("two-anchor minus x, a/b out-ranks decremented, equals single-anchor: ") +
              (reduce_ok ? "yes" : "no"));
  bool bijective = true;
  const Instance host = appendix_instance();
  for (int v = 0; v < 9; ++v) {
    const AgentId x = appendix_agent(v);
    bijective = bijective && validate(attach_lemma1_gadget(host, x, rho(host, x) + 1).first).ok();
  }
  for (auto [u, w] : {std::pair{1, 4}, std::pair{3, 6}, std::pair{5, 8}}) {
    const AgentId x = appendix_agent(u), z = appendix_agent(w);
    for (auto var : {Lemma2Variant::kCaption, Lemma2Variant::kFigure}) {
      const auto g = attach_lemma2_gadget(host, x, z, rho(host, x) + 1, rho(host, z) + 1, var).first;
      bijective = bijective && validate(g).ok();
    }
  }
  const auto t2 = theorem2_instance(CompletionPolicy::kLexicographic, 0);
  const auto t1 = theorem1_compose(host, CompletionPolicy::kLexicographic, 0);
  bijective = bijective && validate(t2.first).ok() && validate(t1.first).ok();
  detail_line(std::string("rank bijectivity on every gadget output: ") + (bijective ? "yes" : "no"));
  const auto c = t2.first.counts();
  const bool counts = c == std::array<std::uint32_t, 3>{18, 18, 18};
  detail_line("size-18 counts " + std::to_string(c[0]) + "/" + std::to_string(c[1]) + "/" + std::to_string(c[2]));
  const double secs = seconds_since(t);
  verdict(8, reduce_ok && bijective && counts && secs < 1.0, "gadget structure, rank bijectivity, 18/18/18 counts",
          secs);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
            << '\n';
  return failures == 0 ? 0 : 1;
}
