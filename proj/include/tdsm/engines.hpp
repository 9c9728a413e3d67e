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

// Stable-matching search engines:
//   brute      every set of disjoint families, filtered by stability
//   backtrack  depth-first over men with blocking-cycle pruning
//   sat        CNF encoding (one variable per family) + embedded CDCL solver
//   local      blocking-triple random walk over perfect matchings (3DSM only)
// brute, backtrack and sat are exact; local can only report successes.

#ifndef TDSM_ENGINES_HPP_
#define TDSM_ENGINES_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdsm/model.hpp"
#include "tdsm/rng.hpp"
#include "tdsm/sat.hpp"
#include "tdsm/stability.hpp"

namespace tdsm {

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolveStatus { kStable, kNoStableMatching, kTimeout };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kStable: return "STABLE";
    case SolveStatus::kNoStableMatching: return "NO_STABLE_MATCHING";
    default: return "TIMEOUT";
  }
}

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t iterations = 0;
  double wall_ms = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kTimeout;
  // The stable matching, or the best matching seen before a timeout.
  std::optional<Matching> matching;
  // Blocking triples of `matching` (0 when stable).
  std::size_t blocking_count = 0;
  std::string engine;
  SolveStats stats;
};

// Families of an instance with, for every agent, the ids of the families
// containing it.
class FamilyTable {
 public:
  explicit FamilyTable(const Instance& inst) : families_(enumerate_families(inst)) {
    for (Gender g : kGenders) containing_[slot(g)].assign(inst.count(g), {});
    for (std::uint32_t k = 0; k < families_.size(); ++k) {
      for (AgentId a : families_[k].members()) containing_[slot(a.gender)][a.index - 1].push_back(k);
    }
  }

  std::span<const Family> families() const { return families_; }
  std::size_t size() const { return families_.size(); }
  const Family& operator[](std::size_t k) const { return families_[k]; }
  std::span<const std::uint32_t> containing(AgentId a) const {
    return containing_[slot(a.gender)][a.index - 1];
  }

 private:
  std::vector<Family> families_;
  std::array<std::vector<std::vector<std::uint32_t>>, 3> containing_;
};

namespace detail {

inline constexpr std::uint32_t kSingle = std::numeric_limits<std::uint32_t>::max();

// Edge ranks of a family: r(m,f), r(f,d), r(d,m).
inline std::array<std::uint32_t, 3> family_ranks(const Instance& inst, const Family& t) {
  return {inst.rank_or_zero(Gender::kMan, t.man, t.woman),
          inst.rank_or_zero(Gender::kWoman, t.woman, t.dog),
          inst.rank_or_zero(Gender::kDog, t.dog, t.man)};
}

// Current edge ranks per agent for dense search code. kSingle marks a single
// agent and is only ever compared, never used in arithmetic.
struct RankState {
  std::array<std::vector<std::uint32_t>, 3> current;

  explicit RankState(const Instance& inst) {
    for (Gender g : kGenders) current[slot(g)].assign(inst.count(g), kSingle);
  }
  std::uint32_t& at(Gender g, std::uint32_t index) { return current[slot(g)][index - 1]; }

  bool blocks(const std::array<std::uint32_t, 3>& r, const Family& t) const {
    return r[0] < current[0][t.man - 1] && r[1] < current[1][t.woman - 1] &&
           r[2] < current[2][t.dog - 1];
  }
};

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace detail

inline constexpr std::uint64_t kBruteForceLimit = 1'000'000;

// Every stable matching, found by enumerating all sets of pairwise disjoint
// families (the empty set included). Refuses instances with more than `limit`
// matchings.
inline std::vector<Matching> solve_brute(const Instance& inst,
                                         std::uint64_t limit = kBruteForceLimit) {
  const FamilyTable table(inst);
  std::vector<std::array<std::uint32_t, 3>> ranks;
  for (const Family& t : table.families()) ranks.push_back(detail::family_ranks(inst, t));

  detail::RankState state(inst);
  std::vector<std::uint32_t> chosen;
  std::vector<Matching> stable;
  std::uint64_t visited = 0;

  auto is_free = [&](const Family& t) {
    return state.current[0][t.man - 1] == detail::kSingle &&
           state.current[1][t.woman - 1] == detail::kSingle &&
           state.current[2][t.dog - 1] == detail::kSingle;
  };
  auto set = [&](std::uint32_t k, bool on) {
    const Family& t = table[k];
    state.current[0][t.man - 1] = on ? ranks[k][0] : detail::kSingle;
    state.current[1][t.woman - 1] = on ? ranks[k][1] : detail::kSingle;
    state.current[2][t.dog - 1] = on ? ranks[k][2] : detail::kSingle;
  };

  // Each matching is visited once, as the increasing sequence of its family ids.
  auto dfs = [&](auto&& self, std::uint32_t from) -> void {
    if (++visited > limit) {
      throw CapacityError("instance has more than " + std::to_string(limit) + " matchings");
    }
    bool ok = true;
    for (std::uint32_t k = 0; k < table.size() && ok; ++k) ok = !state.blocks(ranks[k], table[k]);
    if (ok) {
      std::vector<Family> fams;
      for (std::uint32_t k : chosen) fams.push_back(table[k]);
      stable.emplace_back(inst, std::move(fams));
    }
    for (std::uint32_t k = from; k < table.size(); ++k) {
      if (!is_free(table[k])) continue;
      set(k, true);
      chosen.push_back(k);
      self(self, k + 1);
      chosen.pop_back();
      set(k, false);
    }
  };
  dfs(dfs, 0);
  return stable;
}

inline std::uint64_t count_stable(const Instance& inst, std::uint64_t limit = kBruteForceLimit) {
  return solve_brute(inst, limit).size();
}

inline SolveResult brute_result(const Instance& inst, std::uint64_t limit = kBruteForceLimit) {
  const auto start = std::chrono::steady_clock::now();
  auto all = solve_brute(inst, limit);
  SolveResult r;
  r.engine = "brute";
  if (all.empty()) {
    r.status = SolveStatus::kNoStableMatching;
  } else {
    r.status = SolveStatus::kStable;
    r.matching = std::move(all.front());
  }
  r.stats.nodes = all.size();
  r.stats.wall_ms = detail::elapsed_ms(start);
  return r;
}

struct BacktrackParams {
  std::uint64_t node_budget = std::numeric_limits<std::uint64_t>::max();
  // Disable to explore the full tree (used to check that pruning is sound).
  bool prune = true;
};

namespace detail {

class Backtracker {
 public:
  Backtracker(const Instance& inst, BacktrackParams params)
      : inst_(inst), table_(inst), params_(params), state_(inst), complete_(inst.complete()) {
    for (const Family& t : table_.families()) ranks_.push_back(family_ranks(inst, t));
    for (Gender g : kGenders) final_[slot(g)].assign(inst.count(g), 0);
    // Candidates per man, best woman first, then best dog for that woman.
    const std::uint32_t men = inst.count(Gender::kMan);
    candidates_.resize(men);
    for (std::uint32_t m = 1; m <= men; ++m) {
      auto ids = table_.containing({Gender::kMan, m});
      candidates_[m - 1].assign(ids.begin(), ids.end());
      std::stable_sort(candidates_[m - 1].begin(), candidates_[m - 1].end(),
                       [&](std::uint32_t a, std::uint32_t b) {
                         return std::pair(ranks_[a][0], ranks_[a][1]) <
                                std::pair(ranks_[b][0], ranks_[b][1]);
                       });
    }
  }

  // Stops at the first stable leaf unless collect_all is set.
  bool run(bool collect_all) {
    collect_all_ = collect_all;
    search(1);
    return !out_of_budget_;
  }

  bool out_of_budget() const { return out_of_budget_; }
  std::uint64_t nodes() const { return nodes_; }
  std::vector<Matching>& found() { return found_; }

 private:
  bool is_final(AgentId a) const { return final_[slot(a.gender)][a.index - 1] != 0; }
  void mark(AgentId a, bool on) { final_[slot(a.gender)][a.index - 1] = on ? 1 : 0; }

  // True when some cycle through one of `agents`, with all three members
  // finalized, blocks.
  bool finalized_block(std::initializer_list<AgentId> agents) const {
    for (AgentId a : agents) {
      for (std::uint32_t k : table_.containing(a)) {
        const Family& t = table_[k];
        if (is_final({Gender::kMan, t.man}) && is_final({Gender::kWoman, t.woman}) &&
            is_final({Gender::kDog, t.dog}) && state_.blocks(ranks_[k], t)) {
          return true;
        }
      }
    }
    return false;
  }

  bool budget_hit() {
    if (++nodes_ > params_.node_budget) {
      out_of_budget_ = true;
      return true;
    }
    return false;
  }

  // Returns true when the search should stop.
  bool search(std::uint32_t m) {
    if (budget_hit()) return true;
    if (m > inst_.count(Gender::kMan)) return leaf();
    const AgentId man{Gender::kMan, m};
    for (std::uint32_t k : candidates_[m - 1]) {
      const Family& t = table_[k];
      const AgentId woman{Gender::kWoman, t.woman};
      const AgentId dog{Gender::kDog, t.dog};
      if (is_final(woman) || is_final(dog)) continue;
      state_.at(Gender::kMan, t.man) = ranks_[k][0];
      state_.at(Gender::kWoman, t.woman) = ranks_[k][1];
      state_.at(Gender::kDog, t.dog) = ranks_[k][2];
      mark(man, true);
      mark(woman, true);
      mark(dog, true);
      chosen_.push_back(k);
      const bool pruned = params_.prune && finalized_block({man, woman, dog});
      const bool stop = !pruned && search(m + 1);
      chosen_.pop_back();
      mark(man, false);
      mark(woman, false);
      mark(dog, false);
      state_.at(Gender::kMan, t.man) = kSingle;
      state_.at(Gender::kWoman, t.woman) = kSingle;
      state_.at(Gender::kDog, t.dog) = kSingle;
      if (stop) return true;
    }
    if (!complete_) {
      mark(man, true);
      const bool pruned = params_.prune && finalized_block({man});
      const bool stop = !pruned && search(m + 1);
      mark(man, false);
      if (stop) return true;
    }
    return false;
  }

  bool leaf() {
    for (std::uint32_t k = 0; k < table_.size(); ++k) {
      if (state_.blocks(ranks_[k], table_[k])) return false;
    }
    std::vector<Family> fams;
    for (std::uint32_t k : chosen_) fams.push_back(table_[k]);
    found_.emplace_back(inst_, std::move(fams));
    return !collect_all_;
  }

  const Instance& inst_;
  FamilyTable table_;
  BacktrackParams params_;
  RankState state_;
  bool complete_;
  std::vector<std::array<std::uint32_t, 3>> ranks_;
  std::array<std::vector<char>, 3> final_;
  std::vector<std::vector<std::uint32_t>> candidates_;
  std::vector<std::uint32_t> chosen_;
  std::vector<Matching> found_;
  std::uint64_t nodes_ = 0;
  bool out_of_budget_ = false;
  bool collect_all_ = false;
};

}  // namespace detail

// Depth-first search over men in index order. Each man takes a free family
// (best woman first, then best dog) or, in 3DSMI, stays single. A partial
// assignment is cut as soon as a cycle whose three members all have final
// ranks blocks.
inline SolveResult solve_backtrack(const Instance& inst, BacktrackParams params = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::Backtracker bt(inst, params);
  bt.run(false);
  SolveResult r;
  r.engine = "backtrack";
  if (!bt.found().empty()) {
    r.status = SolveStatus::kStable;
    r.matching = std::move(bt.found().front());
  } else {
    r.status = bt.out_of_budget() ? SolveStatus::kTimeout : SolveStatus::kNoStableMatching;
  }
  r.stats.nodes = bt.nodes();
  r.stats.wall_ms = detail::elapsed_ms(start);
  return r;
}

// All stable matchings reachable by the backtracking search.
inline std::vector<Matching> backtrack_all(const Instance& inst, BacktrackParams params = {}) {
  detail::Backtracker bt(inst, params);
  if (!bt.run(true)) throw CapacityError("backtracking node budget exhausted");
  return std::move(bt.found());
}

struct CnfProblem {
  int num_vars = 0;
  // Clauses back to back, each terminated by 0.
  std::vector<int> literals;
  std::size_t num_clauses = 0;
  std::size_t num_stability_clauses = 0;
  // varmap[v - 1] is the family of variable v. Sorted, so for complete
  // instances v = ((i-1) n + (j-1)) n + (k-1) + 1 for family (Mi, Fj, Dk).
  std::vector<Family> varmap;

  template <typename Fn>
  void for_each_clause(Fn&& fn) const {
    std::size_t begin = 0;
    for (std::size_t k = 0; k < literals.size(); ++k) {
      if (literals[k] == 0) {
        fn(std::span<const int>(literals.data() + begin, k - begin));
        begin = k + 1;
      }
    }
  }

  int var_of(const Family& f) const {
    auto it = std::lower_bound(varmap.begin(), varmap.end(), f);
    if (it == varmap.end() || *it != f) return 0;
    return static_cast<int>(it - varmap.begin()) + 1;
  }

  void add_clause(std::span<const int> lits) {
    literals.insert(literals.end(), lits.begin(), lits.end());
    literals.push_back(0);
    ++num_clauses;
  }
};

// One variable per family.
//  (i)   complete instances only: every agent is in at least one family;
//  (ii)  every agent is in at most one family (pairwise);
//  (iii) for every cycle t = (m,f,d): some member is matched at least as well
//        as in t, i.e. OR over families t' containing m with
//        r(m, woman of t') <= r(m,f), likewise for f and d.
// Without (i) single agents satisfy nothing in (iii), as R = infinity.
inline CnfProblem encode_cnf(const Instance& inst) {
  const FamilyTable table(inst);
  CnfProblem cnf;
  cnf.varmap.assign(table.families().begin(), table.families().end());
  cnf.num_vars = static_cast<int>(table.size());
  const bool complete = inst.complete();

  std::vector<int> clause;
  for_each_agent(inst, [&](AgentId a) {
    const auto ids = table.containing(a);
    if (complete) {
      clause.clear();
      for (std::uint32_t k : ids) clause.push_back(static_cast<int>(k) + 1);
      cnf.add_clause(clause);
    }
    for (std::size_t p = 0; p < ids.size(); ++p) {
      for (std::size_t q = p + 1; q < ids.size(); ++q) {
        const int pair[2] = {-static_cast<int>(ids[p]) - 1, -static_cast<int>(ids[q]) - 1};
        cnf.add_clause(pair);
      }
    }
  });

  std::vector<std::uint32_t> stamp(table.size(), 0);
  std::uint32_t epoch = 0;
  for (std::uint32_t k = 0; k < table.size(); ++k) {
    const Family& t = table[k];
    ++epoch;
    clause.clear();
    for (Gender g : kGenders) {
      const AgentId v = t.member(g);
      const std::uint32_t limit = inst.rank_or_zero(g, v.index, t.member(succ(g)).index);
      for (std::uint32_t other : table.containing(v)) {
        const std::uint32_t r =
            inst.rank_or_zero(g, v.index, table[other].member(succ(g)).index);
        if (r <= limit && stamp[other] != epoch) {
          stamp[other] = epoch;
          clause.push_back(static_cast<int>(other) + 1);
        }
      }
    }
    std::sort(clause.begin(), clause.end());
    cnf.add_clause(clause);
    ++cnf.num_stability_clauses;
  }
  return cnf;
}

inline void write_dimacs(const CnfProblem& cnf, std::ostream& os) {
  for (int v = 1; v <= cnf.num_vars; ++v) os << "c var " << v << " = " << to_string(cnf.varmap[v - 1]) << '\n';
  os << "p cnf " << cnf.num_vars << ' ' << cnf.num_clauses << '\n';
  std::string line;
  cnf.for_each_clause([&](std::span<const int> c) {
    line.clear();
    for (int l : c) {
      line += std::to_string(l);
      line += ' ';
    }
    line += "0\n";
    os << line;
  });
}

struct SatParams {
  std::uint64_t conflict_budget = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t seed = 0;
};

struct SatOutcome {
  sat::Status status = sat::Status::kUnknown;
  std::vector<char> model;  // model[v - 1] for variable v
  sat::Stats stats;
};

inline void load(sat::Solver& solver, const CnfProblem& cnf) {
  solver.ensure_vars(cnf.num_vars);
  cnf.for_each_clause([&](std::span<const int> c) { solver.add_clause(c); });
}

inline SatOutcome solve_sat(const CnfProblem& cnf, SatParams params = {}) {
  sat::Solver solver(params.seed);
  load(solver, cnf);
  SatOutcome out;
  out.status = solver.solve(params.conflict_budget);
  if (out.status == sat::Status::kSat) out.model = solver.model();
  out.stats = solver.stats();
  return out;
}

// Families whose variables are true. Throws DecodeError if they overlap or do
// not form a stable matching, either of which means the encoder is wrong.
inline Matching decode_model(const Instance& inst, const CnfProblem& cnf,
                             const std::vector<char>& model) {
  std::vector<Family> fams;
  for (int v = 1; v <= cnf.num_vars; ++v) {
    if (static_cast<std::size_t>(v - 1) < model.size() && model[v - 1]) fams.push_back(cnf.varmap[v - 1]);
  }
  Matching m;
  try {
    m = Matching(inst, std::move(fams));
  } catch (const ModelError& e) {
    throw DecodeError(std::string("model violates at-most-one: ") + e.what());
  }
  if (!blocking_triples(inst, m, cnf.varmap).empty()) {
    throw DecodeError("decoded matching is not stable");
  }
  return m;
}

// Encodes, solves and decodes.
inline SolveResult solve_with_sat(const Instance& inst, SatParams params = {}) {
  const auto start = std::chrono::steady_clock::now();
  const CnfProblem cnf = encode_cnf(inst);
  const SatOutcome out = solve_sat(cnf, params);
  SolveResult r;
  r.engine = "sat";
  r.stats.conflicts = out.stats.conflicts;
  switch (out.status) {
    case sat::Status::kSat:
      r.status = SolveStatus::kStable;
      r.matching = decode_model(inst, cnf, out.model);
      break;
    case sat::Status::kUnsat: r.status = SolveStatus::kNoStableMatching; break;
    default: r.status = SolveStatus::kTimeout; break;
  }
  r.stats.wall_ms = detail::elapsed_ms(start);
  return r;
}

// Every stable matching, by repeatedly solving and excluding the last model.
inline std::vector<Matching> enumerate_sat_models(const Instance& inst, std::size_t limit = 100000,
                                                  SatParams params = {}) {
  const CnfProblem cnf = encode_cnf(inst);
  sat::Solver solver(params.seed);
  load(solver, cnf);
  std::vector<Matching> out;
  std::vector<int> block;
  while (solver.solve(params.conflict_budget) == sat::Status::kSat) {
    if (out.size() >= limit) throw CapacityError("more than " + std::to_string(limit) + " models");
    out.push_back(decode_model(inst, cnf, solver.model()));
    block.clear();
    for (int v = 1; v <= cnf.num_vars; ++v) block.push_back(solver.model_value(v) ? -v : v);
    if (!solver.add_clause(block)) break;
  }
  return out;
}

struct LocalSearchParams {
  std::uint64_t max_iterations = 1'000'000;
  std::uint64_t restart_interval = 100'000;
  std::uint64_t seed = 1;
  bool greedy_repair = true;
};

namespace detail {

// Perfect-matching state over a complete instance with bitset rows:
// better(v) is the set of targets v ranks strictly above its current partner.
class LocalSearchState {
 public:
  explicit LocalSearchState(const Instance& inst)
      : n_(inst.size()), words_((n_ + 63) / 64) {
    for (Gender g : kGenders) {
      prefix_[slot(g)].assign(static_cast<std::size_t>(n_) * (n_ + 1) * words_, 0);
      for (std::uint32_t i = 1; i <= n_; ++i) {
        const auto edges = inst.edges({g, i});
        for (std::uint32_t k = 1; k <= n_; ++k) {
          std::uint64_t* row = prefix(g, i, k);
          std::copy_n(prefix(g, i, k - 1), words_, row);
          const std::uint32_t t = edges[k - 1].target - 1;
          row[t / 64] |= 1ULL << (t % 64);
        }
      }
      rank_[slot(g)].resize(static_cast<std::size_t>(n_) * n_);
      for (std::uint32_t i = 1; i <= n_; ++i) {
        for (std::uint32_t j = 1; j <= n_; ++j) {
          rank_[slot(g)][(i - 1) * n_ + (j - 1)] = inst.rank_or_zero(g, i, j);
        }
      }
    }
    man_.resize(n_);
    woman_.resize(n_);
    dog_.resize(n_);
    for (auto& v : family_of_) v.resize(n_);
    for (auto& v : current_) v.resize(n_);
    accepts_man_.assign(static_cast<std::size_t>(n_) * words_, 0);
  }

  std::uint32_t n() const { return n_; }

  void randomize(Rng& rng) {
    std::vector<std::uint32_t> w(n_), d(n_);
    for (std::uint32_t k = 0; k < n_; ++k) w[k] = d[k] = k;
    rng.shuffle(std::span<std::uint32_t>(w));
    rng.shuffle(std::span<std::uint32_t>(d));
    for (std::uint32_t k = 0; k < n_; ++k) set_family(k, k, w[k], d[k]);
  }

  // Number of blocking triples; remembers the data needed by pick().
  std::uint64_t count_blocking() {
    std::fill(accepts_man_.begin(), accepts_man_.end(), 0);
    for (std::uint32_t d = 0; d < n_; ++d) {
      const std::uint64_t* better = better_row(Gender::kDog, d);
      for (std::uint32_t w = 0; w < words_; ++w) {
        for (std::uint64_t bits = better[w]; bits; bits &= bits - 1) {
          const std::uint32_t m = w * 64 + static_cast<std::uint32_t>(std::countr_zero(bits));
          accepts_man_[m * words_ + d / 64] |= 1ULL << (d % 64);
        }
      }
    }
    std::uint64_t total = 0;
    for (std::uint32_t m = 0; m < n_; ++m) {
      const std::uint64_t* women = better_row(Gender::kMan, m);
      const std::uint64_t* dogs_ok = &accepts_man_[m * words_];
      for (std::uint32_t w = 0; w < words_; ++w) {
        for (std::uint64_t bits = women[w]; bits; bits &= bits - 1) {
          const std::uint32_t f = w * 64 + static_cast<std::uint32_t>(std::countr_zero(bits));
          const std::uint64_t* dogs = better_row(Gender::kWoman, f);
          for (std::uint32_t x = 0; x < words_; ++x) total += std::popcount(dogs[x] & dogs_ok[x]);
        }
      }
    }
    return total;
  }

  // The index-th blocking triple in (m, f, d) order; requires a preceding
  // count_blocking() on the same state.
  std::array<std::uint32_t, 3> pick(std::uint64_t index) const {
    for (std::uint32_t m = 0; m < n_; ++m) {
      const std::uint64_t* women = better_row(Gender::kMan, m);
      const std::uint64_t* dogs_ok = &accepts_man_[m * words_];
      for (std::uint32_t w = 0; w < words_; ++w) {
        for (std::uint64_t bits = women[w]; bits; bits &= bits - 1) {
          const std::uint32_t f = w * 64 + static_cast<std::uint32_t>(std::countr_zero(bits));
          const std::uint64_t* dogs = better_row(Gender::kWoman, f);
          for (std::uint32_t x = 0; x < words_; ++x) {
            std::uint64_t both = dogs[x] & dogs_ok[x];
            const auto c = static_cast<std::uint64_t>(std::popcount(both));
            if (index >= c) {
              index -= c;
              continue;
            }
            for (; index > 0; --index) both &= both - 1;
            return {m, f, x * 64 + static_cast<std::uint32_t>(std::countr_zero(both))};
          }
        }
      }
    }
    throw std::logic_error("blocking triple index out of range");
  }

  // Forms (m, f, d) and re-matches the displaced agents. With a greedy
  // repair every re-matching of the displaced agents (at most 2 x 2) is
  // scored and the one with the fewest blocking triples kept, ties broken at
  // random; otherwise one re-matching is drawn at random.
  void apply(const std::array<std::uint32_t, 3>& t, Rng& rng, bool greedy) {
    std::array<std::uint32_t, 3> slots = {family_of_[0][t[0]], family_of_[1][t[1]],
                                          family_of_[2][t[2]]};
    std::sort(slots.begin(), slots.end());
    const auto end = std::unique(slots.begin(), slots.end());
    const std::size_t used = static_cast<std::size_t>(end - slots.begin());
    std::vector<std::uint32_t> men, women, dogs;
    for (std::size_t s = 0; s < used; ++s) {
      const std::uint32_t k = slots[s];
      if (man_[k] != t[0]) men.push_back(man_[k]);
      if (woman_[k] != t[1]) women.push_back(woman_[k]);
      if (dog_[k] != t[2]) dogs.push_back(dog_[k]);
    }
    set_family(slots[0], t[0], t[1], t[2]);
    auto assign = [&](std::uint32_t option) {
      const bool swap_w = option & 1u, swap_d = option & 2u;
      for (std::size_t s = 1; s < used; ++s) {
        const std::size_t wi = swap_w ? used - 1 - s : s - 1;
        const std::size_t di = swap_d ? used - 1 - s : s - 1;
        set_family(slots[s], men[s - 1], women[wi], dogs[di]);
      }
    };
    if (used < 3) {
      assign(0);
      return;
    }
    if (!greedy) {
      assign(static_cast<std::uint32_t>(rng.below(4)));
      return;
    }
    std::array<std::uint64_t, 4> score{};
    for (std::uint32_t o = 0; o < 4; ++o) {
      assign(o);
      score[o] = count_blocking();
    }
    const std::uint64_t best = *std::min_element(score.begin(), score.end());
    std::array<std::uint32_t, 4> ties{};
    std::uint32_t n_ties = 0;
    for (std::uint32_t o = 0; o < 4; ++o) {
      if (score[o] == best) ties[n_ties++] = o;
    }
    assign(ties[rng.below(n_ties)]);
  }

  std::vector<Family> families() const {
    std::vector<Family> out;
    for (std::uint32_t k = 0; k < n_; ++k) out.push_back({man_[k] + 1, woman_[k] + 1, dog_[k] + 1});
    return out;
  }

 private:
  std::uint64_t* prefix(Gender g, std::uint32_t i, std::uint32_t k) {
    return &prefix_[slot(g)][((static_cast<std::size_t>(i) - 1) * (n_ + 1) + k) * words_];
  }
  const std::uint64_t* better_row(Gender g, std::uint32_t i0) const {
    const std::uint32_t r = current_[slot(g)][i0];
    return &prefix_[slot(g)][(static_cast<std::size_t>(i0) * (n_ + 1) + (r - 1)) * words_];
  }

  void set_family(std::uint32_t k, std::uint32_t m, std::uint32_t f, std::uint32_t d) {
    man_[k] = m;
    woman_[k] = f;
    dog_[k] = d;
    family_of_[0][m] = family_of_[1][f] = family_of_[2][d] = k;
    current_[0][m] = rank_[0][m * n_ + f];
    current_[1][f] = rank_[1][f * n_ + d];
    current_[2][d] = rank_[2][d * n_ + m];
  }

  std::uint32_t n_;
  std::uint32_t words_;
  std::array<std::vector<std::uint64_t>, 3> prefix_;  // targets of rank <= k
  std::array<std::vector<std::uint32_t>, 3> rank_;
  std::array<std::vector<std::uint32_t>, 3> current_;
  std::vector<std::uint32_t> man_, woman_, dog_;
  std::array<std::vector<std::uint32_t>, 3> family_of_;
  std::vector<std::uint64_t> accepts_man_;  // per man: dogs ranking him above their partner
};

}  // namespace detail

// Walk over perfect matchings that repeatedly forms a uniformly chosen
// blocking triple and re-matches the displaced agents (see
// LocalSearchState::apply), restarting from a fresh random matching every
// restart_interval moves.
inline SolveResult local_search(const Instance& inst, LocalSearchParams params) {
  if (params.max_iterations == 0 || params.restart_interval == 0) {
    throw std::invalid_argument("local search parameters must be positive");
  }
  if (!inst.complete()) throw ModelError("local search requires a complete instance");
  const auto start = std::chrono::steady_clock::now();
  Rng rng(params.seed);
  detail::LocalSearchState state(inst);
  state.randomize(rng);

  SolveResult r;
  r.engine = "local";
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::vector<Family> best_families;
  std::uint64_t it = 0;
  for (;;) {
    const std::uint64_t count = state.count_blocking();
    if (count < best) {
      best = count;
      best_families = state.families();
    }
    if (count == 0 || it >= params.max_iterations) break;
    ++it;
    if (it % params.restart_interval == 0) {
      state.randomize(rng);
      continue;
    }
    state.apply(state.pick(rng.below(count)), rng, params.greedy_repair);
  }
  r.matching = Matching(inst, std::move(best_families));
  r.blocking_count = static_cast<std::size_t>(best);
  r.stats.iterations = it;
  if (best == 0) {
    if (!is_stable(inst, *r.matching)) throw std::logic_error("local search reported an unstable matching");
    r.status = SolveStatus::kStable;
  } else {
    r.status = SolveStatus::kTimeout;
  }
  r.stats.wall_ms = detail::elapsed_ms(start);
  return r;
}

}  // namespace tdsm

#endif  // TDSM_ENGINES_HPP_
