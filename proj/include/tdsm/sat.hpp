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

// A compact CDCL SAT solver: two-watched-literal propagation with implicit
// binary clauses, first-UIP learning with recursive minimization, VSIDS
// branching with phase saving, Luby restarts and LBD-guided clause deletion.
// Literals use the DIMACS convention at the interface (v or -v, v >= 1).

#ifndef TDSM_SAT_HPP_
#define TDSM_SAT_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "tdsm/rng.hpp"

namespace tdsm::sat {

enum class Status { kSat, kUnsat, kUnknown };

struct Stats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t reductions = 0;
};

class Solver {
 public:
  explicit Solver(std::uint64_t seed = 0) : rng_(seed) {}

  int num_vars() const { return static_cast<int>(assigns_.size()); }

  int new_var() {
    const int v = num_vars();
    assigns_.push_back(0);
    level_.push_back(0);
    reason_.push_back(kNoReason);
    polarity_.push_back(1);  // branch false first
    seen_.push_back(0);
    // Tiny seeded jitter decides the initial branching order.
    activity_.push_back(static_cast<double>(rng_.below(1u << 20)) * 1e-12);
    heap_pos_.push_back(-1);
    watches_.emplace_back();
    watches_.emplace_back();
    heap_insert(v);
    return v + 1;
  }

  void ensure_vars(int n) {
    while (num_vars() < n) new_var();
  }

  // Adds a clause of DIMACS literals. Returns false once the formula is known
  // to be unsatisfiable.
  bool add_clause(std::span<const int> dimacs) {
    if (!ok_) return false;
    cancel_until(0);
    tmp_.clear();
    for (int d : dimacs) {
      if (d == 0) throw std::invalid_argument("literal 0 inside a clause");
      const int v = d > 0 ? d : -d;
      ensure_vars(v);
      tmp_.push_back(make_lit(v - 1, d < 0));
    }
    std::sort(tmp_.begin(), tmp_.end());
    std::size_t j = 0;
    std::uint32_t prev = kUndefLit;
    for (std::uint32_t l : tmp_) {
      if (value(l) == kTrue || l == (prev ^ 1u)) return true;  // satisfied or tautology
      if (l != prev && value(l) != kFalse) tmp_[j++] = l;
      prev = l;
    }
    tmp_.resize(j);
    if (tmp_.empty()) return ok_ = false;
    if (tmp_.size() == 1) {
      enqueue(tmp_[0], kNoReason);
      if (propagate() != kNoConflict) ok_ = false;
      return ok_;
    }
    if (tmp_.size() == 2) {
      add_binary(tmp_[0], tmp_[1]);
    } else {
      attach(alloc_clause(tmp_, false, 0));
      ++num_original_long_;
    }
    return true;
  }

  Status solve(std::uint64_t conflict_budget = std::numeric_limits<std::uint64_t>::max()) {
    model_.clear();
    if (!ok_) return Status::kUnsat;
    if (propagate() != kNoConflict) {
      ok_ = false;
      return Status::kUnsat;
    }
    if (max_learnts_ == 0) {
      max_learnts_ = std::max<double>(8000.0, static_cast<double>(num_original_long_) / 3.0);
    }
    const std::uint64_t limit = stats_.conflicts > std::numeric_limits<std::uint64_t>::max() - conflict_budget
                                    ? std::numeric_limits<std::uint64_t>::max()
                                    : stats_.conflicts + conflict_budget;
    for (std::uint64_t round = 0;; ++round) {
      const auto allowed = static_cast<std::uint64_t>(luby(2.0, round) * 100.0);
      const Status s = search(allowed, limit);
      if (s != Status::kUnknown) return s;
      if (stats_.conflicts >= limit) {
        cancel_until(0);
        return Status::kUnknown;
      }
      ++stats_.restarts;
    }
  }

  // Value of DIMACS variable v (1-based) in the last model.
  bool model_value(int v) const { return model_.at(static_cast<std::size_t>(v - 1)) != 0; }
  const std::vector<char>& model() const { return model_; }
  const Stats& stats() const { return stats_; }
  bool okay() const { return ok_; }

 private:
  static constexpr std::uint32_t kUndefLit = std::numeric_limits<std::uint32_t>::max();
  static constexpr std::uint32_t kNoReason = std::numeric_limits<std::uint32_t>::max();
  static constexpr std::uint32_t kBinaryTag = 1u << 31;
  static constexpr std::uint32_t kBinaryWatch = std::numeric_limits<std::uint32_t>::max();
  static constexpr std::uint32_t kNoConflict = std::numeric_limits<std::uint32_t>::max();
  static constexpr std::uint32_t kBinaryConflict = kNoConflict - 1;
  static constexpr std::int8_t kTrue = 1;
  static constexpr std::int8_t kFalse = -1;
  // Clause header words: size, flags (bit 0 learnt, bit 1 deleted, lbd << 2),
  // activity (float bits).
  static constexpr std::uint32_t kHeader = 3;

  struct Watcher {
    std::uint32_t cref;     // kBinaryWatch for implicit binary clauses
    std::uint32_t blocker;  // the other literal of a binary clause
  };

  static std::uint32_t make_lit(int var, bool negated) {
    return static_cast<std::uint32_t>(var) * 2u + (negated ? 1u : 0u);
  }
  static int var_of(std::uint32_t lit) { return static_cast<int>(lit >> 1); }

  std::int8_t value(std::uint32_t lit) const {
    const std::int8_t a = assigns_[lit >> 1];
    return (lit & 1u) ? static_cast<std::int8_t>(-a) : a;
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  std::uint32_t clause_size(std::uint32_t cref) const { return arena_[cref]; }
  std::uint32_t* clause_lits(std::uint32_t cref) { return arena_.data() + cref + kHeader; }
  bool is_learnt(std::uint32_t cref) const { return arena_[cref + 1] & 1u; }
  bool is_deleted(std::uint32_t cref) const { return arena_[cref + 1] & 2u; }
  std::uint32_t lbd_of(std::uint32_t cref) const { return arena_[cref + 1] >> 2; }
  float clause_activity(std::uint32_t cref) const { return std::bit_cast<float>(arena_[cref + 2]); }
  void set_clause_activity(std::uint32_t cref, float a) { arena_[cref + 2] = std::bit_cast<std::uint32_t>(a); }

  std::uint32_t alloc_clause(std::span<const std::uint32_t> lits, bool learnt, std::uint32_t lbd) {
    const auto cref = static_cast<std::uint32_t>(arena_.size());
    arena_.push_back(static_cast<std::uint32_t>(lits.size()));
    arena_.push_back((learnt ? 1u : 0u) | (lbd << 2));
    arena_.push_back(std::bit_cast<std::uint32_t>(0.0f));
    arena_.insert(arena_.end(), lits.begin(), lits.end());
    if (learnt) learnts_.push_back(cref);
    return cref;
  }

  void attach(std::uint32_t cref) {
    const std::uint32_t* c = clause_lits(cref);
    watches_[c[0]].push_back({cref, c[1]});
    watches_[c[1]].push_back({cref, c[0]});
  }

  void add_binary(std::uint32_t a, std::uint32_t b) {
    watches_[a].push_back({kBinaryWatch, b});
    watches_[b].push_back({kBinaryWatch, a});
  }

  void enqueue(std::uint32_t lit, std::uint32_t reason) {
    const int v = var_of(lit);
    assigns_[v] = (lit & 1u) ? kFalse : kTrue;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(lit);
  }

  // Returns kNoConflict, kBinaryConflict (literals in binary_conflict_), or
  // the conflicting clause reference.
  std::uint32_t propagate() {
    std::uint32_t confl = kNoConflict;
    while (qhead_ < trail_.size()) {
      const std::uint32_t p = trail_[qhead_++];
      const std::uint32_t false_lit = p ^ 1u;
      auto& ws = watches_[false_lit];
      ++stats_.propagations;
      std::size_t i = 0, j = 0;
      const std::size_t end = ws.size();
      while (i < end) {
        const Watcher w = ws[i];
        if (w.cref == kBinaryWatch) {
          const std::int8_t bv = value(w.blocker);
          ws[j++] = ws[i++];
          if (bv == kTrue) continue;
          if (bv == kFalse) {
            binary_conflict_[0] = false_lit;
            binary_conflict_[1] = w.blocker;
            confl = kBinaryConflict;
            break;
          }
          enqueue(w.blocker, kBinaryTag | false_lit);
          continue;
        }
        if (value(w.blocker) == kTrue) {
          ws[j++] = ws[i++];
          continue;
        }
        std::uint32_t* c = clause_lits(w.cref);
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        const std::uint32_t first = c[0];
        ++i;
        if (first != w.blocker && value(first) == kTrue) {
          ws[j++] = {w.cref, first};
          continue;
        }
        const std::uint32_t size = clause_size(w.cref);
        bool moved = false;
        for (std::uint32_t k = 2; k < size; ++k) {
          if (value(c[k]) != kFalse) {
            std::swap(c[1], c[k]);
            watches_[c[1]].push_back({w.cref, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.cref, first};
        if (value(first) == kFalse) {
          confl = w.cref;
          break;
        }
        enqueue(first, w.cref);
      }
      if (confl != kNoConflict) {
        while (i < end) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return confl;
      }
      ws.resize(j);
    }
    return kNoConflict;
  }

  // Calls fn on the literals of v's reason other than v's own literal.
  template <typename Fn>
  void for_each_antecedent(int v, Fn&& fn) {
    const std::uint32_t r = reason_[v];
    if (r & kBinaryTag) {
      fn(r & ~kBinaryTag);
      return;
    }
    const std::uint32_t* c = clause_lits(r);
    const std::uint32_t size = clause_size(r);
    for (std::uint32_t k = 1; k < size; ++k) fn(c[k]);
  }

  void analyze(std::uint32_t confl, std::vector<std::uint32_t>& learnt, int& bt_level,
               std::uint32_t& lbd) {
    learnt.clear();
    learnt.push_back(kUndefLit);
    int path = 0;
    std::uint32_t p = kUndefLit;
    std::size_t index = trail_.size();

    auto visit = [&](std::uint32_t q) {
      const int v = var_of(q);
      if (seen_[v] || level_[v] == 0) return;
      bump_var(v);
      seen_[v] = 1;
      if (level_[v] >= decision_level()) {
        ++path;
      } else {
        learnt.push_back(q);
      }
    };

    if (confl == kBinaryConflict) {
      visit(binary_conflict_[0]);
      visit(binary_conflict_[1]);
    } else {
      if (is_learnt(confl)) bump_clause(confl);
      const std::uint32_t* c = clause_lits(confl);
      for (std::uint32_t k = 0, n = clause_size(confl); k < n; ++k) visit(c[k]);
    }
    for (;;) {
      while (!seen_[var_of(trail_[--index])]) {
      }
      p = trail_[index];
      const int pv = var_of(p);
      seen_[pv] = 0;
      if (--path == 0) break;
      const std::uint32_t r = reason_[pv];
      if (!(r & kBinaryTag) && is_learnt(r)) bump_clause(r);
      for_each_antecedent(pv, visit);
    }
    learnt[0] = p ^ 1u;

    // Recursive minimization.
    to_clear_.assign(learnt.begin(), learnt.end());
    std::uint32_t abstract = 0;
    for (std::size_t k = 1; k < learnt.size(); ++k) abstract |= abstract_level(var_of(learnt[k]));
    std::size_t j = 1;
    for (std::size_t k = 1; k < learnt.size(); ++k) {
      const int v = var_of(learnt[k]);
      if (reason_[v] == kNoReason || !lit_redundant(learnt[k], abstract)) learnt[j++] = learnt[k];
    }
    learnt.resize(j);
    for (std::uint32_t l : to_clear_) seen_[var_of(l)] = 0;

    bt_level = 0;
    if (learnt.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t k = 2; k < learnt.size(); ++k) {
        if (level_[var_of(learnt[k])] > level_[var_of(learnt[max_i])]) max_i = k;
      }
      std::swap(learnt[1], learnt[max_i]);
      bt_level = level_[var_of(learnt[1])];
    }

    ++lbd_stamp_;
    if (level_stamp_.size() < static_cast<std::size_t>(decision_level()) + 1) {
      level_stamp_.resize(static_cast<std::size_t>(decision_level()) + 1, 0);
    }
    lbd = 0;
    for (std::uint32_t l : learnt) {
      const int lv = level_[var_of(l)];
      if (level_stamp_[lv] != lbd_stamp_) {
        level_stamp_[lv] = lbd_stamp_;
        ++lbd;
      }
    }
  }

  std::uint32_t abstract_level(int v) const { return 1u << (level_[v] & 31); }

  bool lit_redundant(std::uint32_t lit, std::uint32_t abstract) {
    stack_.clear();
    stack_.push_back(lit);
    const std::size_t top = to_clear_.size();
    while (!stack_.empty()) {
      const int v = var_of(stack_.back());
      stack_.pop_back();
      bool failed = false;
      for_each_antecedent(v, [&](std::uint32_t q) {
        if (failed) return;
        const int qv = var_of(q);
        if (seen_[qv] || level_[qv] == 0) return;
        if (reason_[qv] != kNoReason && (abstract_level(qv) & abstract)) {
          seen_[qv] = 1;
          stack_.push_back(q);
          to_clear_.push_back(q);
        } else {
          failed = true;
        }
      });
      if (failed) {
        for (std::size_t k = top; k < to_clear_.size(); ++k) seen_[var_of(to_clear_[k])] = 0;
        to_clear_.resize(top);
        return false;
      }
    }
    return true;
  }

  void cancel_until(int level) {
    if (decision_level() <= level) return;
    for (std::size_t k = trail_.size(); k-- > trail_lim_[level];) {
      const int v = var_of(trail_[k]);
      polarity_[v] = static_cast<char>(trail_[k] & 1u);
      assigns_[v] = 0;
      reason_[v] = kNoReason;
      if (heap_pos_[v] < 0) heap_insert(v);
    }
    trail_.resize(trail_lim_[level]);
    trail_lim_.resize(level);
    qhead_ = trail_.size();
  }

  Status search(std::uint64_t allowed, std::uint64_t limit) {
    std::uint64_t local = 0;
    std::vector<std::uint32_t>& learnt = learnt_buf_;
    for (;;) {
      const std::uint32_t confl = propagate();
      if (confl != kNoConflict) {
        ++stats_.conflicts;
        ++local;
        if (decision_level() == 0) {
          ok_ = false;
          return Status::kUnsat;
        }
        int bt = 0;
        std::uint32_t lbd = 0;
        analyze(confl, learnt, bt, lbd);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else if (learnt.size() == 2) {
          add_binary(learnt[0], learnt[1]);
          enqueue(learnt[0], kBinaryTag | learnt[1]);
        } else {
          const std::uint32_t cref = alloc_clause(learnt, true, lbd);
          attach(cref);
          bump_clause(cref);
          enqueue(learnt[0], cref);
        }
        var_inc_ /= kVarDecay;
        clause_inc_ /= kClauseDecay;
        if (stats_.conflicts >= limit) return Status::kUnknown;
        continue;
      }
      if (local >= allowed) {
        cancel_until(0);
        return Status::kUnknown;
      }
      if (decision_level() == 0 && static_cast<double>(learnts_.size()) >= max_learnts_) {
        reduce_and_collect();
        max_learnts_ *= 1.1;
      }
      int next = -1;
      while (next < 0) {
        if (heap_.empty()) break;
        const int v = heap_pop();
        if (assigns_[v] == 0) next = v;
      }
      if (next < 0) {
        model_.assign(assigns_.size(), 0);
        for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == kTrue;
        cancel_until(0);
        return Status::kSat;
      }
      ++stats_.decisions;
      trail_lim_.push_back(trail_.size());
      enqueue(make_lit(next, polarity_[next] != 0), kNoReason);
    }
  }

  // At decision level 0 only: drops half of the high-LBD learnt clauses and
  // every satisfied clause, strips false literals, then compacts the arena
  // and rebuilds the long-clause watches.
  void reduce_and_collect() {
    ++stats_.reductions;
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t cref : learnts_) {
      if (lbd_of(cref) > 2) candidates.push_back(cref);
    }
    std::sort(candidates.begin(), candidates.end(), [&](std::uint32_t a, std::uint32_t b) {
      return clause_activity(a) < clause_activity(b);
    });
    for (std::size_t k = 0; k < candidates.size() / 2; ++k) arena_[candidates[k] + 1] |= 2u;

    for (auto& ws : watches_) {
      ws.erase(std::remove_if(ws.begin(), ws.end(),
                              [](const Watcher& w) { return w.cref != kBinaryWatch; }),
               ws.end());
    }
    for (std::uint32_t lit : trail_) reason_[var_of(lit)] = kNoReason;

    std::vector<std::uint32_t> fresh;
    fresh.reserve(arena_.size());
    std::vector<std::uint32_t> new_learnts;
    std::vector<std::uint32_t> lits;
    for (std::uint32_t cref = 0; cref < arena_.size(); cref += kHeader + clause_size(cref)) {
      if (is_deleted(cref)) continue;
      const std::uint32_t* c = clause_lits(cref);
      lits.clear();
      bool satisfied = false;
      for (std::uint32_t k = 0, n = clause_size(cref); k < n; ++k) {
        const std::int8_t v = value(c[k]);
        if (v == kTrue) {
          satisfied = true;
          break;
        }
        if (v == 0) lits.push_back(c[k]);
      }
      if (satisfied) continue;
      if (lits.size() == 1) {
        enqueue(lits[0], kNoReason);
        continue;
      }
      if (lits.size() == 2) {
        add_binary(lits[0], lits[1]);
        continue;
      }
      const auto nref = static_cast<std::uint32_t>(fresh.size());
      fresh.push_back(static_cast<std::uint32_t>(lits.size()));
      fresh.push_back(arena_[cref + 1]);
      fresh.push_back(arena_[cref + 2]);
      fresh.insert(fresh.end(), lits.begin(), lits.end());
      if (is_learnt(cref)) new_learnts.push_back(nref);
    }
    arena_ = std::move(fresh);
    learnts_ = std::move(new_learnts);
    for (std::uint32_t cref = 0; cref < arena_.size(); cref += kHeader + clause_size(cref)) {
      attach(cref);
    }
  }

  void bump_var(int v) {
    if ((activity_[v] += var_inc_) > 1e100) {
      for (double& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
  }

  void bump_clause(std::uint32_t cref) {
    const float a = clause_activity(cref) + static_cast<float>(clause_inc_);
    set_clause_activity(cref, a);
    if (a > 1e20f) {
      for (std::uint32_t c : learnts_) set_clause_activity(c, clause_activity(c) * 1e-20f);
      clause_inc_ *= 1e-20;
    }
  }

  static double luby(double y, std::uint64_t x) {
    std::uint64_t size = 1;
    int seq = 0;
    while (size < x + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    while (size - 1 != x) {
      size = (size - 1) >> 1;
      --seq;
      x = x % size;
    }
    double r = 1.0;
    for (int k = 0; k < seq; ++k) r *= y;
    return r;
  }

  // Max-heap of variables by activity.
  bool heap_less(int a, int b) const { return activity_[a] > activity_[b]; }

  void heap_insert(int v) {
    heap_pos_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_pos_[v]);
  }

  void heap_up(int i) {
    const int v = heap_[i];
    while (i > 0) {
      const int parent = (i - 1) >> 1;
      if (!heap_less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      heap_pos_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }

  void heap_down(int i) {
    const int v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    for (;;) {
      int child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) ++child;
      if (!heap_less(heap_[child], v)) break;
      heap_[i] = heap_[child];
      heap_pos_[heap_[i]] = i;
      i = child;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }

  int heap_pop() {
    const int top = heap_[0];
    heap_pos_[top] = -1;
    const int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_pos_[last] = 0;
      heap_down(0);
    }
    return top;
  }

  static constexpr double kVarDecay = 0.95;
  static constexpr double kClauseDecay = 0.999;

  Rng rng_;
  bool ok_ = true;
  std::vector<std::int8_t> assigns_;
  std::vector<int> level_;
  std::vector<std::uint32_t> reason_;
  std::vector<char> polarity_;  // 1 = last assigned false
  std::vector<char> seen_;
  std::vector<double> activity_;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::uint32_t> arena_;
  std::vector<std::uint32_t> learnts_;
  std::vector<std::uint32_t> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::uint32_t binary_conflict_[2] = {0, 0};
  std::vector<std::uint32_t> tmp_, to_clear_, stack_, learnt_buf_;
  std::vector<std::uint64_t> level_stamp_;
  std::uint64_t lbd_stamp_ = 0;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  double max_learnts_ = 0.0;
  std::size_t num_original_long_ = 0;
  std::vector<char> model_;
  Stats stats_;
};

}  // namespace tdsm::sat

#endif  // TDSM_SAT_HPP_
