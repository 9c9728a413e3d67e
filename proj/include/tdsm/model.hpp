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

// Instances of three-sided stable matching with cyclic preferences: men rank
// women, women rank dogs, dogs rank men. An instance is a tripartite digraph
// whose out-edges at every agent carry ranks 1..k (1 = most preferred).
// Complete instances (every list has all n agents of the next gender) are
// 3DSM; anything else is 3DSMI and agents may stay single.

#ifndef TDSM_MODEL_HPP_
#define TDSM_MODEL_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tdsm/rng.hpp"

namespace tdsm {

enum class Gender : std::uint8_t { kMan = 0, kWoman = 1, kDog = 2 };

inline constexpr std::array<Gender, 3> kGenders = {Gender::kMan, Gender::kWoman,
                                                   Gender::kDog};

constexpr std::size_t slot(Gender g) { return static_cast<std::size_t>(g); }

// Men rank women, women rank dogs, dogs rank men.
constexpr Gender succ(Gender g) {
  return static_cast<Gender>((static_cast<int>(g) + 1) % 3);
}
constexpr Gender pred(Gender g) {
  return static_cast<Gender>((static_cast<int>(g) + 2) % 3);
}
constexpr char gender_letter(Gender g) { return "MFD"[slot(g)]; }

struct AgentId {
  Gender gender = Gender::kMan;
  std::uint32_t index = 0;  // 1-based within the gender class

  friend constexpr auto operator<=>(const AgentId&, const AgentId&) = default;
};

inline std::string to_string(AgentId a) {
  return gender_letter(a.gender) + std::to_string(a.index);
}

inline std::ostream& operator<<(std::ostream& os, AgentId a) {
  return os << to_string(a);
}

// "M3" -> {kMan, 3}. Returns nullopt for anything else.
inline std::optional<AgentId> parse_agent_token(std::string_view token) {
  if (token.size() < 2) return std::nullopt;
  AgentId id;
  switch (token[0]) {
    case 'M': id.gender = Gender::kMan; break;
    case 'F': id.gender = Gender::kWoman; break;
    case 'D': id.gender = Gender::kDog; break;
    default: return std::nullopt;
  }
  const char* first = token.data() + 1;
  const char* last = token.data() + token.size();
  if (*first == '0') return std::nullopt;
  auto [ptr, ec] = std::from_chars(first, last, id.index);
  if (ec != std::errc() || ptr != last || id.index == 0) return std::nullopt;
  return id;
}

// Misuse of the model: unknown agents, ill-gendered edges, undefined rho.
class ModelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Edge {
  std::uint32_t target = 0;  // index in the successor gender class
  std::uint32_t rank = 0;

  friend constexpr bool operator==(const Edge&, const Edge&) = default;
};

class Instance {
 public:
  Instance() = default;
  explicit Instance(std::uint32_t n) : Instance(std::array<std::uint32_t, 3>{n, n, n}) {}
  explicit Instance(std::array<std::uint32_t, 3> counts) : counts_(counts) {
    for (Gender g : kGenders) edges_[slot(g)].resize(counts_[slot(g)]);
    rebuild_lookup();
  }

  // Problem size: the largest gender class. Smaller classes are treated as
  // padded with isolated agents.
  std::uint32_t size() const {
    return std::max({counts_[0], counts_[1], counts_[2]});
  }
  std::uint32_t count(Gender g) const { return counts_[slot(g)]; }
  std::array<std::uint32_t, 3> counts() const { return counts_; }
  std::uint32_t vertex_count() const { return counts_[0] + counts_[1] + counts_[2]; }

  bool contains(AgentId a) const {
    return a.index >= 1 && a.index <= counts_[slot(a.gender)];
  }

  bool complete() const {
    const std::uint32_t n = size();
    for (Gender g : kGenders) {
      if (count(g) != n) return false;
      for (const auto& row : edges_[slot(g)]) {
        if (row.size() != n) return false;
      }
    }
    return true;
  }

  // Out-edges ordered by rank (then target index for malformed duplicates).
  std::span<const Edge> edges(AgentId v) const {
    check_agent(v);
    return edges_[slot(v.gender)][v.index - 1];
  }

  std::uint32_t out_degree(AgentId v) const {
    return static_cast<std::uint32_t>(edges(v).size());
  }

  std::vector<AgentId> preferences(AgentId v) const {
    std::vector<AgentId> out;
    for (const Edge& e : edges(v)) out.push_back({succ(v.gender), e.target});
    return out;
  }

  std::optional<std::uint32_t> rank(AgentId v, AgentId w) const {
    check_agent(v);
    check_agent(w);
    if (w.gender != succ(v.gender)) return std::nullopt;
    const std::uint32_t r = rank_or_zero(v.gender, v.index, w.index);
    if (r == 0) return std::nullopt;
    return r;
  }

  // Unchecked hot-path lookup on 1-based indices; 0 means no edge.
  std::uint32_t rank_or_zero(Gender g, std::uint32_t from, std::uint32_t to) const {
    return lookup_[slot(g)][(from - 1) * counts_[slot(succ(g))] + (to - 1)];
  }

  AgentId add_agent(Gender g) {
    ++counts_[slot(g)];
    edges_[slot(g)].emplace_back();
    rebuild_lookup();
    return {g, counts_[slot(g)]};
  }

  // Replaces v's list; targets[k] receives rank k+1.
  void set_preferences(AgentId v, std::span<const AgentId> targets) {
    check_agent(v);
    std::vector<Edge> row;
    row.reserve(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
      check_target(v, targets[k]);
      row.push_back({targets[k].index, static_cast<std::uint32_t>(k + 1)});
    }
    edges_[slot(v.gender)][v.index - 1] = std::move(row);
    rebuild_row(v);
  }

  void add_edge(AgentId v, AgentId w, std::uint32_t rank) {
    check_agent(v);
    check_target(v, w);
    if (rank == 0) throw ModelError("rank must be positive on " + to_string(v));
    auto& row = edges_[slot(v.gender)][v.index - 1];
    const Edge e{w.index, rank};
    row.insert(std::upper_bound(row.begin(), row.end(), e,
                                [](const Edge& a, const Edge& b) {
                                  return a.rank != b.rank ? a.rank < b.rank
                                                          : a.target < b.target;
                                }),
               e);
    rebuild_row(v);
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.counts_ == b.counts_ && a.edges_ == b.edges_;
  }

 private:
  void check_agent(AgentId v) const {
    if (!contains(v)) throw ModelError("unknown agent " + to_string(v));
  }

  void check_target(AgentId v, AgentId w) const {
    if (w.gender != succ(v.gender)) {
      throw ModelError("edge " + to_string(v) + " -> " + to_string(w) +
                       " does not point to the successor gender");
    }
    check_agent(w);
  }

  void rebuild_row(AgentId v) {
    const std::size_t g = slot(v.gender);
    const std::uint32_t width = counts_[slot(succ(v.gender))];
    auto* row = lookup_[g].data() + static_cast<std::size_t>(v.index - 1) * width;
    std::fill(row, row + width, 0u);
    for (const Edge& e : edges_[g][v.index - 1]) row[e.target - 1] = e.rank;
  }

  void rebuild_lookup() {
    for (Gender g : kGenders) {
      const std::size_t rows = counts_[slot(g)];
      const std::size_t width = counts_[slot(succ(g))];
      lookup_[slot(g)].assign(rows * width, 0u);
      for (std::uint32_t i = 1; i <= rows; ++i) rebuild_row({g, i});
    }
  }

  std::array<std::uint32_t, 3> counts_{};
  std::array<std::vector<std::vector<Edge>>, 3> edges_;
  std::array<std::vector<std::uint32_t>, 3> lookup_;
};

// Visits every agent in canonical order: M1..Mn, F1..Fn, D1..Dn.
template <typename Fn>
void for_each_agent(const Instance& inst, Fn&& fn) {
  for (Gender g : kGenders) {
    for (std::uint32_t i = 1; i <= inst.count(g); ++i) fn(AgentId{g, i});
  }
}

inline std::optional<std::uint32_t> rank(const Instance& inst, AgentId v, AgentId w) {
  return inst.rank(v, w);
}

// Largest rank among v's out-edges.
inline std::uint32_t rho(const Instance& inst, AgentId v) {
  const auto edges = inst.edges(v);
  if (edges.empty()) throw ModelError("rho undefined for isolated agent " + to_string(v));
  std::uint32_t best = 0;
  for (const Edge& e : edges) best = std::max(best, e.rank);
  return best;
}

struct Violation {
  AgentId agent;
  std::string what;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate(const Instance& inst) {
  ValidationReport report;
  for_each_agent(inst, [&](AgentId v) {
    const auto edges = inst.edges(v);
    std::vector<std::uint32_t> targets, ranks;
    for (const Edge& e : edges) {
      targets.push_back(e.target);
      ranks.push_back(e.rank);
    }
    std::sort(targets.begin(), targets.end());
    if (std::adjacent_find(targets.begin(), targets.end()) != targets.end()) {
      report.violations.push_back({v, "duplicate target"});
    }
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t k = 0; k < ranks.size(); ++k) {
      if (ranks[k] != k + 1) {
        report.violations.push_back({v, "rank set not {1..k}"});
        break;
      }
    }
  });
  return report;
}

enum class CompletionPolicy { kLexicographic, kSeededShuffle };

inline std::string_view to_string(CompletionPolicy p) {
  return p == CompletionPolicy::kLexicographic ? "lexicographic" : "shuffle";
}

// Pads every gender class to size() and appends each agent's missing targets
// at ranks k+1..n. Existing ranks are never touched.
inline Instance complete_instance(const Instance& inst, CompletionPolicy policy,
                                  std::uint64_t seed) {
  const std::uint32_t n = inst.size();
  Instance out(n);
  Rng rng(seed);
  for_each_agent(out, [&](AgentId v) {
    std::vector<AgentId> list;
    std::vector<char> present(n + 1, 0);
    if (inst.contains(v)) {
      list = inst.preferences(v);
      for (const AgentId& w : list) present[w.index] = 1;
    }
    std::vector<AgentId> missing;
    for (std::uint32_t j = 1; j <= n; ++j) {
      if (!present[j]) missing.push_back({succ(v.gender), j});
    }
    if (policy == CompletionPolicy::kSeededShuffle) {
      rng.shuffle(std::span<AgentId>(missing));
    }
    list.insert(list.end(), missing.begin(), missing.end());
    out.set_preferences(v, list);
  });
  return out;
}

// Text format:
//   3dsm <n> <complete|incomplete>
//   M1: F2 F1 ...        one line per agent, rank-1 target first
// Lines starting with '#' are comments.
inline std::string serialize_instance(const Instance& inst) {
  const std::uint32_t n = inst.size();
  std::ostringstream os;
  os << "3dsm " << n << ' ' << (inst.complete() ? "complete" : "incomplete") << '\n';
  for (Gender g : kGenders) {
    for (std::uint32_t i = 1; i <= n; ++i) {
      const AgentId v{g, i};
      os << to_string(v) << ':';
      if (inst.contains(v)) {
        for (const AgentId& w : inst.preferences(v)) os << ' ' << to_string(w);
      }
      os << '\n';
    }
  }
  return os.str();
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Yields (line number, content) for non-blank, non-comment lines.
inline std::vector<std::pair<std::size_t, std::string_view>> content_lines(
    std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') {
      out.emplace_back(line_no, line);
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

}  // namespace detail

inline Instance parse_instance(std::string_view text) {
  const auto lines = detail::content_lines(text);
  if (lines.empty()) throw ParseError(1, "missing header");
  const auto header = detail::split_ws(lines[0].second);
  std::uint32_t n = 0;
  bool complete = false;
  {
    bool good = header.size() == 3 && header[0] == "3dsm";
    if (good) {
      auto [ptr, ec] = std::from_chars(header[1].data(), header[1].data() + header[1].size(), n);
      good = ec == std::errc() && ptr == header[1].data() + header[1].size() && n >= 1;
    }
    if (good && header[2] == "complete") {
      complete = true;
    } else if (!good || header[2] != "incomplete") {
      throw ParseError(lines[0].first, "malformed header");
    }
  }

  Instance inst(n);
  std::vector<char> seen(3 * static_cast<std::size_t>(n), 0);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto [line_no, line] = lines[k];
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(line_no, "expected '<AGENT>:'");
    auto head = detail::split_ws(line.substr(0, colon));
    if (head.size() != 1) throw ParseError(line_no, "expected '<AGENT>:'");
    const auto agent = parse_agent_token(head[0]);
    if (!agent || !inst.contains(*agent)) {
      throw ParseError(line_no, "unknown agent token '" + std::string(head[0]) + "'");
    }
    char& mark = seen[slot(agent->gender) * n + agent->index - 1];
    if (mark) throw ParseError(line_no, "agent " + to_string(*agent) + " listed twice");
    mark = 1;

    std::vector<AgentId> targets;
    std::vector<char> used(n + 1, 0);
    for (std::string_view tok : detail::split_ws(line.substr(colon + 1))) {
      const auto t = parse_agent_token(tok);
      if (!t || !inst.contains(*t)) {
        throw ParseError(line_no, "unknown agent token '" + std::string(tok) + "'");
      }
      if (t->gender != succ(agent->gender)) {
        throw ParseError(line_no, "rank violation: " + to_string(*agent) + " cannot rank " +
                                      to_string(*t));
      }
      if (used[t->index]) {
        throw ParseError(line_no, "rank violation: duplicate target " + to_string(*t));
      }
      used[t->index] = 1;
      targets.push_back(*t);
    }
    if (complete && targets.size() != n) throw ParseError(line_no, "incomplete list");
    inst.set_preferences(*agent, targets);
  }
  for (Gender g : kGenders) {
    for (std::uint32_t i = 1; i <= n; ++i) {
      if (!seen[slot(g) * n + i - 1]) {
        throw ParseError(lines.back().first,
                         "missing agent " + to_string(AgentId{g, i}));
      }
    }
  }
  return inst;
}

}  // namespace tdsm

#endif  // TDSM_MODEL_HPP_
