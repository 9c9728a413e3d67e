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

// Families, matchings and (weak) stability. A family is a directed 3-cycle
// man -> woman -> dog -> man. A matching is a set of disjoint families; every
// agent outside it is single. A triple blocks a matching when each of its three
// members strictly prefers its edge in the triple to its current edge, a single
// agent's current rank being infinite.

#ifndef TDSM_STABILITY_HPP_
#define TDSM_STABILITY_HPP_

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tdsm/model.hpp"

namespace tdsm {

// Canonical form of a 3-cycle: rotations are the same family, so it is
// always stored starting at the man.
struct Family {
  std::uint32_t man = 0;
  std::uint32_t woman = 0;
  std::uint32_t dog = 0;

  AgentId member(Gender g) const {
    switch (g) {
      case Gender::kMan: return {g, man};
      case Gender::kWoman: return {g, woman};
      default: return {g, dog};
    }
  }
  std::array<AgentId, 3> members() const {
    return {AgentId{Gender::kMan, man}, AgentId{Gender::kWoman, woman},
            AgentId{Gender::kDog, dog}};
  }
  bool contains(AgentId a) const { return member(a.gender) == a; }

  friend constexpr auto operator<=>(const Family&, const Family&) = default;
};

// Builds a family from any rotation of the cycle (a, b, c).
inline Family make_family(AgentId a, AgentId b, AgentId c) {
  if (b.gender != succ(a.gender) || c.gender != succ(b.gender)) {
    throw ModelError(to_string(a) + " " + to_string(b) + " " + to_string(c) +
                     " is not a cyclically ordered triple");
  }
  Family f;
  for (AgentId x : {a, b, c}) {
    switch (x.gender) {
      case Gender::kMan: f.man = x.index; break;
      case Gender::kWoman: f.woman = x.index; break;
      case Gender::kDog: f.dog = x.index; break;
    }
  }
  return f;
}

inline std::string to_string(const Family& f) {
  return "M" + std::to_string(f.man) + " F" + std::to_string(f.woman) + " D" +
         std::to_string(f.dog);
}

inline std::ostream& operator<<(std::ostream& os, const Family& f) {
  return os << to_string(f);
}

inline bool is_family_of(const Instance& inst, const Family& f) {
  for (AgentId a : f.members()) {
    if (!inst.contains(a)) return false;
  }
  return inst.rank_or_zero(Gender::kMan, f.man, f.woman) != 0 &&
         inst.rank_or_zero(Gender::kWoman, f.woman, f.dog) != 0 &&
         inst.rank_or_zero(Gender::kDog, f.dog, f.man) != 0;
}

// R_mu(v): a finite rank, or infinity for a single agent. Infinity compares
// greater than every finite rank.
class Rank {
 public:
  static constexpr Rank finite(std::uint32_t r) { return Rank(r, false); }
  static constexpr Rank infinity() { return Rank(0, true); }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr std::uint32_t value() const { return value_; }

  friend constexpr bool operator==(const Rank&, const Rank&) = default;
  friend constexpr std::strong_ordering operator<=>(const Rank& a, const Rank& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
    return a.value_ <=> b.value_;
  }

 private:
  constexpr Rank(std::uint32_t v, bool inf) : value_(v), infinite_(inf) {}
  std::uint32_t value_;
  bool infinite_;
};

inline std::string to_string(Rank r) {
  return r.is_infinite() ? "inf" : std::to_string(r.value());
}

class Matching {
 public:
  Matching() = default;

  // Throws ModelError unless the families are pairwise disjoint 3-cycles of
  // the instance.
  Matching(const Instance& inst, std::vector<Family> families)
      : counts_(inst.counts()), families_(std::move(families)) {
    std::sort(families_.begin(), families_.end());
    for (Gender g : kGenders) slot_of_[slot(g)].assign(counts_[slot(g)], 0);
    for (std::size_t k = 0; k < families_.size(); ++k) {
      const Family& f = families_[k];
      if (!is_family_of(inst, f)) {
        throw ModelError("family " + to_string(f) + " is not a 3-cycle of the instance");
      }
      for (AgentId a : f.members()) {
        auto& s = slot_of_[slot(a.gender)][a.index - 1];
        if (s != 0) {
          throw ModelError("agent " + to_string(a) + " appears in two families");
        }
        s = static_cast<std::uint32_t>(k + 1);
      }
    }
  }

  std::span<const Family> families() const { return families_; }
  std::size_t size() const { return families_.size(); }
  std::array<std::uint32_t, 3> counts() const { return counts_; }

  bool covers(AgentId v) const {
    return v.index >= 1 && v.index <= counts_[slot(v.gender)];
  }

  // The family containing v, if any.
  std::optional<Family> family_of(AgentId v) const {
    if (!covers(v)) {
      if (families_.empty()) return std::nullopt;
      throw ModelError("unknown agent " + to_string(v));
    }
    const std::uint32_t s = slot_of_[slot(v.gender)][v.index - 1];
    if (s == 0) return std::nullopt;
    return families_[s - 1];
  }

  bool is_single(AgentId v) const { return !family_of(v).has_value(); }

  friend bool operator==(const Matching& a, const Matching& b) {
    return a.families_ == b.families_;
  }

 private:
  std::array<std::uint32_t, 3> counts_{};
  std::vector<Family> families_;
  std::array<std::vector<std::uint32_t>, 3> slot_of_;  // 1-based family slot, 0 = single
};

// v's successor-gender partner, or v itself when single.
inline AgentId mu(const Matching& m, AgentId v) {
  const auto f = m.family_of(v);
  if (!f) return v;
  return f->member(succ(v.gender));
}

inline Rank rank_of(const Instance& inst, const Matching& m, AgentId v) {
  const AgentId w = mu(m, v);
  if (w == v) return Rank::infinity();
  const auto r = inst.rank(v, w);
  if (!r) throw ModelError("matching uses missing edge " + to_string(v) + " -> " + to_string(w));
  return Rank::finite(*r);
}

// All directed 3-cycles in canonical (man, woman, dog) order.
inline std::vector<Family> enumerate_families(const Instance& inst) {
  std::vector<Family> out;
  for (std::uint32_t m = 1; m <= inst.count(Gender::kMan); ++m) {
    for (const Edge& mf : inst.edges({Gender::kMan, m})) {
      for (const Edge& fd : inst.edges({Gender::kWoman, mf.target})) {
        if (inst.rank_or_zero(Gender::kDog, fd.target, m) != 0) {
          out.push_back({m, mf.target, fd.target});
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct BlockingTriple {
  Family family;
  // r(m,f), r(f,d), r(d,m) on the triple's own edges.
  std::array<std::uint32_t, 3> ranks{};
  // R_mu of man, woman, dog.
  std::array<Rank, 3> current{Rank::infinity(), Rank::infinity(), Rank::infinity()};
};

// Current ranks of all agents under m, by gender slot and 0-based index.
struct CurrentRanks {
  std::array<std::vector<Rank>, 3> by_gender;

  Rank operator()(AgentId v) const { return by_gender[slot(v.gender)][v.index - 1]; }
};

inline CurrentRanks current_ranks(const Instance& inst, const Matching& m) {
  if (m.counts() != inst.counts() && m.size() > 0) {
    throw ModelError("matching belongs to an instance of different shape");
  }
  CurrentRanks cr;
  for (Gender g : kGenders) cr.by_gender[slot(g)].assign(inst.count(g), Rank::infinity());
  for (const Family& f : m.families()) {
    if (!is_family_of(inst, f)) {
      throw ModelError("matching references nonexistent edge in family " + to_string(f));
    }
    cr.by_gender[0][f.man - 1] = Rank::finite(inst.rank_or_zero(Gender::kMan, f.man, f.woman));
    cr.by_gender[1][f.woman - 1] = Rank::finite(inst.rank_or_zero(Gender::kWoman, f.woman, f.dog));
    cr.by_gender[2][f.dog - 1] = Rank::finite(inst.rank_or_zero(Gender::kDog, f.dog, f.man));
  }
  return cr;
}

// Blocking triples among the given candidate families (normally
// enumerate_families(inst)), in candidate order.
inline std::vector<BlockingTriple> blocking_triples(const Instance& inst, const Matching& m,
                                                    std::span<const Family> candidates) {
  const CurrentRanks cr = current_ranks(inst, m);
  std::vector<BlockingTriple> out;
  for (const Family& t : candidates) {
    const std::array<std::uint32_t, 3> r = {
        inst.rank_or_zero(Gender::kMan, t.man, t.woman),
        inst.rank_or_zero(Gender::kWoman, t.woman, t.dog),
        inst.rank_or_zero(Gender::kDog, t.dog, t.man)};
    const std::array<Rank, 3> now = {cr.by_gender[0][t.man - 1], cr.by_gender[1][t.woman - 1],
                                     cr.by_gender[2][t.dog - 1]};
    if (Rank::finite(r[0]) < now[0] && Rank::finite(r[1]) < now[1] &&
        Rank::finite(r[2]) < now[2]) {
      out.push_back({t, r, now});
    }
  }
  return out;
}

inline std::vector<BlockingTriple> blocking_triples(const Instance& inst, const Matching& m) {
  const auto families = enumerate_families(inst);
  return blocking_triples(inst, m, families);
}

inline bool is_stable(const Instance& inst, const Matching& m) {
  return blocking_triples(inst, m).empty();
}

// A family whose three members are all single, if one exists.
inline std::optional<Family> is_complementable(const Instance& inst, const Matching& m) {
  for (const Family& f : enumerate_families(inst)) {
    const auto ms = f.members();
    if (std::all_of(ms.begin(), ms.end(), [&](AgentId a) { return m.is_single(a); })) {
      return f;
    }
  }
  return std::nullopt;
}

// Matching text format: one "M<i> F<j> D<k>" line per family; '#' comments.
inline std::string serialize_matching(const Matching& m) {
  std::string out;
  for (const Family& f : m.families()) out += to_string(f) + "\n";
  return out;
}

inline Matching parse_matching(const Instance& inst, std::string_view text) {
  std::vector<Family> families;
  for (const auto& [line_no, line] : detail::content_lines(text)) {
    const auto toks = detail::split_ws(line);
    if (toks.size() != 3) throw ParseError(line_no, "expected 'M<i> F<j> D<k>'");
    std::array<AgentId, 3> ids;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto a = parse_agent_token(toks[k]);
      if (!a || !inst.contains(*a)) {
        throw ParseError(line_no, "unknown agent token '" + std::string(toks[k]) + "'");
      }
      ids[k] = *a;
    }
    try {
      families.push_back(make_family(ids[0], ids[1], ids[2]));
    } catch (const ModelError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    return Matching(inst, std::move(families));
  } catch (const ModelError& e) {
    throw ParseError(0, e.what());
  }
}

}  // namespace tdsm

#endif  // TDSM_STABILITY_HPP_
