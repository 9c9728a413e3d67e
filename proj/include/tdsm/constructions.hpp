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

// Concrete instances and gadget constructions:
//  - the 9-vertex 3DSMI instance of size 3 with no stable matching;
//  - the single-anchor gadget (7 fresh vertices, 17 edges) that forces an
//    anchor x to either be absorbed by the gadget or keep a host edge of rank
//    below r'_x;
//  - the two-anchor gadget (8 fresh vertices) shared by anchors x and z;
//  - composition of a 3DSMI host of size n into a 3DSM instance of size 8n;
//  - the size-18 3DSM instance built from the 9-vertex host.
// Every builder records what it attached so that a stable matching of the
// composed instance can be projected back onto the host.

#ifndef TDSM_CONSTRUCTIONS_HPP_
#define TDSM_CONSTRUCTIONS_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdsm/model.hpp"
#include "tdsm/stability.hpp"

namespace tdsm {

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vertex v of the 9-vertex host: gender by v mod 3 (0 -> M, 1 -> F, 2 -> D),
// index v / 3 + 1.
inline AgentId appendix_agent(int v) {
  if (v < 0 || v > 8) throw ModelError("appendix vertex out of range");
  return {static_cast<Gender>(v % 3), static_cast<std::uint32_t>(v / 3 + 1)};
}

inline int appendix_vertex(AgentId a) {
  return static_cast<int>(a.index - 1) * 3 + static_cast<int>(slot(a.gender));
}

// Family written as the cycle (u, v, w) of host vertex numbers.
inline Family appendix_family(int u, int v, int w) {
  return make_family(appendix_agent(u), appendix_agent(v), appendix_agent(w));
}

inline Instance appendix_instance() {
  struct E { int from, to; std::uint32_t rank; };
  static constexpr E kEdges[] = {
      {0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 5, 1}, {5, 0, 1},
      {6, 4, 1}, {7, 8, 1}, {8, 0, 1}, {4, 8, 2}, {8, 6, 2}, {0, 7, 2},
      {1, 5, 2}, {5, 3, 2}, {3, 1, 2}, {4, 2, 3},
  };
  Instance inst(3);
  for (const E& e : kEdges) inst.add_edge(appendix_agent(e.from), appendix_agent(e.to), e.rank);
  return inst;
}

enum class GadgetKind { kLemma1, kLemma2 };

// kWithoutTE drops (t,e) and ranks (t,s) first. Not used by the compositions.
enum class Lemma1Variant { kStandard, kWithoutTE };

// kCaption: (a,e)=3, (b,e)=3, (b,s)=4. kFigure: (b,s)=3 and (b,e)=4, so
// b's ranks stay {1..4}.
enum class Lemma2Variant { kCaption, kFigure };

// One edge of a gadget pattern between named roles ("x", "a", ...).
struct PatternEdge {
  std::string from;
  std::string to;
  std::uint32_t rank = 0;

  friend auto operator<=>(const PatternEdge&, const PatternEdge&) = default;
};

inline std::vector<PatternEdge> lemma1_pattern(std::uint32_t r_prime,
                                               Lemma1Variant variant = Lemma1Variant::kStandard) {
  std::vector<PatternEdge> p = {
      {"e", "c", 1}, {"c", "a", 1}, {"d", "a", 1}, {"a", "x", 1}, {"b", "x", 1},
      {"s", "d", 1}, {"e", "d", 2}, {"c", "b", 2}, {"d", "b", 2}, {"a", "e", 2},
      {"b", "e", 2}, {"b", "s", 3}, {"d", "t", 3}, {"x", "c", r_prime},
      {"x", "d", r_prime + 1},
  };
  if (variant == Lemma1Variant::kStandard) {
    p.push_back({"t", "e", 1});
    p.push_back({"t", "s", 2});
  } else {
    p.push_back({"t", "s", 1});
  }
  std::sort(p.begin(), p.end());
  return p;
}

inline std::vector<PatternEdge> lemma2_pattern(std::uint32_t r_prime_x, std::uint32_t r_prime_z,
                                               Lemma2Variant variant = Lemma2Variant::kCaption) {
  const bool caption = variant == Lemma2Variant::kCaption;
  std::vector<PatternEdge> p = {
      {"e", "c", 1}, {"c", "a", 1}, {"d", "a", 1}, {"a", "x", 1}, {"b", "x", 1},
      {"t", "e", 1}, {"s", "d", 1}, {"f", "e", 1}, {"t", "s", 2}, {"e", "d", 2},
      {"c", "b", 2}, {"d", "b", 2}, {"a", "z", 2}, {"b", "z", 2}, {"a", "e", 3},
      {"b", "e", caption ? 3u : 4u}, {"d", "t", 3}, {"c", "f", 3},
      {"b", "s", caption ? 4u : 3u},
      {"x", "c", r_prime_x}, {"x", "d", r_prime_x + 1},
      {"z", "c", r_prime_z}, {"z", "d", r_prime_z + 1},
  };
  std::sort(p.begin(), p.end());
  return p;
}

struct RankedEdge {
  AgentId from;
  AgentId to;
  std::uint32_t rank = 0;

  friend auto operator<=>(const RankedEdge&, const RankedEdge&) = default;
};

struct GadgetAttachment {
  GadgetKind kind = GadgetKind::kLemma1;
  AgentId anchor_x;
  std::optional<AgentId> anchor_z;
  // Role name -> fresh agent, in creation order.
  std::vector<std::pair<std::string, AgentId>> fresh;
  std::uint32_t r_prime_x = 0;
  std::optional<std::uint32_t> r_prime_z;
  std::vector<RankedEdge> edges;
  Lemma1Variant lemma1_variant = Lemma1Variant::kStandard;
  Lemma2Variant lemma2_variant = Lemma2Variant::kCaption;

  AgentId role(std::string_view name) const {
    if (name == "x") return anchor_x;
    if (name == "z" && anchor_z) return *anchor_z;
    for (const auto& [r, id] : fresh) {
      if (r == name) return id;
    }
    throw ModelError("gadget has no role '" + std::string(name) + "'");
  }

  // Label used in traces, e.g. "c_M1" or "f_F1F2".
  std::string label(std::string_view role_name) const {
    std::string out = std::string(role_name) + "_" + to_string(anchor_x);
    if (anchor_z) out += to_string(*anchor_z);
    return out;
  }
};

namespace detail {

// Gender of each role given the gender of the anchor.
inline Gender role_gender(std::string_view role, Gender anchor) {
  if (role == "x" || role == "z" || role == "e" || role == "s") return anchor;
  if (role == "c" || role == "d") return succ(anchor);
  return succ(succ(anchor));  // a, b, t, f
}

inline void check_anchor_ranks(const Instance& inst, AgentId x, std::uint32_t r_prime) {
  if (r_prime == 0) throw ConstructionError("r' must be positive at " + to_string(x));
  for (const Edge& e : inst.edges(x)) {
    if (e.rank >= r_prime) {
      throw ConstructionError("rank collision at " + to_string(x) + ": existing rank " +
                              std::to_string(e.rank) + " >= r' = " + std::to_string(r_prime));
    }
  }
}

inline GadgetAttachment attach_pattern(Instance& inst, GadgetAttachment att,
                                       std::span<const std::string_view> roles,
                                       const std::vector<PatternEdge>& pattern) {
  const Gender g = att.anchor_x.gender;
  for (std::string_view role : roles) {
    att.fresh.emplace_back(std::string(role), inst.add_agent(role_gender(role, g)));
  }
  for (const PatternEdge& pe : pattern) {
    const RankedEdge e{att.role(pe.from), att.role(pe.to), pe.rank};
    inst.add_edge(e.from, e.to, e.rank);
    att.edges.push_back(e);
  }
  return att;
}

}  // namespace detail

inline std::pair<Instance, GadgetAttachment> attach_lemma1_gadget(
    const Instance& inst, AgentId x, std::uint32_t r_prime,
    Lemma1Variant variant = Lemma1Variant::kStandard) {
  if (!inst.contains(x)) throw ModelError("unknown agent " + to_string(x));
  detail::check_anchor_ranks(inst, x, r_prime);
  Instance out = inst;
  GadgetAttachment att;
  att.kind = GadgetKind::kLemma1;
  att.anchor_x = x;
  att.r_prime_x = r_prime;
  att.lemma1_variant = variant;
  static constexpr std::string_view kRoles[] = {"a", "b", "c", "d", "e", "s", "t"};
  att = detail::attach_pattern(out, std::move(att), kRoles, lemma1_pattern(r_prime, variant));
  return {std::move(out), std::move(att)};
}

inline std::pair<Instance, GadgetAttachment> attach_lemma2_gadget(
    const Instance& inst, AgentId x, AgentId z, std::uint32_t r_prime_x,
    std::uint32_t r_prime_z, Lemma2Variant variant = Lemma2Variant::kCaption) {
  if (!inst.contains(x)) throw ModelError("unknown agent " + to_string(x));
  if (!inst.contains(z)) throw ModelError("unknown agent " + to_string(z));
  if (x.gender != z.gender) {
    throw ConstructionError("gender mismatch between anchors " + to_string(x) + " and " +
                            to_string(z));
  }
  if (x == z) throw ConstructionError("anchors must differ");
  detail::check_anchor_ranks(inst, x, r_prime_x);
  detail::check_anchor_ranks(inst, z, r_prime_z);
  Instance out = inst;
  GadgetAttachment att;
  att.kind = GadgetKind::kLemma2;
  att.anchor_x = x;
  att.anchor_z = z;
  att.r_prime_x = r_prime_x;
  att.r_prime_z = r_prime_z;
  att.lemma2_variant = variant;
  static constexpr std::string_view kRoles[] = {"a", "b", "c", "d", "e", "s", "t", "f"};
  att = detail::attach_pattern(out, std::move(att), kRoles,
                               lemma2_pattern(r_prime_x, r_prime_z, variant));
  return {std::move(out), std::move(att)};
}

struct ConstructionTrace {
  std::string host_id;
  Instance host;
  std::vector<GadgetAttachment> attachments;
  CompletionPolicy policy = CompletionPolicy::kLexicographic;
  std::uint64_t seed = 0;
};

// Re-applies the recorded attachments to trace.host and completes ranks.
inline Instance replay(const ConstructionTrace& trace) {
  Instance g = trace.host;
  for (const GadgetAttachment& att : trace.attachments) {
    if (att.kind == GadgetKind::kLemma1) {
      g = attach_lemma1_gadget(g, att.anchor_x, att.r_prime_x, att.lemma1_variant).first;
    } else {
      g = attach_lemma2_gadget(g, att.anchor_x, *att.anchor_z, att.r_prime_x, *att.r_prime_z,
                               att.lemma2_variant)
              .first;
    }
  }
  return complete_instance(g, trace.policy, trace.seed);
}

// One gadget per host vertex with r'_x = rho_H(x) + 1, then rank completion.
// The result is a complete instance of size 8n.
inline std::pair<Instance, ConstructionTrace> theorem1_compose(
    const Instance& host, CompletionPolicy policy, std::uint64_t seed,
    std::string host_id = "host") {
  if (!validate(host).ok()) throw ConstructionError("host instance does not validate");
  ConstructionTrace trace{std::move(host_id), host, {}, policy, seed};
  Instance g = host;
  for_each_agent(host, [&](AgentId x) {
    if (host.out_degree(x) == 0) {
      throw ConstructionError("host agent " + to_string(x) + " is isolated (rho undefined)");
    }
    auto [next, att] = attach_lemma1_gadget(g, x, rho(host, x) + 1);
    g = std::move(next);
    trace.attachments.push_back(std::move(att));
  });
  return {complete_instance(g, policy, seed), std::move(trace)};
}

// The size-18 instance: single-anchor gadgets at host vertices 0, 2, 7 and
// two-anchor gadgets at (1,4), (3,6), (5,8), all with r' = rho + 1.
inline std::pair<Instance, ConstructionTrace> theorem2_instance(
    CompletionPolicy policy, std::uint64_t seed,
    Lemma2Variant variant = Lemma2Variant::kCaption) {
  const Instance host = appendix_instance();
  ConstructionTrace trace{"appendix", host, {}, policy, seed};
  Instance g = host;
  for (int v : {0, 2, 7}) {
    const AgentId x = appendix_agent(v);
    auto [next, att] = attach_lemma1_gadget(g, x, rho(host, x) + 1);
    g = std::move(next);
    trace.attachments.push_back(std::move(att));
  }
  for (auto [u, w] : {std::pair{1, 4}, std::pair{3, 6}, std::pair{5, 8}}) {
    const AgentId x = appendix_agent(u);
    const AgentId z = appendix_agent(w);
    auto [next, att] =
        attach_lemma2_gadget(g, x, z, rho(host, x) + 1, rho(host, z) + 1, variant);
    g = std::move(next);
    trace.attachments.push_back(std::move(att));
  }
  return {complete_instance(g, policy, seed), std::move(trace)};
}

inline std::string serialize_trace(const ConstructionTrace& trace) {
  std::ostringstream os;
  os << "# trace host=" << trace.host_id << " policy=" << to_string(trace.policy)
     << " seed=" << trace.seed << '\n';
  for (const GadgetAttachment& att : trace.attachments) {
    os << "# attach " << (att.kind == GadgetKind::kLemma1 ? "single" : "double")
       << " x=" << to_string(att.anchor_x) << " r'x=" << att.r_prime_x;
    if (att.anchor_z) os << " z=" << to_string(*att.anchor_z) << " r'z=" << *att.r_prime_z;
    if (att.kind == GadgetKind::kLemma1 && att.lemma1_variant == Lemma1Variant::kWithoutTE) {
      os << " variant=without-te";
    }
    if (att.kind == GadgetKind::kLemma2 && att.lemma2_variant == Lemma2Variant::kFigure) {
      os << " variant=figure";
    }
    for (const auto& [role, id] : att.fresh) os << ' ' << att.label(role) << '=' << to_string(id);
    os << '\n';
  }
  return os.str();
}

class ProjectionError : public std::runtime_error {
 public:
  ProjectionError(AgentId anchor, const std::string& what)
      : std::runtime_error("projection failed at " + to_string(anchor) + ": " + what),
        anchor_(anchor) {}
  AgentId anchor() const { return anchor_; }

 private:
  AgentId anchor_;
};

// Restricts a matching of the composed instance to the host. A host vertex
// absorbed by its gadget (mu(x) in {c,d} and mu(mu(x)) in {a,b,t}, or
// {a,b,f,t} for a two-anchor gadget) becomes single; otherwise its family
// must consist of host vertices and host edges and is kept.
inline Matching project_matching(const Instance& composed, const Matching& mu_g,
                                 const ConstructionTrace& trace) {
  for (const Family& f : mu_g.families()) {
    if (!is_family_of(composed, f)) {
      throw ModelError("family " + to_string(f) + " is not a 3-cycle of the composed instance");
    }
  }
  const Instance& host = trace.host;
  auto is_host = [&](AgentId a) { return host.contains(a); };

  std::set<AgentId> absorbed;
  for (const GadgetAttachment& att : trace.attachments) {
    const std::array<AgentId, 2> cd = {att.role("c"), att.role("d")};
    std::vector<AgentId> tails = {att.role("a"), att.role("b"), att.role("t")};
    if (att.kind == GadgetKind::kLemma2) tails.push_back(att.role("f"));
    std::vector<AgentId> anchors = {att.anchor_x};
    if (att.anchor_z) anchors.push_back(*att.anchor_z);
    for (AgentId x : anchors) {
      const AgentId y = mu(mu_g, x);
      if (std::find(cd.begin(), cd.end(), y) != cd.end() &&
          std::find(tails.begin(), tails.end(), mu(mu_g, y)) != tails.end()) {
        absorbed.insert(x);
      }
    }
  }

  std::vector<Family> kept;
  for (const Family& f : mu_g.families()) {
    const auto ms = f.members();
    if (std::all_of(ms.begin(), ms.end(), is_host) && is_family_of(host, f)) kept.push_back(f);
  }
  std::set<AgentId> covered;
  for (const Family& f : kept) {
    for (AgentId a : f.members()) covered.insert(a);
  }
  for_each_agent(host, [&](AgentId x) {
    const bool a = absorbed.count(x) > 0;
    const bool b = covered.count(x) > 0;
    if (a == b) {
      throw ProjectionError(x, a ? "vertex both absorbed and matched inside the host"
                                 : "neither absorbed by its gadget nor matched along host edges");
    }
  });
  return Matching(host, std::move(kept));
}

}  // namespace tdsm

#endif  // TDSM_CONSTRUCTIONS_HPP_
