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

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tdsm/constructions.hpp"
#include "tdsm/engines.hpp"
#include "tdsm/experiments.hpp"

namespace tdsm {
namespace {

std::set<oracle::RawMatching> as_set(const std::vector<Matching>& ms) {
  std::set<oracle::RawMatching> out;
  for (const auto& m : ms) out.insert(oracle::from_matching(m));
  return out;
}

TEST(ExactEngines, AgreeWithDefinitionOracle) {
  std::mt19937_64 gen(2024);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + t % 3;
    const auto raw = oracle::random_raw(n, t % 4 == 0, gen);
    const Instance inst = oracle::to_instance(raw);
    const auto expected = oracle::stable_matchings(raw);
    const std::set<oracle::RawMatching> expected_set(expected.begin(), expected.end());

    EXPECT_EQ(as_set(solve_brute(inst)), expected_set);
    EXPECT_EQ(as_set(backtrack_all(inst)), expected_set);
    EXPECT_EQ(as_set(backtrack_all(inst, {~0ULL, false})), expected_set);
    EXPECT_EQ(as_set(enumerate_sat_models(inst)), expected_set);

    const bool exists = !expected.empty();
    for (const SolveResult& r : {brute_result(inst), solve_backtrack(inst), solve_with_sat(inst)}) {
      ASSERT_EQ(r.status == SolveStatus::kStable, exists) << r.engine;
      if (exists) {
        EXPECT_TRUE(oracle::blocking(raw, oracle::from_matching(*r.matching)).empty());
      }
    }
  }
}

TEST(ExactEngines, AppendixHasNoStableMatching) {
  const Instance inst = appendix_instance();
  EXPECT_EQ(count_stable(inst), 0u);
  EXPECT_EQ(solve_backtrack(inst).status, SolveStatus::kNoStableMatching);
  EXPECT_EQ(solve_with_sat(inst).status, SolveStatus::kNoStableMatching);
}

TEST(ExactEngines, BudgetsAndCapacity) {
  const Instance inst = random_instance(6, InstanceKind::kComplete, 8);
  EXPECT_THROW(solve_brute(inst, 10), CapacityError);
  EXPECT_EQ(solve_backtrack(inst, {1, true}).status, SolveStatus::kTimeout);
}

TEST(Cnf, CompleteInstanceLayout) {
  for (std::uint32_t n : {2u, 3u, 4u}) {
    const Instance inst = random_instance(n, InstanceKind::kComplete, n);
    const CnfProblem cnf = encode_cnf(inst);
    ASSERT_EQ(cnf.num_vars, static_cast<int>(n * n * n));
    for (std::uint32_t i = 1; i <= n; ++i)
      for (std::uint32_t j = 1; j <= n; ++j)
        for (std::uint32_t k = 1; k <= n; ++k) {
          EXPECT_EQ(cnf.var_of({i, j, k}), static_cast<int>(((i - 1) * n + (j - 1)) * n + (k - 1) + 1));
        }
    const std::size_t per_agent = n * n;
    const std::size_t amo = 3 * n * (per_agent * (per_agent - 1) / 2);
    EXPECT_EQ(cnf.num_stability_clauses, n * n * n);
    EXPECT_EQ(cnf.num_clauses, 3 * n + amo + n * n * n);
  }
}

TEST(Cnf, IncompleteInstanceHasNoCoverClauses) {
  const Instance inst = appendix_instance();
  const CnfProblem cnf = encode_cnf(inst);
  EXPECT_EQ(cnf.num_vars, 7);
  EXPECT_EQ(cnf.num_stability_clauses, 7u);
  std::size_t amo = 0;
  for_each_agent(inst, [&](AgentId a) {
    std::size_t k = 0;
    for (const Family& f : cnf.varmap) k += f.contains(a);
    amo += k * (k - 1) / 2;
  });
  EXPECT_EQ(cnf.num_clauses, amo + 7);
}

TEST(Cnf, DimacsHeaderAndComments) {
  const Instance inst = random_instance(2, InstanceKind::kComplete, 1);
  const CnfProblem cnf = encode_cnf(inst);
  std::ostringstream os;
  write_dimacs(cnf, os);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("c var 1 = M1 F1 D1\n", 0), 0u);
  EXPECT_NE(text.find("c var 8 = M2 F2 D2\n"), std::string::npos);
  EXPECT_NE(text.find("p cnf 8 " + std::to_string(cnf.num_clauses) + "\n"), std::string::npos);
  std::size_t zeros = 0;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    if (line.empty() || line[0] == 'c' || line[0] == 'p') continue;
    EXPECT_EQ(line.substr(line.size() - 2), " 0");
    ++zeros;
  }
  EXPECT_EQ(zeros, cnf.num_clauses);
}

TEST(Cnf, DecodeRejectsOverlapAndInstability) {
  const Instance inst = random_instance(2, InstanceKind::kComplete, 1);
  const CnfProblem cnf = encode_cnf(inst);
  std::vector<char> model(cnf.num_vars, 0);
  const int a = cnf.var_of({1, 1, 1}), b = cnf.var_of({1, 2, 2});
  ASSERT_GT(a, 0);
  ASSERT_GT(b, 0);
  model.at(a - 1) = 1;
  model.at(b - 1) = 1;
  EXPECT_THROW(decode_model(inst, cnf, model), DecodeError);
  EXPECT_THROW(decode_model(inst, cnf, std::vector<char>(cnf.num_vars, 0)), DecodeError);
}

TEST(LocalSearch, SolvesRandomCompleteInstances) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Instance inst = random_instance(8, InstanceKind::kComplete, s);
    const SolveResult r = local_search(inst, {200000, 20000, s});
    ASSERT_EQ(r.status, SolveStatus::kStable) << s;
    EXPECT_TRUE(is_stable(inst, *r.matching));
    EXPECT_EQ(r.matching->size(), 8u);
  }
}

TEST(LocalSearch, DeterministicPerSeed) {
  const auto inst = theorem2_instance(CompletionPolicy::kLexicographic, 0).first;
  const SolveResult a = local_search(inst, {3000, 1000, 42});
  const SolveResult b = local_search(inst, {3000, 1000, 42});
  EXPECT_EQ(a.status, SolveStatus::kTimeout);
  EXPECT_GE(a.blocking_count, 1u);
  EXPECT_EQ(a.blocking_count, b.blocking_count);
  EXPECT_EQ(*a.matching, *b.matching);
  EXPECT_EQ(a.stats.iterations, 3000u);
  EXPECT_EQ(blocking_triples(inst, *a.matching).size(), a.blocking_count);
}

TEST(LocalSearch, RandomRepairAlsoWorks) {
  const Instance inst = random_instance(6, InstanceKind::kComplete, 3);
  LocalSearchParams p{200000, 20000, 9, false};
  EXPECT_EQ(local_search(inst, p).status, SolveStatus::kStable);
}

TEST(LocalSearch, RejectsBadInput) {
  EXPECT_THROW(local_search(appendix_instance(), {}), ModelError);
  const Instance inst = random_instance(3, InstanceKind::kComplete, 0);
  EXPECT_THROW(local_search(inst, {0, 1, 1}), std::invalid_argument);
  EXPECT_THROW(local_search(inst, {1, 0, 1}), std::invalid_argument);
}

}  // namespace
}  // namespace tdsm
