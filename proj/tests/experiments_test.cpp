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

#include <set>

#include "tdsm/experiments.hpp"

namespace tdsm {
namespace {

TEST(RandomInstance, CompleteAndSeeded) {
  const Instance a = random_instance(7, InstanceKind::kComplete, 12);
  EXPECT_TRUE(a.complete());
  EXPECT_TRUE(validate(a).ok());
  EXPECT_EQ(a, random_instance(7, InstanceKind::kComplete, 12));
  EXPECT_NE(a, random_instance(7, InstanceKind::kComplete, 13));
  EXPECT_THROW(random_instance(0, InstanceKind::kComplete, 0), std::invalid_argument);
}

TEST(RandomInstance, FirstChoicesAreUniform) {
  // Chi-square over the first choice of M1 and of D3; 4 degrees of freedom,
  // 18.47 is the 0.999 quantile.
  const std::uint32_t n = 5, trials = 5000;
  std::array<std::array<double, 5>, 2> counts{};
  for (std::uint32_t s = 0; s < trials; ++s) {
    const Instance inst = random_instance(n, InstanceKind::kComplete, derive_seed(77, s));
    counts[0][inst.edges({Gender::kMan, 1})[0].target - 1] += 1;
    counts[1][inst.edges({Gender::kDog, 3})[0].target - 1] += 1;
  }
  for (const auto& c : counts) {
    double chi2 = 0;
    const double expected = static_cast<double>(trials) / n;
    for (double o : c) chi2 += (o - expected) * (o - expected) / expected;
    EXPECT_LT(chi2, 18.47);
  }
}

TEST(RandomInstance, IncompleteLengthsCoverRange) {
  std::set<std::size_t> lengths;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Instance inst = random_instance(3, InstanceKind::kIncomplete, s);
    EXPECT_TRUE(validate(inst).ok());
    lengths.insert(inst.out_degree({Gender::kWoman, 2}));
  }
  EXPECT_EQ(lengths, (std::set<std::size_t>{0, 1, 2, 3}));
}

TEST(SmallCensus, RawCounts) {
  EXPECT_EQ(ordered_subset_count(1), 2u);
  EXPECT_EQ(ordered_subset_count(2), 5u);
  EXPECT_EQ(ordered_subset_count(3), 16u);
  // Three agents with two choices each at n=1; six with five at n=2.
  std::set<std::string> distinct;
  for (std::uint64_t c = 0; c < 8; ++c) distinct.insert(serialize_instance(small_3dsmi_instance(1, c)));
  EXPECT_EQ(distinct.size(), 8u);
}

TEST(SmallCensus, SizeOneAllSolvable) {
  const CensusReport r = exhaustive_small_3dsmi(1);
  EXPECT_EQ(r.trials, 8u);
  EXPECT_EQ(r.solvable, 8u);
  EXPECT_TRUE(r.conjecture_holds());
  EXPECT_THROW(exhaustive_small_3dsmi(3), CapacityError);
}

TEST(Sampling, ReproducibleAcrossWorkerCounts) {
  const CensusReport a = sample_solvability(3, 300, EngineKind::kSat, 5, {}, 1);
  const CensusReport b = sample_solvability(3, 300, EngineKind::kSat, 5, {}, 3);
  EXPECT_EQ(serialize_report(a), serialize_report(b));
  EXPECT_EQ(a.solvable, 300u);
  const std::string text = serialize_report(a);
  EXPECT_EQ(text.rfind("# seed: 5\n", 0), 0u);
  EXPECT_NE(text.find("verdict: conjecture holds at this n\n"), std::string::npos);
}

TEST(Sampling, LocalEngineCountsMissesAsUnresolved) {
  EngineOptions opt;
  opt.local = {1, 1, 0};
  const CensusReport r = sample_solvability(6, 20, EngineKind::kLocal, 1, opt);
  EXPECT_EQ(r.solvable + r.unresolved, 20u);
  EXPECT_TRUE(r.witnesses.empty());
  EXPECT_GT(r.unresolved, 0u);
  EXPECT_FALSE(r.conjecture_holds());
}

TEST(Appendix, CaseAnalysisReproduced) {
  const AppendixReport r = verify_appendix();
  EXPECT_TRUE(r.passed()) << serialize_appendix_report(r);
  EXPECT_EQ(r.families.size(), 7u);
  EXPECT_EQ(r.noncomplementable.size(), 8u);
  EXPECT_EQ(r.complementable + r.noncomplementable.size(), r.total_matchings);
  EXPECT_EQ(appendix_name(appendix_family(4, 8, 6)), "(4,8,6)");
  const std::string text = serialize_appendix_report(r);
  EXPECT_NE(text.find("{(0,1,5),(2,3,4)} blocked by"), std::string::npos);
  EXPECT_NE(text.find("verdict: no stable matching\n"), std::string::npos);
}

TEST(Appendix, EnumeratedMatchingsAreDisjointFamilySets) {
  const Instance inst = appendix_instance();
  const auto all = enumerate_matchings(inst);
  std::set<std::vector<Family>> distinct;
  for (const auto& m : all) {
    distinct.insert(std::vector<Family>(m.families().begin(), m.families().end()));
  }
  EXPECT_EQ(distinct.size(), all.size());
  EXPECT_EQ(all.front().size(), 0u);
}

TEST(Counterexample, ExportRouteNeedsPath) {
  VerifyOptions opt;
  opt.route = VerifyRoute::kExport;
  EXPECT_THROW(verify_counterexample(Counterexample::kTheorem2, opt), std::invalid_argument);
}

}  // namespace
}  // namespace tdsm
