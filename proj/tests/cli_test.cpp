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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tdsm/cli.hpp"

namespace tdsm::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("tdsm_cli_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

TEST(Cli, GenAppendixRoundTrips) {
  const Outcome o = call({"gen", "appendix"});
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("3dsm 3 incomplete\nM1: F1 F3\n", 0), 0u);
}

TEST(Cli, GenTheorem2WithTrace) {
  const Outcome o = call({"gen", "theorem2", "--trace"});
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("# trace host=appendix", 0), 0u);
  EXPECT_NE(o.out.find("3dsm 18 complete\n"), std::string::npos);
  EXPECT_NE(o.out.find("# attach double x=F1 r'x=3 z=F2 r'z=4"), std::string::npos);
}

TEST(Cli, RandomnessNeedsSeed) {
  EXPECT_EQ(call({"gen", "random", "-n", "3"}).code, 2);
  EXPECT_EQ(call({"gen", "theorem2", "--policy", "shuffle"}).code, 2);
  const Outcome a = call({"gen", "random", "-n", "3", "--seed", "4"});
  const Outcome b = call({"gen", "random", "-n", "3", "--seed", "4"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, CheckReportsBlockingTriples) {
  const std::string inst = temp_file("appendix.txt", call({"gen", "appendix"}).out);
  const Outcome empty = call({"check", inst, "-"}, "");
  EXPECT_EQ(empty.code, 0);
  EXPECT_EQ(std::count(empty.out.begin(), empty.out.end(), '\n'), 7);
  const Outcome item4 = call({"check", inst, "-", "--expect", "unstable"}, "M1 F3 D3\nF1 D2 M2\n");
  EXPECT_EQ(item4.code, 0);
  EXPECT_NE(item4.out.find("M2 F2 D1\n"), std::string::npos);
  EXPECT_EQ(call({"check", inst, "-", "--expect", "stable"}, "M1 F3 D3\n").code, 1);
  EXPECT_EQ(call({"check", inst, "-"}, "M1 F2 D1\n").code, 2);
}

TEST(Cli, SolveEngines) {
  const std::string one = temp_file("one.txt", "3dsm 1 complete\nM1: F1\nF1: D1\nD1: M1\n");
  const Outcome brute = call({"solve", one, "--engine", "brute"});
  EXPECT_EQ(brute.code, 0);
  EXPECT_EQ(brute.out, "STABLE\nM1 F1 D1\n");
  const std::string app = temp_file("appendix2.txt", call({"gen", "appendix"}).out);
  for (const char* e : {"brute", "backtrack", "sat"}) {
    const Outcome o = call({"solve", app, "--engine", e});
    EXPECT_EQ(o.code, 1) << e;
    EXPECT_EQ(o.out, "NO_STABLE_MATCHING\n");
  }
  EXPECT_EQ(call({"solve", one, "--engine", "local"}).code, 2);
  EXPECT_EQ(call({"solve", one, "--engine", "local", "--seed", "1"}).code, 0);
}

TEST(Cli, SolveLocalOnCounterexampleTimesOut) {
  const std::string t2 = call({"gen", "theorem2"}).out;
  const Outcome o = call({"solve", "-", "--engine", "local", "--iters", "2000", "--seed", "3"}, t2);
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(o.out.rfind("TIMEOUT blocking=", 0), 0u);
  EXPECT_NE(o.out.find("# best matching\n"), std::string::npos);
  EXPECT_NE(o.err.find("no stable matching found"), std::string::npos);
}

TEST(Cli, ExportAndCount) {
  const std::string app = temp_file("appendix3.txt", call({"gen", "appendix"}).out);
  const auto cnf = std::filesystem::temp_directory_path() / "tdsm_cli_test.cnf";
  EXPECT_EQ(call({"export-cnf", app, "-o", cnf.string()}).code, 0);
  std::ifstream f(cnf);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_NE(ss.str().find("p cnf 7 "), std::string::npos);
  EXPECT_EQ(call({"count", app}).out, "0\n");
}

TEST(Cli, VerifyAppendix) {
  const Outcome o = call({"verify", "appendix"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("noncomplementable: 8\n"), std::string::npos);
  EXPECT_NE(o.out.find("verdict: no stable matching\n"), std::string::npos);
}

TEST(Cli, VerifyExportRouteReadsSolverVerdict) {
  const auto cnf = (std::filesystem::temp_directory_path() / "tdsm_cli_test_t2.cnf").string();
  const Outcome pending = call({"verify", "theorem2", "--route", "export", "--out", cnf});
  EXPECT_EQ(pending.code, 0);
  EXPECT_NE(pending.out.find("verdict: pending external confirmation"), std::string::npos);
  // Stand-in solver: the trailing '#' comments out the file argument.
  const Outcome fake = call({"verify", "theorem2", "--route", "export", "--out", cnf, "--solver",
                             "echo s UNSATISFIABLE #"});
  EXPECT_EQ(fake.code, 0);
  EXPECT_NE(fake.out.find("verdict: no stable matching"), std::string::npos);
  std::filesystem::remove(cnf);
}

TEST(Cli, CensusSmall) {
  const Outcome o = call({"census", "small3dsmi", "-n", "1"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("trials: 8\n"), std::string::npos);
  EXPECT_EQ(call({"census", "sample", "-n", "3", "--trials", "10", "--engine", "sat"}).code, 2);
  const Outcome s =
      call({"census", "--jobs", "2", "sample", "-n", "3", "--trials", "50", "--engine", "sat", "--seed", "1"});
  EXPECT_EQ(s.code, 0);
  EXPECT_EQ(s.out.rfind("# seed: 1\n", 0), 0u);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({"solve", "/nonexistent/file", "--engine", "sat"}).code, 2);
  EXPECT_EQ(call({"verify", "theorem2", "--route", "export"}).code, 2);
  const Outcome bad = call({"count", "-"}, "3dsm 1 complete\nM1: F1\n");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("parse error: line 2"), std::string::npos);
}

}  // namespace
}  // namespace tdsm::cli
