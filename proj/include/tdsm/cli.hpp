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

// Command-line front end. Exit codes: 0 success / verdict as expected,
// 1 verdict mismatch, 2 usage or input error. Results go to `out`,
// diagnostics to `err`.
//
//   gen {appendix|theorem1 --host H|theorem2|random -n N --kind K}
//       [--policy P --seed S --trace --variant V -o FILE]
//   check INSTANCE MATCHING [--expect stable|unstable]
//   solve INSTANCE --engine {brute|backtrack|sat|local} [budgets] [--seed S]
//   export-cnf INSTANCE -o FILE
//   verify {appendix|theorem1|theorem2} [--route R --variant V --budget N
//       --out FILE --solver CMD --local-iters N --seed S]
//   census {small3dsmi -n N | sample -n N --trials T --engine E --seed S}
//   count INSTANCE

#ifndef TDSM_CLI_HPP_
#define TDSM_CLI_HPP_

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tdsm/constructions.hpp"
#include "tdsm/engines.hpp"
#include "tdsm/experiments.hpp"
#include "tdsm/model.hpp"
#include "tdsm/stability.hpp"

namespace tdsm::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_source(const std::string& path, std::istream& in) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_sink(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

inline CompletionPolicy parse_policy(const std::string& s) {
  return s == "shuffle" ? CompletionPolicy::kSeededShuffle : CompletionPolicy::kLexicographic;
}

inline Lemma2Variant parse_variant(const std::string& s) {
  return s == "figure" ? Lemma2Variant::kFigure : Lemma2Variant::kCaption;
}

inline EngineKind parse_engine(const std::string& s) {
  static const std::map<std::string, EngineKind> kEngines = {
      {"brute", EngineKind::kBrute},
      {"backtrack", EngineKind::kBacktrack},
      {"sat", EngineKind::kSat},
      {"local", EngineKind::kLocal}};
  return kEngines.at(s);
}

inline std::string format_ms(double ms) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << ms;
  return os.str();
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Three-sided stable matching with cyclic preferences", "tdsm"};
  app.require_subcommand(1);

  // gen
  std::string gen_what, gen_host = "appendix", gen_kind = "complete", gen_policy = "lexicographic",
                        gen_variant = "caption", gen_out;
  std::uint32_t gen_n = 0;
  std::uint64_t gen_seed = 0;
  bool gen_trace = false;
  auto* gen = app.add_subcommand("gen", "Write an instance in text format");
  gen->add_option("what", gen_what, "appendix | theorem1 | theorem2 | random")
      ->required()
      ->check(CLI::IsMember({"appendix", "theorem1", "theorem2", "random"}));
  gen->add_option("--host", gen_host, "theorem1 host: 'appendix' or an instance file");
  gen->add_option("-n", gen_n, "random: problem size");
  gen->add_option("--kind", gen_kind, "random: complete | incomplete")
      ->check(CLI::IsMember({"complete", "incomplete"}));
  gen->add_option("--policy", gen_policy, "rank completion: lexicographic | shuffle")
      ->check(CLI::IsMember({"lexicographic", "shuffle"}));
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "random seed");
  gen->add_flag("--trace", gen_trace, "emit the construction trace as comments");
  gen->add_option("--variant", gen_variant, "two-anchor gadget ranks: caption | figure")
      ->check(CLI::IsMember({"caption", "figure"}));
  gen->add_option("-o,--output", gen_out, "output file (default stdout)");

  // check
  std::string check_inst, check_match, check_expect;
  auto* check = app.add_subcommand("check", "List the blocking triples of a matching");
  check->add_option("instance", check_inst)->required();
  check->add_option("matching", check_match)->required();
  check->add_option("--expect", check_expect, "stable | unstable")
      ->check(CLI::IsMember({"stable", "unstable"}));

  // solve
  std::string solve_inst, solve_engine;
  std::uint64_t solve_budget = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t solve_iters = 1'000'000, solve_restart = 100'000, solve_seed = 0;
  auto* solve = app.add_subcommand("solve", "Search for a stable matching");
  solve->add_option("instance", solve_inst)->required();
  solve->add_option("--engine", solve_engine)
      ->required()
      ->check(CLI::IsMember({"brute", "backtrack", "sat", "local"}));
  solve->add_option("--budget", solve_budget, "node (backtrack) or conflict (sat) budget");
  solve->add_option("--iters", solve_iters, "local search iterations");
  solve->add_option("--restart", solve_restart, "local search restart interval");
  auto* solve_seed_opt = solve->add_option("--seed", solve_seed, "random seed");

  // export-cnf
  std::string export_inst, export_out;
  auto* exp = app.add_subcommand("export-cnf", "Write the stability CNF in DIMACS format");
  exp->add_option("instance", export_inst)->required();
  exp->add_option("-o,--output", export_out)->required();

  // verify
  std::string verify_what, verify_route = "internal", verify_variant = "caption", verify_outfile,
                           verify_solver;
  std::uint64_t verify_budget = std::numeric_limits<std::uint64_t>::max(), verify_local = 0,
                verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "Check the 9-vertex case analysis or a counterexample");
  verify->add_option("what", verify_what)
      ->required()
      ->check(CLI::IsMember({"appendix", "theorem1", "theorem2"}));
  verify->add_option("--route", verify_route)->check(CLI::IsMember({"internal", "export"}));
  verify->add_option("--variant", verify_variant)->check(CLI::IsMember({"caption", "figure"}));
  verify->add_option("--budget", verify_budget, "conflict budget for the internal route");
  verify->add_option("--out", verify_outfile, "export route: DIMACS destination");
  verify->add_option("--solver", verify_solver, "export route: external solver command");
  verify->add_option("--local-iters", verify_local, "also run local search for N iterations");
  auto* verify_seed_opt = verify->add_option("--seed", verify_seed, "local search seed");

  // census
  auto* census = app.add_subcommand("census", "Solvability censuses");
  census->require_subcommand(1);
  std::uint32_t small_n = 0, sample_n = 0;
  auto* small = census->add_subcommand("small3dsmi", "All 3DSMI instances of size 1 or 2");
  small->add_option("-n", small_n)->required()->check(CLI::Range(1, 2));
  std::uint64_t sample_trials = 0, sample_seed = 0, sample_iters = 1'000'000;
  std::string sample_engine;
  unsigned jobs = 1;
  census->add_option("--jobs", jobs, "worker threads");
  auto* sample = census->add_subcommand("sample", "Random complete instances");
  sample->add_option("-n", sample_n)->required()->check(CLI::PositiveNumber);
  sample->add_option("--trials", sample_trials)->required();
  sample->add_option("--engine", sample_engine)
      ->required()
      ->check(CLI::IsMember({"brute", "backtrack", "sat", "local"}));
  sample->add_option("--iters", sample_iters, "local search iterations per trial");
  sample->add_option("--seed", sample_seed)->required();

  // count
  std::string count_inst;
  auto* count = app.add_subcommand("count", "Number of stable matchings (small instances)");
  count->add_option("instance", count_inst)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (gen->parsed()) {
      const CompletionPolicy policy = detail::parse_policy(gen_policy);
      const bool randomized = gen_what == "random" || policy == CompletionPolicy::kSeededShuffle;
      if (randomized && gen_seed_opt->count() == 0) throw UsageError("--seed is required");
      std::string text;
      if (gen_what == "appendix") {
        text = serialize_instance(appendix_instance());
      } else if (gen_what == "random") {
        if (gen_n == 0) throw UsageError("random needs -n N with N >= 1");
        text = serialize_instance(random_instance(
            gen_n, gen_kind == "complete" ? InstanceKind::kComplete : InstanceKind::kIncomplete,
            gen_seed));
      } else {
        std::pair<Instance, ConstructionTrace> built;
        if (gen_what == "theorem2") {
          built = theorem2_instance(policy, gen_seed, detail::parse_variant(gen_variant));
        } else {
          const Instance host = gen_host == "appendix"
                                    ? appendix_instance()
                                    : parse_instance(detail::read_source(gen_host, in));
          built = theorem1_compose(host, policy, gen_seed, gen_host);
        }
        if (gen_trace) text = serialize_trace(built.second);
        text += serialize_instance(built.first);
      }
      detail::write_sink(gen_out, text, out);
      return 0;
    }

    if (check->parsed()) {
      const Instance inst = parse_instance(detail::read_source(check_inst, in));
      const Matching m = parse_matching(inst, detail::read_source(check_match, in));
      const auto blocking = blocking_triples(inst, m);
      if (blocking.empty()) {
        out << "STABLE\n";
      } else {
        for (const auto& b : blocking) out << to_string(b.family) << '\n';
        err << "unstable: " << blocking.size() << " blocking triple(s)\n";
      }
      if (check_expect == "stable" && !blocking.empty()) return 1;
      if (check_expect == "unstable" && blocking.empty()) return 1;
      return 0;
    }

    if (solve->parsed()) {
      const EngineKind engine = detail::parse_engine(solve_engine);
      if (engine == EngineKind::kLocal && solve_seed_opt->count() == 0) {
        throw UsageError("--seed is required for the local engine");
      }
      const Instance inst = parse_instance(detail::read_source(solve_inst, in));
      EngineOptions opt;
      opt.node_budget = solve_budget;
      opt.conflict_budget = solve_budget;
      opt.local = {solve_iters, solve_restart, solve_seed};
      opt.seed = solve_seed;
      const SolveResult r = solve_with(engine, inst, opt);
      switch (r.status) {
        case SolveStatus::kStable:
          out << "STABLE\n" << serialize_matching(*r.matching);
          return 0;
        case SolveStatus::kNoStableMatching:
          out << "NO_STABLE_MATCHING\n";
          err << "no stable matching found (" << r.engine << ", exhaustive)\n";
          return 1;
        default:
          out << "TIMEOUT blocking=" << r.blocking_count << '\n';
          if (r.matching) out << "# best matching\n" << serialize_matching(*r.matching);
          err << "no stable matching found (" << r.engine << " budget exhausted";
          if (r.matching) err << ", best blocking count " << r.blocking_count;
          err << ")\n";
          return 1;
      }
    }

    if (exp->parsed()) {
      const Instance inst = parse_instance(detail::read_source(export_inst, in));
      std::ostringstream os;
      write_dimacs(encode_cnf(inst), os);
      detail::write_sink(export_out, os.str(), out);
      return 0;
    }

    if (verify->parsed()) {
      if (verify_what == "appendix") {
        const AppendixReport report = verify_appendix();
        out << serialize_appendix_report(report);
        return report.passed() ? 0 : 1;
      }
      if (verify_local > 0 && verify_seed_opt->count() == 0) {
        throw UsageError("--seed is required with --local-iters");
      }
      VerifyOptions opt;
      opt.route = verify_route == "export" ? VerifyRoute::kExport : VerifyRoute::kInternal;
      opt.variant = detail::parse_variant(verify_variant);
      opt.sat.conflict_budget = verify_budget;
      opt.export_path = verify_outfile;
      opt.external_solver = verify_solver;
      opt.local_iterations = verify_local;
      opt.local_seed = verify_seed;
      if (opt.route == VerifyRoute::kExport && opt.export_path.empty()) {
        throw UsageError("--route export needs --out FILE");
      }
      const auto which = verify_what == "theorem2" ? Counterexample::kTheorem2
                                                   : Counterexample::kTheorem1OfAppendix;
      const CounterexampleReport report = verify_counterexample(which, opt);
      const auto counts = report.instance.counts();
      out << "instance: " << verify_what << " size " << report.instance.size() << " ("
          << counts[0] << '/' << counts[1] << '/' << counts[2] << ")\n";
      out << "route: " << verify_route << " (" << report.result.engine << ")\n";
      out << "result: " << to_string(report.result.status)
          << " conflicts=" << report.result.stats.conflicts
          << " ms=" << detail::format_ms(report.result.stats.wall_ms) << '\n';
      if (!report.note.empty()) out << "note: " << report.note << '\n';
      bool as_expected = report.unsat() || (!report.note.empty() && report.result.status == SolveStatus::kTimeout);
      if (report.local) {
        out << "local: " << to_string(report.local->status)
            << " blocking=" << report.local->blocking_count
            << " iterations=" << report.local->stats.iterations << '\n';
        if (report.local->status == SolveStatus::kStable) as_expected = false;
      }
      out << "verdict: "
          << (report.unsat() ? "no stable matching"
                             : (as_expected ? "pending external confirmation" : "NOT CONFIRMED"))
          << '\n';
      return as_expected ? 0 : 1;
    }

    if (census->parsed()) {
      if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
      CensusReport report;
      if (small->parsed()) {
        report = exhaustive_small_3dsmi(small_n, jobs);
      } else {
        EngineOptions opt;
        opt.local = {sample_iters, 100'000, 0};
        report = sample_solvability(sample_n, sample_trials, detail::parse_engine(sample_engine),
                                    sample_seed, opt, jobs);
      }
      out << serialize_report(report);
      return report.conjecture_holds() ? 0 : 1;
    }

    if (count->parsed()) {
      const Instance inst = parse_instance(detail::read_source(count_inst, in));
      out << count_stable(inst) << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace tdsm::cli

#endif  // TDSM_CLI_HPP_
