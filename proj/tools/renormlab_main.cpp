// renormlab: scenario-driven verification lab for measure-data equations on
// finite-state Dirichlet forms.
//
//   renormlab <command> --scenario <file> [--out <dir>] [--seed N]
//             [--threads N] [--dump-form]
//
// Exit codes: 0 all checks passed, 1 check failure, 2 configuration error,
// 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "renormlab/errors.hpp"
#include "renormlab/scenario.hpp"

namespace {

const char* kCommands[] = {"solve",      "verify",     "structure", "refine",
                           "reconstruct", "occupation", "mc",        "semilinear",
                           "aab",        "capacity"};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"renormlab - truncation measures, Green potentials and "
               "Monte Carlo checks on finite-state Dirichlet forms"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = env_or("RENORMLAB_OUT", ".");
  int threads = std::atoi(env_or("RENORMLAB_THREADS", "1").c_str());
  if (threads < 1) threads = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool dump_form = false;

  for (const char* name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "scenario file (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory for reports");
    sub->add_option("--seed", seed, "Monte Carlo seed override")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--threads", threads, "worker threads");
    sub->add_flag("--dump-form", dump_form, "write the assembled form JSON");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const renormlab::Command command =
        renormlab::command_from_string(app.get_subcommands().front()->get_name());
    const renormlab::Scenario scenario = renormlab::parse_scenario(scenario_path);

    renormlab::RunOptions options;
    options.out_dir = out_dir;
    options.threads = threads;
    options.dump_form = dump_form;
    if (seed_set) options.seed = seed;

    const renormlab::RunOutcome outcome = renormlab::run(scenario, command, options);
    for (const renormlab::CheckResult& c : outcome.checks) {
      std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name
                << "  value=" << c.value << " threshold=" << c.threshold;
      if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
      std::cout << '\n';
    }
    if (!outcome.error.empty()) {
      std::cerr << "error: " << outcome.error << '\n';
    }
    if (!outcome.report_path.empty()) {
      std::cout << "report: " << outcome.report_path << '\n';
    }
    return outcome.exit_code;
  } catch (const renormlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const renormlab::SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
