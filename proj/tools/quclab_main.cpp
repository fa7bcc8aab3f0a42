#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "quclab/harness.hpp"

using namespace quclab;

namespace {

int write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  out << content;
  return 0;
}

void print_summary(const harness::ExperimentReport& report) {
  for (const auto& c : report.checks) {
    std::cout << (c.pass ? "  pass  " : "  FAIL  ") << c.name << "  value=" << c.value
              << "  window=[" << c.lo << ", " << c.hi << "]";
    if (!c.note.empty()) std::cout << "  (" << c.note << ")";
    std::cout << "\n";
  }
  std::cout << (report.pass ? "PASS" : "FAIL") << " " << report.experiment << "  ("
            << report.wall_ms / 1000.0 << " s)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quclab: commitment-based quantum OT protocol laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path, corpus_path, experiment;
  uint64_t seed = 0;
  bool seed_set = false;
  size_t trials = 0;
  bool trials_set = false, exact = false, timings = false;
  size_t n = 0, m = 0, ell = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("experiment", experiment, "experiment name (see `quclab list`)")->required();
    cmd->add_option("--config", config_path, "key = value config file");
    cmd->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--trials", trials, "sampled trial count")->each([&](const std::string&) {
      trials_set = true;
    });
    cmd->add_flag("--exact", exact, "run only the exhaustive components");
    cmd->add_option("--out", out_path, "write the report/trace here instead of stdout");
    cmd->add_option("--csv", csv_path, "write per-trial records as CSV");
    cmd->add_option("--corpus", corpus_path, "environment script corpus (JSON)");
    cmd->add_flag("--timings", timings, "include wall-clock timings in the report");
    cmd->add_option("--n", n, "kept-bit count");
    cmd->add_option("--m", m, "total qubit count");
    cmd->add_option("--ell", ell, "output string length");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment and check its thresholds");
  add_common(run);
  CLI::App* list = app.add_subcommand("list", "list the experiment catalog");
  CLI::App* trace = app.add_subcommand("trace", "emit a JSON-lines message trace");
  add_common(trace);

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& name : harness::list_experiments())
        std::cout << name << "\n    " << harness::experiment_description(name) << "\n";
      return 0;
    }

    harness::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = harness::config_from_file(config_path);
    cfg.experiment = experiment;
    if (seed_set) cfg.seed = seed;
    if (trials_set) cfg.trials = trials;
    if (exact) cfg.exact_only = true;
    if (!out_path.empty()) cfg.out_path = out_path;
    if (!csv_path.empty()) cfg.csv_path = csv_path;
    if (!corpus_path.empty()) cfg.corpus_path = corpus_path;
    if (timings) cfg.timings = true;
    if (n) cfg.n = n;
    if (m) cfg.m = m;
    if (ell) cfg.ell = ell;

    if (trace->parsed()) {
      auto res = harness::trace_experiment(cfg);
      return write_or_print(cfg.out_path, netexec::trace_to_jsonl(res.trace));
    }

    auto report = harness::run_experiment(cfg);
    print_summary(report);
    if (!cfg.out_path.empty()) write_or_print(cfg.out_path, report.to_json(cfg.timings));
    if (!cfg.csv_path.empty() && !report.csv_lines.empty()) {
      std::ofstream csv(cfg.csv_path);
      for (const auto& line : report.csv_lines) csv << line << "\n";
    }
    return report.pass ? 0 : 1;
  } catch (const BranchCapExceeded& e) {
    std::cerr << "error: " << e.what()
              << "\nhint: reduce n/m or raise branch_cap for exhaustive runs\n";
    return 2;
  } catch (const ConfigInvalid& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
