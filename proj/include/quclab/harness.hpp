#pragma once

#include <map>

#include "quclab/adversim.hpp"
#include "quclab/netexec.hpp"
#include "quclab/otproto.hpp"

namespace quclab::harness {

using otproto::ProtocolParams;

// One experiment run. Every experiment ships its own parameter defaults; the
// config only overrides what it names.
struct ExperimentConfig {
  Bytes experiment;
  std::optional<size_t> n, m, ell;
  std::optional<unsigned> k;  // profile: n = 4k, alpha = 1/3, lambda = 1/8
  std::optional<size_t> trials;
  uint64_t seed = 7;
  bool exact_only = false;  // skip sampled components
  size_t branch_cap = 1'000'000;
  size_t max_steps = 20000;
  size_t qubit_cap = qcore::StateVector::kDefaultQubitCap;
  Bytes out_path;
  Bytes csv_path;
  Bytes corpus_path;
  bool timings = false;
};

// A thresholded measurement: pass iff lo <= value <= hi.
struct Check {
  Bytes name;
  double value = 0;
  double lo = 0;
  double hi = 0;
  bool pass = false;
  Bytes note;
};

struct ExperimentReport {
  Bytes experiment;
  std::map<Bytes, Bytes> config_echo;
  std::vector<Check> checks;
  double max_norm_error = 0;
  double max_mass_error = 0;  // |total probability - 1| over exhaustive runs
  bool pass = false;
  double wall_ms = 0;
  std::vector<Bytes> csv_lines;  // per-trial records, header first

  std::string to_json(bool include_timings) const;
};

// Catalog (stable names):
//   correctness, corrupted-alice-tv, trivial-cases-tv, cheat-bob-abort,
//   sender-privacy, receiver-privacy, composition-equivalence,
//   lifting-wrapper, hash-universality
std::vector<Bytes> list_experiments();
Bytes experiment_description(const Bytes& name);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Key/value config file: `key = value` lines, '#' comments.
ExperimentConfig config_from_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const Bytes& key, const Bytes& value);

// Representative sample-mode execution of the experiment's primary network,
// with trace recording (backs the `trace` CLI subcommand).
netexec::ExecResult trace_experiment(const ExperimentConfig& cfg);

}  // namespace quclab::harness
