#pragma once

#include "quclab/netexec.hpp"
#include "quclab/otproto.hpp"

namespace quclab::adversim {

using netexec::MachineId;
using netexec::MachineSpec;
using netexec::Network;
using netexec::OutcomeDistribution;
using otproto::ProtocolParams;

// --- distribution distance -------------------------------------------------------

// Exact total variation distance: half the L1 distance over the union of
// supports (timeout mass counts as its own outcome).
double tv_distance(const OutcomeDistribution& p, const OutcomeDistribution& q);

struct TvEstimate {
  double estimate = 0;
  double radius = 0;  // two-sided Hoeffding confidence radius
};
TvEstimate tv_distance_empirical(const OutcomeDistribution& p, size_t samples_p,
                                 const OutcomeDistribution& q, size_t samples_q,
                                 double delta = 0.01);

OutcomeDistribution empirical_distribution(const std::vector<Bytes>& outcomes);

// --- simulators --------------------------------------------------------------------

// Corrupted-sender simulator: internally runs the dummy adversary, a
// corruption party for Alice, equivocal commitments and a modified receiver
// that measures late, measures in the announced bases, picks a uniform
// partition and computes both candidate strings; the pair is fed into the
// randomized-OT functionality through the external corruption party.
// Construction depends only on the parameters, never on the environment.
MachineSpec simulator_corrupted_alice(const ProtocolParams& p);

// No corruption: channels are secure, so the simulator only has to mimic what
// the dummy adversary would make of the environment's instructions.
MachineSpec simulator_no_corruption();

// Both parties corrupted: replays the full real network (dummy adversary,
// both corruption parties, commitment functionalities) verbatim.
MachineSpec simulator_both_corrupted(const ProtocolParams& p);

// --- real/ideal model builders --------------------------------------------------------

// corrupt(qrot, corrupted) plus the dummy adversary; caller adds an environment.
Network real_model(const ProtocolParams& p, const std::vector<MachineId>& corrupted);
// Ideal randomized-OT protocol with the given simulator as the adversary.
Network ideal_model(const ProtocolParams& p, const std::vector<MachineId>& corrupted,
                    const MachineSpec& simulator);

// --- environment script corpus ---------------------------------------------------------

struct ScriptSpec {
  Bytes name;
  uint64_t seed = 0;
};

std::vector<ScriptSpec> default_corrupted_alice_corpus();
std::vector<ScriptSpec> default_no_corruption_corpus();
std::vector<ScriptSpec> default_both_corrupted_corpus();

// JSON list of {"name": ..., "seed": ...} entries.
std::vector<ScriptSpec> corpus_from_json(const std::string& text);
std::string corpus_to_json(const std::vector<ScriptSpec>& corpus);

// Builds the environment machine for a named script. Scripts are
// deterministic given their seed: their own coin flips come from a seeded
// generator, so exhaustive runs only enumerate honest-party randomness.
// Environments output tuple(log, alice_out, bob_out).
MachineSpec script_environment(const ScriptSpec& spec, const ProtocolParams& p);

// Extracts the (alice_out, bob_out) pair from a script environment output.
std::optional<std::pair<Bytes, Bytes>> parse_script_output(const Bytes& env_output);

// Blind action-tape environment: emits one queued action per activation,
// records direct party outputs, and finally outputs tuple(log, alice_out,
// bob_out) — or tuple(alice_out, bob_out) when `canonical` is set, for
// comparing runs across structurally different networks.
MachineSpec tape_environment(std::vector<netexec::Outgoing> actions, bool canonical = false);
netexec::Outgoing env_message(const MachineId& to, Bytes payload);

// --- receiver attack strategies -----------------------------------------------------------

struct BobStrategy {
  enum class Kind {
    Honest,                 // corrupted Bob running the honest program
    NoMeasureRandomCommit,  // keep the qubits, commit to fresh random bits
    StoreAndGuess,          // commit to fixed guesses, measure after learning the bases
    WrongBasisAll,          // measure everything in one fixed basis, commit truthfully
  };
  Kind kind = Kind::Honest;
  int choice = 0;
  qcore::Basis basis = qcore::Basis::Plus;
};

// Environment driving the dummy adversary and the corrupted receiver.
// Outputs tuple("abort") when the sender aborts, tuple("pass", ...) otherwise.
MachineSpec attack_environment(const BobStrategy& strategy, const ProtocolParams& p);

// Honest Alice (optionally with pinned randomness), commitment instances,
// corrupted Bob, dummy adversary and the strategy environment.
Network attack_network(const BobStrategy& strategy, const ProtocolParams& p,
                       std::optional<uint64_t> alice_fixture_seed = {});

struct AttackOutcome {
  bool aborted = false;
  std::vector<Bytes> detail;
};
std::optional<AttackOutcome> parse_attack_outcome(const Bytes& env_output);

}  // namespace quclab::adversim
