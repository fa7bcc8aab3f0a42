#pragma once

#include <any>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quclab/common.hpp"
#include "quclab/qcore.hpp"

namespace quclab::netexec {

using MachineId = Bytes;

inline const MachineId kEnvironmentId = "environment";
inline const MachineId kAdversaryId = "adversary";

struct ClassicalMessage {
  MachineId sender;
  MachineId recipient;
  Bytes payload;

  bool operator==(const ClassicalMessage&) const = default;
};

Bytes encode_message(const ClassicalMessage& m);
std::optional<ClassicalMessage> parse_register(const Bytes& raw);

// --- machines ---------------------------------------------------------------

using LocalState = std::any;

struct Incoming {
  ClassicalMessage msg;
  Bytes raw;  // full register content, as measured
  qcore::QubitRegister qreg;
};

struct Outgoing {
  enum class Kind { None, Message, Raw };
  Kind kind = Kind::None;
  ClassicalMessage msg;
  Bytes raw;
  qcore::QubitRegister qreg;

  static Outgoing none() { return {}; }
  static Outgoing message(MachineId sender, MachineId recipient, Bytes payload,
                          qcore::QubitRegister qreg = {}) {
    Outgoing o;
    o.kind = Kind::Message;
    o.msg = {std::move(sender), std::move(recipient), std::move(payload)};
    o.qreg = std::move(qreg);
    return o;
  }
  static Outgoing raw_register(Bytes raw, qcore::QubitRegister qreg = {}) {
    Outgoing o;
    o.kind = Kind::Raw;
    o.raw = std::move(raw);
    o.qreg = std::move(qreg);
    return o;
  }
};

// Thrown by RunContext in exhaustive mode when the choice tape runs out; the
// engine catches it, rolls back the activation and re-runs once per branch.
struct BranchRequest {
  size_t uniform_n = 0;          // nonzero: uniform over this many alternatives
  std::vector<double> probs;     // otherwise explicit probabilities
  size_t alternatives() const { return uniform_n ? uniform_n : probs.size(); }
  double probability(size_t i) const {
    return uniform_n ? 1.0 / double(uniform_n) : probs[i];
  }
};

class RunContext final : public qcore::ChoiceSource {
 public:
  static RunContext sampling(Rng* rng, qcore::QubitPool* pool, unsigned k) {
    RunContext c;
    c.rng_ = rng;
    c.pool_ = pool;
    c.k_ = k;
    return c;
  }
  static RunContext replaying(const std::vector<uint32_t>* tape, qcore::QubitPool* pool,
                              unsigned k) {
    RunContext c;
    c.tape_ = tape;
    c.pool_ = pool;
    c.k_ = k;
    return c;
  }

  size_t choose(std::span<const double> probs) override;
  size_t choose_uniform(size_t n) override;

  qcore::QubitPool& pool() { return *pool_; }
  unsigned security_parameter() const { return k_; }
  bool exhaustive() const { return tape_ != nullptr; }
  bool branched() const { return branched_; }
  void rewind() { pos_ = 0; branched_ = false; }

 private:
  RunContext() = default;
  Rng* rng_ = nullptr;
  const std::vector<uint32_t>* tape_ = nullptr;
  size_t pos_ = 0;
  bool branched_ = false;
  qcore::QubitPool* pool_ = nullptr;
  unsigned k_ = 1;
};

using StepFn = std::function<Outgoing(LocalState&, const Incoming&, RunContext&)>;

struct MachineSpec {
  MachineId id;
  StepFn step;
  LocalState initial_state;
  bool classical = false;
};

struct Network {
  std::vector<MachineSpec> machines;
  std::vector<MachineId> parties;

  Network& add(MachineSpec m) {
    machines.push_back(std::move(m));
    return *this;
  }
  const MachineSpec* find(const MachineId& id) const;
  Network merged_with(const Network& other) const;
};

void validate_network(const Network& net, bool require_environment = true);

// --- runnable state -----------------------------------------------------------

struct CompiledNetwork {
  std::vector<MachineSpec> machines;
  std::map<MachineId, size_t> index;

  explicit CompiledNetwork(const Network& net);
};

// Value-type snapshot of a running network: machine states plus the shared
// classical/quantum communication registers. Copy = fork.
struct NetState {
  std::shared_ptr<const CompiledNetwork> net;
  std::vector<LocalState> states;
  Bytes hclass;
  qcore::QubitRegister hquant;
  size_t steps = 0;

  static NetState initial(std::shared_ptr<const CompiledNetwork> net, const Bytes& input);
  const LocalState* state_of(const MachineId& id) const;
};

struct StepInfo {
  enum class Status { Stepped, Output } status = Status::Stepped;
  Bytes output;                // set when status == Output
  ClassicalMessage written;    // register content after the activation
  size_t qreg_size = 0;
  bool absorbed = false;       // ill-formed/mis-attributed emission was reset
  MachineId ran;               // machine that was activated (empty if none)
};

// One activation: parse the classical register, run the addressed machine,
// validate its emission. Ill-formed output, a claimed sender that is not the
// machine that ran, or an unknown recipient all reset the registers to
// (ε, environment, ε), which hands control to the environment.
StepInfo network_step(NetState& st, RunContext& ctx);

// Runs `inner` until it would deliver to a machine it does not contain (for
// simulator-internal networks the boundary is usually "environment").
struct BoundaryEvent {
  ClassicalMessage msg;
  qcore::QubitRegister qreg;
  bool absorbed = false;  // boundary reached via the absorb rule
};
BoundaryEvent run_to_boundary(NetState& inner, RunContext& ctx, size_t max_inner_steps = 100000);

void inject(NetState& inner, const ClassicalMessage& msg, qcore::QubitRegister qreg);

// --- execution ---------------------------------------------------------------

enum class ExecMode { Sample, ExactTree };

struct ExecConfig {
  unsigned k = 1;
  Bytes input;
  size_t max_steps = 20000;
  ExecMode mode = ExecMode::Sample;
  uint64_t seed = 0;
  size_t branch_cap = 1'000'000;
  size_t qubit_cap = qcore::StateVector::kDefaultQubitCap;
  bool record_trace = false;
};

struct TraceEvent {
  size_t step = 0;
  MachineId sender;
  MachineId recipient;
  Bytes payload;
  size_t qubits = 0;
  bool absorbed = false;
};

Bytes trace_to_jsonl(const std::vector<TraceEvent>& trace);

struct ExecResult {
  std::optional<Bytes> output;  // nullopt = activation budget exhausted
  std::vector<TraceEvent> trace;
  double norm_error = 0;
  size_t steps = 0;
};

struct OutcomeDistribution {
  std::map<Bytes, double> outcomes;
  double timeout_mass = 0;
  Bytes alphabet;  // optional label; tv_distance refuses to mix labels

  double total_mass() const;
};

struct LeafContext {
  const std::optional<Bytes>& output;  // nullopt on timeout
  const Bytes& collected;
  const NetState& net;
  const qcore::QubitPool& pool;
};
using LeafKeyFn = std::function<Bytes(const LeafContext&)>;
using MessageCollector = std::function<std::optional<Bytes>(const TraceEvent&)>;

struct ExactResult {
  OutcomeDistribution dist;
  size_t leaves = 0;
  double max_norm_error = 0;
};

struct ExactHooks {
  LeafKeyFn leaf_key;          // optional: replaces the plain-output key
  MessageCollector collector;  // optional: accumulates per-leaf view bytes
};

ExecResult exec_sample(const Network& net, const ExecConfig& cfg);
ExactResult exec_exact(const Network& net, const ExecConfig& cfg, const ExactHooks& hooks = {});

// --- standard machine transformers -------------------------------------------

// Replaces every machine whose id is in `corrupted` by a corruption party
// that re-emits adversary instructions and forwards everything else, with the
// quantum register passed through untouched.
Network corrupt(const Network& net, const std::vector<MachineId>& corrupted);

MachineSpec make_corruption_party(MachineId id);
MachineSpec make_dummy_party(MachineId party_id, MachineId func_id);
MachineSpec dummy_adversary();

// C(M): measures the quantum register in the computational basis before and
// after M's reaction.
MachineSpec classical_wrapper(MachineSpec m);

struct ComposeOptions {
  Bytes call_id = "sub";                 // functionality id sigma addresses
  std::map<MachineId, MachineId> roles;  // sigma machine -> pi party (default: same id)
};

// sigma invokes `instances` copies of pi; sigma's machines keep addressing
// `call_id` (instance j > 0 via "call_id#j") and each pi instance sees its
// bound sigma machine as its environment.
Network compose(const Network& sigma, const Network& pi, size_t instances,
                const ComposeOptions& opts);
Network compose(const Network& sigma, const Network& pi, size_t instances);

inline MachineId instance_tag(const MachineId& id, size_t instance) {
  return id + "#" + std::to_string(instance);
}

}  // namespace quclab::netexec
