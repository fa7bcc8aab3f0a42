#include "quclab/netexec.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace quclab::netexec {

Bytes encode_message(const ClassicalMessage& m) {
  return encode_tuple({m.sender, m.recipient, m.payload});
}

std::optional<ClassicalMessage> parse_register(const Bytes& raw) {
  auto parts = decode_tuple(raw);
  if (!parts || parts->size() != 3) return std::nullopt;
  return ClassicalMessage{(*parts)[0], (*parts)[1], (*parts)[2]};
}

// --- RunContext ---------------------------------------------------------------

size_t RunContext::choose(std::span<const double> probs) {
  size_t nonzero = 0, only = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0) {
      ++nonzero;
      only = i;
    }
  }
  if (nonzero == 0) throw Error("choose: no positive-probability alternative");
  if (nonzero == 1) return only;  // deterministic, no fork
  if (tape_) {
    if (pos_ < tape_->size()) return (*tape_)[pos_++];
    branched_ = true;
    BranchRequest br;
    br.probs.assign(probs.begin(), probs.end());
    throw br;
  }
  double u = uniform_unit(*rng_);
  double acc = 0;
  size_t last = only;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    last = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last;
}

size_t RunContext::choose_uniform(size_t n) {
  if (n == 0) throw Error("choose_uniform: empty range");
  if (n == 1) return 0;
  if (tape_) {
    if (pos_ < tape_->size()) return (*tape_)[pos_++];
    branched_ = true;
    BranchRequest br;
    br.uniform_n = n;
    throw br;
  }
  return uniform_below(*rng_, n);
}

// --- network plumbing ----------------------------------------------------------

const MachineSpec* Network::find(const MachineId& id) const {
  for (const auto& m : machines)
    if (m.id == id) return &m;
  return nullptr;
}

Network Network::merged_with(const Network& other) const {
  Network out = *this;
  for (const auto& m : other.machines) out.machines.push_back(m);
  for (const auto& p : other.parties) out.parties.push_back(p);
  return out;
}

void validate_network(const Network& net, bool require_environment) {
  std::set<MachineId> seen;
  for (const auto& m : net.machines) {
    if (m.id.empty()) throw Error("validate_network: empty machine id");
    if (!seen.insert(m.id).second) throw IdCollision("duplicate machine id: " + m.id);
    if (!m.step) throw Error("validate_network: machine without step function: " + m.id);
  }
  if (require_environment && !seen.count(kEnvironmentId))
    throw Error("validate_network: no environment machine");
  for (const auto& p : net.parties)
    if (!seen.count(p)) throw Error("validate_network: party without machine: " + p);
}

CompiledNetwork::CompiledNetwork(const Network& net) : machines(net.machines) {
  for (size_t i = 0; i < machines.size(); ++i) index[machines[i].id] = i;
}

NetState NetState::initial(std::shared_ptr<const CompiledNetwork> net, const Bytes& input) {
  NetState st;
  st.net = std::move(net);
  st.states.reserve(st.net->machines.size());
  for (const auto& m : st.net->machines) st.states.push_back(m.initial_state);
  st.hclass = encode_message({"", kEnvironmentId, input});
  return st;
}

const LocalState* NetState::state_of(const MachineId& id) const {
  auto it = net->index.find(id);
  if (it == net->index.end()) return nullptr;
  return &states[it->second];
}

namespace {

void absorb_registers(NetState& st, StepInfo& info) {
  st.hclass = encode_message({"", kEnvironmentId, ""});
  st.hquant = {};
  info.absorbed = true;
  info.written = {"", kEnvironmentId, ""};
  info.qreg_size = 0;
}

}  // namespace

StepInfo network_step(NetState& st, RunContext& ctx) {
  StepInfo info;
  auto parsed = parse_register(st.hclass);
  if (!parsed) {
    absorb_registers(st, info);
    ++st.steps;
    return info;
  }
  if (parsed->sender == kEnvironmentId && parsed->recipient.empty()) {
    info.status = StepInfo::Status::Output;
    info.output = parsed->payload;
    return info;
  }
  auto it = st.net->index.find(parsed->recipient);
  if (it == st.net->index.end()) {
    absorb_registers(st, info);
    ++st.steps;
    return info;
  }
  const MachineSpec& spec = st.net->machines[it->second];
  info.ran = spec.id;

  Incoming in{*parsed, st.hclass, std::move(st.hquant)};
  st.hquant = {};
  Outgoing out = spec.step(st.states[it->second], in, ctx);

  switch (out.kind) {
    case Outgoing::Kind::None:
      absorb_registers(st, info);
      break;
    case Outgoing::Kind::Message:
      if (out.msg.sender != spec.id) {
        absorb_registers(st, info);
      } else {
        st.hclass = encode_message(out.msg);
        st.hquant = std::move(out.qreg);
        info.written = out.msg;
        info.qreg_size = st.hquant.size();
      }
      break;
    case Outgoing::Kind::Raw: {
      auto reparsed = parse_register(out.raw);
      if (!reparsed || reparsed->sender != spec.id) {
        absorb_registers(st, info);
      } else {
        st.hclass = out.raw;
        st.hquant = std::move(out.qreg);
        info.written = *reparsed;
        info.qreg_size = st.hquant.size();
      }
      break;
    }
  }
  ++st.steps;
  return info;
}

void inject(NetState& inner, const ClassicalMessage& msg, qcore::QubitRegister qreg) {
  inner.hclass = encode_message(msg);
  inner.hquant = std::move(qreg);
}

BoundaryEvent run_to_boundary(NetState& inner, RunContext& ctx, size_t max_inner_steps) {
  for (size_t i = 0; i < max_inner_steps; ++i) {
    auto parsed = parse_register(inner.hclass);
    if (!parsed) throw Error("run_to_boundary: unparseable inner register");
    if (!inner.net->index.count(parsed->recipient)) {
      BoundaryEvent ev;
      ev.msg = *parsed;
      ev.qreg = std::move(inner.hquant);
      inner.hquant = {};
      ev.absorbed = parsed->sender.empty() && parsed->recipient == kEnvironmentId &&
                    parsed->payload.empty();
      return ev;
    }
    network_step(inner, ctx);
  }
  throw Error("run_to_boundary: inner step budget exhausted");
}

// --- execution -----------------------------------------------------------------

namespace {

struct ExecState {
  NetState net;
  qcore::QubitPool pool;
  Bytes collected;
};

struct LightSnapshot {
  bool has_machine = false;
  size_t machine_index = 0;
  LocalState machine_state;
  qcore::QubitPool pool;
  Bytes hclass;
  qcore::QubitRegister hquant;
  size_t steps = 0;
};

LightSnapshot take_snapshot(const ExecState& s, const std::optional<size_t>& idx) {
  LightSnapshot snap;
  if (idx) {
    snap.has_machine = true;
    snap.machine_index = *idx;
    snap.machine_state = s.net.states[*idx];
  }
  snap.pool = s.pool;
  snap.hclass = s.net.hclass;
  snap.hquant = s.net.hquant;
  snap.steps = s.net.steps;
  return snap;
}

void restore_snapshot(ExecState& s, const LightSnapshot& snap) {
  if (snap.has_machine) s.net.states[snap.machine_index] = snap.machine_state;
  s.pool = snap.pool;
  s.net.hclass = snap.hclass;
  s.net.hquant = snap.hquant;
  s.net.steps = snap.steps;
}

TraceEvent event_from(const StepInfo& info, size_t step) {
  TraceEvent ev;
  ev.step = step;
  ev.sender = info.written.sender;
  ev.recipient = info.written.recipient;
  ev.payload = info.written.payload;
  ev.qubits = info.qreg_size;
  ev.absorbed = info.absorbed;
  return ev;
}

class ExactRunner {
 public:
  ExactRunner(const ExecConfig& cfg, const ExactHooks& hooks) : cfg_(cfg), hooks_(hooks) {}

  ExactResult run(const Network& net) {
    validate_network(net);
    auto compiled = std::make_shared<const CompiledNetwork>(net);
    ExecState root{NetState::initial(compiled, cfg_.input), qcore::QubitPool(cfg_.qubit_cap), {}};
    stack_.push_back({std::move(root), Prob{1.0, 1}});
    while (!stack_.empty()) {
      Work w = std::move(stack_.back());
      stack_.pop_back();
      advance(std::move(w));
    }
    // probabilities were accumulated per odd denominator so that sums of
    // dyadic branch weights stay exact; divide once per class at the end
    for (const auto& [key, classes] : staged_) {
      double total = 0;
      for (const auto& [den, mass] : classes) total += mass / double(den);
      result_.dist.outcomes[key] = total;
    }
    for (const auto& [den, mass] : staged_timeout_) result_.dist.timeout_mass += mass / double(den);
    return std::move(result_);
  }

 private:
  // exact branch weight: dyadic * (1 / odd_den); uniform n-way choices factor
  // n into 2^a * odd so the dyadic part stays exact in double arithmetic
  struct Prob {
    double dyadic = 1.0;
    uint64_t odd_den = 1;

    Prob scaled_uniform(uint64_t n) const {
      Prob out = *this;
      uint64_t odd = n;
      while (odd % 2 == 0) {
        odd /= 2;
        out.dyadic *= 0.5;
      }
      out.odd_den *= odd;
      return out;
    }
    Prob scaled(double q) const { return Prob{dyadic * q, odd_den}; }
  };

  struct Work {
    ExecState state;
    Prob prob;
  };

  void leaf(ExecState& s, std::optional<Bytes> output, const Prob& prob) {
    result_.max_norm_error = std::max(result_.max_norm_error, s.pool.max_norm_error());
    ++result_.leaves;
    if (!output) {
      staged_timeout_[prob.odd_den] += prob.dyadic;
      return;
    }
    Bytes key = *output;
    if (hooks_.leaf_key) {
      LeafContext lc{output, s.collected, s.net, s.pool};
      key = hooks_.leaf_key(lc);
    }
    staged_[key][prob.odd_den] += prob.dyadic;
  }

  void collect(ExecState& s, const StepInfo& info) {
    if (!hooks_.collector) return;
    if (auto add = hooks_.collector(event_from(info, s.net.steps))) s.collected += *add;
  }

  void advance(Work w) {
    ExecState& s = w.state;
    for (;;) {
      auto parsed = parse_register(s.net.hclass);
      if (parsed && parsed->sender == kEnvironmentId && parsed->recipient.empty()) {
        leaf(s, parsed->payload, w.prob);
        return;
      }
      if (s.net.steps >= cfg_.max_steps) {
        leaf(s, std::nullopt, w.prob);
        return;
      }
      std::optional<size_t> idx;
      if (parsed) {
        auto it = s.net.net->index.find(parsed->recipient);
        if (it != s.net.net->index.end()) idx = it->second;
      }
      LightSnapshot snap = take_snapshot(s, idx);
      tape_.clear();
      try {
        RunContext ctx = RunContext::replaying(&tape_, &s.pool, cfg_.k);
        StepInfo info = network_step(s.net, ctx);
        collect(s, info);
        continue;  // deterministic activation, keep going in place
      } catch (const BranchRequest& br) {
        restore_snapshot(s, snap);
        std::vector<Work> children;
        enumerate(s, snap, br, w.prob, children);
        // depth-first: push children and return to the scheduler
        for (auto& c : children) stack_.push_back(std::move(c));
        return;
      }
    }
  }

  void enumerate(ExecState& s, const LightSnapshot& snap, const BranchRequest& br,
                 const Prob& prob, std::vector<Work>& out) {
    const size_t n = br.alternatives();
    for (size_t i = 0; i < n; ++i) {
      double q = br.probability(i);
      if (q <= 0) continue;
      Prob child = br.uniform_n ? prob.scaled_uniform(br.uniform_n) : prob.scaled(q);
      tape_.push_back(uint32_t(i));
      try {
        RunContext ctx = RunContext::replaying(&tape_, &s.pool, cfg_.k);
        StepInfo info = network_step(s.net, ctx);
        collect(s, info);
        if (++branches_ > cfg_.branch_cap)
          throw BranchCapExceeded("exec_exact: branch cap exceeded (" +
                                  std::to_string(cfg_.branch_cap) + ")");
        out.push_back({s, child});
        restore_snapshot(s, snap);
      } catch (const BranchRequest& deeper) {
        restore_snapshot(s, snap);
        enumerate(s, snap, deeper, child, out);
      }
      tape_.pop_back();
    }
  }

  ExecConfig cfg_;
  ExactHooks hooks_;
  std::vector<Work> stack_;
  std::vector<uint32_t> tape_;
  size_t branches_ = 0;
  std::map<Bytes, std::map<uint64_t, double>> staged_;
  std::map<uint64_t, double> staged_timeout_;
  ExactResult result_;
};

}  // namespace

double OutcomeDistribution::total_mass() const {
  double acc = timeout_mass;
  for (const auto& [k, p] : outcomes) acc += p;
  return acc;
}

ExecResult exec_sample(const Network& net, const ExecConfig& cfg) {
  validate_network(net);
  auto compiled = std::make_shared<const CompiledNetwork>(net);
  NetState st = NetState::initial(compiled, cfg.input);
  qcore::QubitPool pool(cfg.qubit_cap);
  Rng rng(cfg.seed);
  RunContext ctx = RunContext::sampling(&rng, &pool, cfg.k);

  ExecResult res;
  for (;;) {
    if (st.steps >= cfg.max_steps) break;
    StepInfo info = network_step(st, ctx);
    if (info.status == StepInfo::Status::Output) {
      res.output = info.output;
      break;
    }
    if (cfg.record_trace) res.trace.push_back(event_from(info, st.steps));
  }
  res.steps = st.steps;
  res.norm_error = pool.max_norm_error();
  return res;
}

ExactResult exec_exact(const Network& net, const ExecConfig& cfg, const ExactHooks& hooks) {
  ExactRunner runner(cfg, hooks);
  return runner.run(net);
}

Bytes trace_to_jsonl(const std::vector<TraceEvent>& trace) {
  Bytes out;
  for (const auto& ev : trace) {
    nlohmann::json line{{"step", ev.step},          {"sender", ev.sender},
                        {"recipient", ev.recipient}, {"payload_hex", to_hex(ev.payload)},
                        {"qubits", ev.qubits},       {"absorbed", ev.absorbed}};
    out += line.dump();
    out += "\n";
  }
  return out;
}

// --- standard machines -----------------------------------------------------------

MachineSpec make_corruption_party(MachineId id) {
  MachineSpec spec;
  spec.id = id;
  spec.classical = true;
  spec.step = [id = spec.id](LocalState&, const Incoming& in, RunContext&) {
    if (in.msg.sender == kAdversaryId) return Outgoing::raw_register(in.msg.payload, in.qreg);
    return Outgoing::message(id, kAdversaryId, in.raw, in.qreg);
  };
  return spec;
}

Network corrupt(const Network& net, const std::vector<MachineId>& corrupted) {
  for (const auto& id : corrupted)
    if (std::find(net.parties.begin(), net.parties.end(), id) == net.parties.end())
      throw UnknownParty("corrupt: not a protocol party: " + id);
  Network out = net;
  for (auto& m : out.machines)
    if (std::find(corrupted.begin(), corrupted.end(), m.id) != corrupted.end())
      m = make_corruption_party(m.id);
  return out;
}

MachineSpec make_dummy_party(MachineId party_id, MachineId func_id) {
  if (party_id == func_id) throw Error("make_dummy_party: ids must differ");
  MachineSpec spec;
  spec.id = party_id;
  spec.classical = true;
  spec.step = [party_id, func_id](LocalState&, const Incoming& in, RunContext&) {
    if (in.msg.sender == kEnvironmentId && in.msg.recipient == party_id)
      return Outgoing::message(party_id, func_id, in.msg.payload, in.qreg);
    if (in.msg.sender == func_id && in.msg.recipient == party_id)
      return Outgoing::message(party_id, kEnvironmentId, in.msg.payload, in.qreg);
    return Outgoing::none();
  };
  return spec;
}

MachineSpec dummy_adversary() {
  MachineSpec spec;
  spec.id = kAdversaryId;
  spec.classical = true;
  spec.step = [](LocalState&, const Incoming& in, RunContext&) {
    if (in.msg.sender == kEnvironmentId && in.msg.recipient == kAdversaryId)
      return Outgoing::raw_register(in.msg.payload, in.qreg);
    return Outgoing::message(kAdversaryId, kEnvironmentId, in.raw, in.qreg);
  };
  return spec;
}

MachineSpec classical_wrapper(MachineSpec m) {
  StepFn inner = std::move(m.step);
  m.step = [inner](LocalState& st, const Incoming& in, RunContext& ctx) {
    ctx.pool().classicalize(in.qreg, ctx);
    Outgoing out = inner(st, in, ctx);
    ctx.pool().classicalize(out.qreg, ctx);
    return out;
  };
  m.classical = true;
  return m;
}

// --- composition -------------------------------------------------------------------

namespace {

Bytes call_alias(const Bytes& call_id, size_t instance) {
  return instance == 0 ? call_id : call_id + "#" + std::to_string(instance);
}

ClassicalMessage rewrite(const ClassicalMessage& m, const std::map<Bytes, Bytes>& ids) {
  ClassicalMessage out = m;
  if (auto it = ids.find(out.sender); it != ids.end()) out.sender = it->second;
  if (auto it = ids.find(out.recipient); it != ids.end()) out.recipient = it->second;
  return out;
}

// Wraps a machine so that both its incoming and outgoing messages pass through
// an id translation table. Raw emissions are reparsed, translated, re-encoded.
MachineSpec rename_view(MachineSpec m, MachineId outer_id, std::map<Bytes, Bytes> to_inner,
                        std::map<Bytes, Bytes> to_outer) {
  StepFn inner = std::move(m.step);
  m.step = [inner, to_inner, to_outer](LocalState& st, const Incoming& in, RunContext& ctx) {
    Incoming translated;
    translated.msg = rewrite(in.msg, to_inner);
    translated.raw = encode_message(translated.msg);
    translated.qreg = in.qreg;
    Outgoing out = inner(st, translated, ctx);
    switch (out.kind) {
      case Outgoing::Kind::None:
        break;
      case Outgoing::Kind::Message:
        out.msg = rewrite(out.msg, to_outer);
        break;
      case Outgoing::Kind::Raw: {
        auto parsed = parse_register(out.raw);
        if (parsed) out.raw = encode_message(rewrite(*parsed, to_outer));
        break;
      }
    }
    return out;
  };
  m.id = std::move(outer_id);
  return m;
}

}  // namespace

Network compose(const Network& sigma, const Network& pi, size_t instances,
                const ComposeOptions& opts) {
  if (instances < 1) throw Error("compose: need at least one instance");
  validate_network(pi, /*require_environment=*/false);

  std::map<MachineId, MachineId> roles = opts.roles;
  if (roles.empty()) {
    for (const auto& p : pi.parties)
      if (sigma.find(p)) roles[p] = p;
  }
  std::map<MachineId, MachineId> env_of;  // pi party -> sigma machine
  for (const auto& [sig, party] : roles) env_of[party] = sig;

  Network out;
  out.parties = sigma.parties;

  std::set<MachineId> outer_ids;
  for (const auto& m : sigma.machines) outer_ids.insert(m.id);
  for (size_t j = 0; j < instances; ++j)
    for (const auto& m : pi.machines)
      if (!outer_ids.insert(instance_tag(m.id, j)).second)
        throw IdCollision("compose: id collision at " + instance_tag(m.id, j));

  for (const auto& m : sigma.machines) {
    auto it = roles.find(m.id);
    if (it == roles.end()) {
      out.machines.push_back(m);
      continue;
    }
    // sigma machine bound to a pi party: its functionality line is redirected
    // to the bound sub-party of each instance.
    std::map<Bytes, Bytes> to_inner, to_outer;
    for (size_t j = 0; j < instances; ++j) {
      to_inner[instance_tag(it->second, j)] = call_alias(opts.call_id, j);
      to_outer[call_alias(opts.call_id, j)] = instance_tag(it->second, j);
    }
    to_outer[opts.call_id + "#0"] = instance_tag(it->second, 0);
    out.machines.push_back(rename_view(m, m.id, to_inner, to_outer));
  }

  for (size_t j = 0; j < instances; ++j) {
    for (const auto& m : pi.machines) {
      std::map<Bytes, Bytes> to_inner, to_outer;
      for (const auto& other : pi.machines) {
        to_inner[instance_tag(other.id, j)] = other.id;
        to_outer[other.id] = instance_tag(other.id, j);
      }
      auto bound = env_of.find(m.id);
      if (bound != env_of.end()) {
        to_inner[bound->second] = kEnvironmentId;
        to_outer[kEnvironmentId] = bound->second;
      }
      out.machines.push_back(rename_view(m, instance_tag(m.id, j), to_inner, to_outer));
    }
  }
  return out;
}

Network compose(const Network& sigma, const Network& pi, size_t instances) {
  return compose(sigma, pi, instances, ComposeOptions{});
}

}  // namespace quclab::netexec
