#include "quclab/adversim.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "quclab/idealfunc.hpp"

namespace quclab::adversim {

using netexec::ClassicalMessage;
using netexec::dummy_adversary;
using netexec::Incoming;
using netexec::kAdversaryId;
using netexec::kEnvironmentId;
using netexec::LocalState;
using netexec::NetState;
using netexec::Outgoing;
using netexec::RunContext;
using otproto::kAliceId;
using otproto::kBobId;
using otproto::kRotId;
using qcore::QubitRegister;

// --- distances --------------------------------------------------------------------

double tv_distance(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (!p.alphabet.empty() && !q.alphabet.empty() && p.alphabet != q.alphabet)
    throw AlphabetMismatch("tv_distance: distributions over different alphabets");
  std::set<Bytes> keys;
  for (const auto& [k, v] : p.outcomes) keys.insert(k);
  for (const auto& [k, v] : q.outcomes) keys.insert(k);
  double acc = std::abs(p.timeout_mass - q.timeout_mass);
  for (const auto& k : keys) {
    auto pi = p.outcomes.find(k);
    auto qi = q.outcomes.find(k);
    double pv = pi == p.outcomes.end() ? 0.0 : pi->second;
    double qv = qi == q.outcomes.end() ? 0.0 : qi->second;
    acc += std::abs(pv - qv);
  }
  return acc / 2.0;
}

TvEstimate tv_distance_empirical(const OutcomeDistribution& p, size_t samples_p,
                                 const OutcomeDistribution& q, size_t samples_q, double delta) {
  TvEstimate est;
  est.estimate = tv_distance(p, q);
  est.radius = hoeffding_radius(samples_p, delta) + hoeffding_radius(samples_q, delta);
  return est;
}

OutcomeDistribution empirical_distribution(const std::vector<Bytes>& outcomes) {
  OutcomeDistribution dist;
  if (outcomes.empty()) return dist;
  double w = 1.0 / double(outcomes.size());
  for (const auto& o : outcomes) dist.outcomes[o] += w;
  return dist;
}

// --- shared environment plumbing -----------------------------------------------------

namespace {

Bytes observe(const Incoming& in) {
  Bytes s = "|";
  s += in.msg.sender;
  s += ";";
  s += to_hex(in.msg.payload);
  s += ";";
  s += std::to_string(in.qreg.size());
  return s;
}

// Instruction that makes the dummy adversary drive the corruption party `via`
// into re-emitting `msg`.
Outgoing instruct(const ClassicalMessage& msg, QubitRegister qreg = {}) {
  Bytes inner = netexec::encode_message(msg);
  Bytes adv = netexec::encode_message({kAdversaryId, msg.sender, inner});
  return Outgoing::message(kEnvironmentId, kAdversaryId, adv, std::move(qreg));
}

// (adversary, environment, raw(P, adversary, raw(S, R, p))) -> (S, R, p)
std::optional<ClassicalMessage> unwrap_wrapped(const Incoming& in) {
  if (in.msg.sender != kAdversaryId) return std::nullopt;
  auto outer = netexec::parse_register(in.msg.payload);
  if (!outer || outer->recipient != kAdversaryId) return std::nullopt;
  auto original = netexec::parse_register(outer->payload);
  if (!original) return std::nullopt;
  return original;
}

Outgoing finish_output(const Bytes& log, const Bytes& alice_out, const Bytes& bob_out) {
  return Outgoing::message(kEnvironmentId, "", encode_tuple({log, alice_out, bob_out}));
}

}  // namespace

std::optional<std::pair<Bytes, Bytes>> parse_script_output(const Bytes& env_output) {
  auto parts = decode_tuple(env_output);
  if (!parts || parts->size() != 3) return std::nullopt;
  return std::make_pair((*parts)[1], (*parts)[2]);
}

// --- simulators ------------------------------------------------------------------------

namespace {

struct EmbeddedSimState {
  NetState inner;
};

MachineSpec embedded_simulator(Network inner_net, bool feed_rot) {
  auto compiled = std::make_shared<const netexec::CompiledNetwork>(inner_net);
  MachineSpec spec;
  spec.id = kAdversaryId;
  spec.initial_state = EmbeddedSimState{NetState::initial(compiled, "")};
  spec.step = [feed_rot](LocalState& box, const Incoming& in, RunContext& ctx) {
    auto& st = std::any_cast<EmbeddedSimState&>(box);
    if (in.msg.sender != kEnvironmentId || in.msg.recipient != kAdversaryId)
      return Outgoing::message(kAdversaryId, kEnvironmentId, in.raw, in.qreg);
    netexec::inject(st.inner, {kEnvironmentId, kAdversaryId, in.msg.payload}, in.qreg);
    auto ev = netexec::run_to_boundary(st.inner, ctx);
    if (ev.absorbed) return Outgoing::none();
    if (ev.msg.sender == kAdversaryId && ev.msg.recipient == kEnvironmentId)
      return Outgoing::message(kAdversaryId, kEnvironmentId, ev.msg.payload, std::move(ev.qreg));
    if (feed_rot && ev.msg.sender == kBobId && ev.msg.recipient == kEnvironmentId) {
      auto parts = decode_tuple(ev.msg.payload);
      if (parts && parts->size() == 3 && (*parts)[0] == otproto::kStringsPairTag) {
        // hand (s0, s1) to the functionality through the external corruption party
        Bytes rot_input = encode_tuple({(*parts)[1], (*parts)[2]});
        Bytes via = netexec::encode_message({kAliceId, kRotId, rot_input});
        return Outgoing::message(kAdversaryId, kAliceId, via);
      }
    }
    return Outgoing::none();
  };
  return spec;
}

}  // namespace

MachineSpec simulator_corrupted_alice(const ProtocolParams& p) {
  Network inner;
  inner.add(dummy_adversary());
  inner.add(netexec::make_corruption_party(kAliceId));
  for (size_t j = 0; j < 2 * p.m; ++j)
    inner.add(idealfunc::f_com_equivocal(1, otproto::com_id(j), kBobId, kAliceId));
  otproto::BobOptions opts;
  opts.simulator_mode = true;
  inner.add(otproto::bob_machine(p, opts));
  return embedded_simulator(std::move(inner), /*feed_rot=*/true);
}

MachineSpec simulator_no_corruption() {
  MachineSpec spec;
  spec.id = kAdversaryId;
  spec.step = [](LocalState&, const Incoming& in, RunContext&) {
    if (in.msg.sender != kEnvironmentId || in.msg.recipient != kAdversaryId)
      return Outgoing::message(kAdversaryId, kEnvironmentId, in.raw, in.qreg);
    // mirror what the dummy adversary's emission would have come to: with
    // secure channels every protocol machine ignores adversary messages, so
    // only environment-addressed forwards survive
    auto parsed = netexec::parse_register(in.msg.payload);
    if (!parsed || parsed->sender != kAdversaryId) return Outgoing::none();
    if (parsed->recipient == kEnvironmentId)
      return Outgoing::message(kAdversaryId, kEnvironmentId, parsed->payload, in.qreg);
    return Outgoing::none();
  };
  return spec;
}

MachineSpec simulator_both_corrupted(const ProtocolParams& p) {
  Network inner;
  inner.add(dummy_adversary());
  inner.add(netexec::make_corruption_party(kAliceId));
  inner.add(netexec::make_corruption_party(kBobId));
  for (size_t j = 0; j < 2 * p.m; ++j)
    inner.add(idealfunc::f_com(1, otproto::com_id(j), kBobId, kAliceId));
  return embedded_simulator(std::move(inner), /*feed_rot=*/false);
}

Network real_model(const ProtocolParams& p, const std::vector<MachineId>& corrupted) {
  Network net = netexec::corrupt(otproto::qrot_network(p), corrupted);
  net.add(dummy_adversary());
  return net;
}

Network ideal_model(const ProtocolParams& p, const std::vector<MachineId>& corrupted,
                    const MachineSpec& simulator) {
  Network net = otproto::ideal_rot_network(p, corrupted);
  net.add(simulator);
  return net;
}

// --- corrupted-Alice replay environments ---------------------------------------------------

namespace {

struct ReplayTweaks {
  int choice = 0;
  size_t give_choice_at = 1;  // env activation (1-based) that hands Bob the choice bit
  std::optional<char> announce_fill;  // replace announced kept bases by fill
  std::optional<char> prepare_fill;   // prepare the qubits in this basis instead
  bool abort_at_bases = false;        // stop instead of announcing bases
  size_t garbage_at = 0;
  size_t duplicate_at = 0;
  bool oversize_test_set = false;
  uint64_t fuzz = 0;
};

struct ReplayState {
  LocalState alice;
  size_t activations = 0;
  Bytes log, alice_out, bob_out;
  std::vector<Outgoing> pending;
  Outgoing last_instruct;
  Rng fuzz_rng;
  bool choice_given = false;
  bool started = false;
};

MachineSpec replay_environment(const ProtocolParams& p, const ReplayTweaks& tweaks,
                               uint64_t alice_seed) {
  otproto::AliceOptions aopts;
  aopts.fixture_seed = alice_seed;
  MachineSpec alice = otproto::alice_machine(p, aopts);
  auto alice_step = alice.step;

  ReplayState init;
  init.alice = alice.initial_state;
  if (tweaks.fuzz) init.fuzz_rng.seed(tweaks.fuzz);

  MachineSpec env;
  env.id = kEnvironmentId;
  env.initial_state = init;
  env.step = [=](LocalState& box, const Incoming& in, RunContext& ctx) {
    auto& st = std::any_cast<ReplayState&>(box);
    ++st.activations;
    st.log += observe(in);

    auto finish = [&]() { return finish_output(st.log, st.alice_out, st.bob_out); };

    // run the hosted honest sender on one message; translate her emission
    // into a dummy-adversary instruction
    std::function<std::optional<Outgoing>(const ClassicalMessage&, QubitRegister)> run_alice =
        [&](const ClassicalMessage& msg, QubitRegister qreg) -> std::optional<Outgoing> {
      Incoming fed{msg, netexec::encode_message(msg), std::move(qreg)};
      Outgoing out = alice_step(st.alice, fed, ctx);
      if (out.kind != Outgoing::Kind::Message) return std::nullopt;
      if (out.msg.recipient == kEnvironmentId) {
        st.alice_out = out.msg.payload;
        if (out.msg.payload == otproto::kAbortPayload) return finish();
        // nudge her so the pending masks message comes out
        return run_alice({kEnvironmentId, kAliceId, ""}, {});
      }
      Bytes payload = out.msg.payload;
      QubitRegister reg = out.qreg;
      auto parts = decode_tuple(payload);
      if (payload == otproto::kQubitsTag && tweaks.prepare_fill) {
        auto view = otproto::alice_view(st.alice);
        std::vector<qcore::Basis> fill(p.m, qcore::basis_from_char(*tweaks.prepare_fill));
        reg = ctx.pool().encode_bb84(view.raw_bits, fill);
      }
      if (parts && parts->size() == 2 && (*parts)[0] == otproto::kBasesTag) {
        if (tweaks.abort_at_bases) return finish();
        if (tweaks.announce_fill)
          payload = encode_tuple({otproto::kBasesTag, Bytes(p.n, *tweaks.announce_fill)});
      }
      if (parts && parts->size() == 2 && (*parts)[0] == otproto::kTestSetTag &&
          tweaks.oversize_test_set) {
        Bytes mask = (*parts)[1];
        for (auto& c : mask)
          if (c == '0') {
            c = '1';
            break;
          }
        payload = encode_tuple({otproto::kTestSetTag, mask});
      }
      return instruct({kAliceId, out.msg.recipient, payload}, std::move(reg));
    };

    // natural response to this activation
    std::optional<Outgoing> natural;
    if (in.msg.sender == kBobId) {
      st.bob_out = in.msg.payload;
      natural = finish();
    } else if (auto wrapped = unwrap_wrapped(in)) {
      if (wrapped->recipient == kAliceId) natural = run_alice(*wrapped, in.qreg);
    } else if (in.msg.sender.empty() && !st.started) {
      st.started = true;
      natural = run_alice({kEnvironmentId, kAliceId, ""}, {});
    }

    // scheduled choice-bit delivery takes precedence; the displaced response
    // waits in the pending queue
    if (!st.choice_given && st.activations >= tweaks.give_choice_at) {
      st.choice_given = true;
      if (natural) st.pending.push_back(*natural);
      natural = Outgoing::message(kEnvironmentId, kBobId, tweaks.choice ? "1" : "0");
    }

    // deterministic deviations
    bool garbage_now = tweaks.garbage_at == st.activations;
    bool duplicate_now = tweaks.duplicate_at == st.activations;
    bool finish_now = false;
    if (tweaks.fuzz) {
      double r = uniform_unit(st.fuzz_rng);
      if (r < 0.10)
        garbage_now = true;
      else if (r < 0.16)
        duplicate_now = true;
      else if (r < 0.18)
        finish_now = true;
    }
    if (finish_now) return finish();
    if (garbage_now) {
      if (natural) st.pending.push_back(*natural);
      return Outgoing::message(kEnvironmentId, kAdversaryId, "\xff\x00garbage");
    }
    if (duplicate_now && st.last_instruct.kind == Outgoing::Kind::Message) {
      if (natural) st.pending.push_back(*natural);
      return st.last_instruct;
    }

    Outgoing out;
    if (natural) {
      out = *natural;
    } else if (!st.pending.empty()) {
      out = st.pending.front();
      st.pending.erase(st.pending.begin());
    } else {
      return finish();
    }
    if (out.kind == Outgoing::Kind::Message && out.msg.recipient == kAdversaryId)
      st.last_instruct = out;
    return out;
  };
  return env;
}

// --- no-corruption tape environments ------------------------------------------------------

struct TapeState {
  size_t pc = 0;
  Bytes log, alice_out, bob_out;
};

Outgoing poke_adversary(const ClassicalMessage& emit) {
  return Outgoing::message(kEnvironmentId, kAdversaryId, netexec::encode_message(emit));
}

}  // namespace

MachineSpec tape_environment(std::vector<Outgoing> actions, bool canonical) {
  MachineSpec env;
  env.id = kEnvironmentId;
  env.initial_state = TapeState{};
  env.step = [actions = std::move(actions), canonical](LocalState& box, const Incoming& in,
                                                       RunContext&) {
    auto& st = std::any_cast<TapeState&>(box);
    st.log += observe(in);
    if (in.msg.sender == kAliceId) st.alice_out = in.msg.payload;
    if (in.msg.sender == kBobId) st.bob_out = in.msg.payload;
    if (st.pc < actions.size()) return actions[st.pc++];
    if (canonical)
      return Outgoing::message(kEnvironmentId, "", encode_tuple({st.alice_out, st.bob_out}));
    return finish_output(st.log, st.alice_out, st.bob_out);
  };
  return env;
}

Outgoing env_message(const MachineId& to, Bytes payload) {
  return Outgoing::message(kEnvironmentId, to, std::move(payload));
}

namespace {

Outgoing to_bob(Bytes payload) { return env_message(kBobId, std::move(payload)); }
Outgoing to_alice(Bytes payload) { return env_message(kAliceId, std::move(payload)); }

// --- both-corrupted relay environments ------------------------------------------------------

struct RelayState {
  LocalState alice, bob;
  size_t activations = 0;
  Bytes log, alice_out, bob_out;
  std::vector<Outgoing> pending;
  Rng fuzz_rng;
  bool started = false;
};

MachineSpec relay_environment(const ProtocolParams& p, int choice, size_t garbage_at,
                              uint64_t fuzz_seed) {
  MachineSpec alice = otproto::alice_machine(p);
  MachineSpec bob = otproto::bob_machine(p);
  auto alice_step = alice.step;
  auto bob_step = bob.step;

  RelayState init;
  init.alice = alice.initial_state;
  init.bob = bob.initial_state;
  if (fuzz_seed) init.fuzz_rng.seed(fuzz_seed);

  MachineSpec env;
  env.id = kEnvironmentId;
  env.initial_state = init;
  env.step = [=](LocalState& box, const Incoming& in, RunContext& ctx) {
    auto& st = std::any_cast<RelayState&>(box);
    ++st.activations;
    st.log += observe(in);
    auto finish = [&]() { return finish_output(st.log, st.alice_out, st.bob_out); };

    std::function<std::optional<Outgoing>(const ClassicalMessage&, QubitRegister)> run_hosted =
        [&](const ClassicalMessage& msg, QubitRegister qreg) -> std::optional<Outgoing> {
      bool to_alice_machine = msg.recipient == kAliceId;
      Incoming fed{msg, netexec::encode_message(msg), std::move(qreg)};
      Outgoing out = to_alice_machine ? alice_step(st.alice, fed, ctx)
                                      : bob_step(st.bob, fed, ctx);
      if (out.kind != Outgoing::Kind::Message) return std::nullopt;
      if (out.msg.recipient == kEnvironmentId) {
        if (out.msg.sender == kAliceId) {
          st.alice_out = out.msg.payload;
          if (out.msg.payload == otproto::kAbortPayload) return finish();
          return run_hosted({kEnvironmentId, kAliceId, ""}, {});
        }
        st.bob_out = out.msg.payload;
        return finish();
      }
      return instruct(out.msg, out.qreg);
    };

    std::optional<Outgoing> natural;
    if (!st.started) {
      st.started = true;
      run_hosted({kEnvironmentId, kBobId, choice ? "1" : "0"}, {});  // buffered, no emission
      natural = run_hosted({kEnvironmentId, kAliceId, ""}, {});
    } else if (auto wrapped = unwrap_wrapped(in)) {
      if (wrapped->recipient == kAliceId || wrapped->recipient == kBobId)
        natural = run_hosted(*wrapped, in.qreg);
    }

    bool garbage_now = garbage_at == st.activations;
    if (fuzz_seed && uniform_unit(st.fuzz_rng) < 0.10) garbage_now = true;
    if (garbage_now) {
      if (natural) st.pending.push_back(*natural);
      return Outgoing::message(kEnvironmentId, kAdversaryId, "\x01garbage");
    }

    if (natural) return *natural;
    if (!st.pending.empty()) {
      Outgoing out = st.pending.front();
      st.pending.erase(st.pending.begin());
      return out;
    }
    return finish();
  };
  return env;
}

}  // namespace

// --- corpus -----------------------------------------------------------------------------

std::vector<ScriptSpec> default_corrupted_alice_corpus() {
  return {
      {"honest-replay-c0", 11},     {"honest-replay-c1", 12},
      {"all-plus-bases", 21},       {"skewed-preparation", 22},
      {"early-abort", 31},          {"garbage-injection", 32},
      {"oversized-test-set", 33},   {"duplicate-test-set", 34},
      {"late-choice", 41},          {"fuzz", 101},
      {"fuzz", 202},                {"fuzz", 303},
  };
}

std::vector<ScriptSpec> default_no_corruption_corpus() {
  return {
      {"direct-honest-c0", 1},
      {"direct-honest-c1", 2},
      {"direct-start-first", 3},
      {"direct-poke-adversary", 4},
      {"direct-double-choice", 5},
  };
}

std::vector<ScriptSpec> default_both_corrupted_corpus() {
  return {
      {"relay-honest-c0", 51},
      {"relay-honest-c1", 52},
      {"relay-garbage", 53},
      {"relay-fuzz", 54},
  };
}

std::vector<ScriptSpec> corpus_from_json(const std::string& text) {
  std::vector<ScriptSpec> out;
  auto parsed = nlohmann::json::parse(text, nullptr, false);
  if (!parsed.is_array()) throw ConfigInvalid("corpus: expected a JSON array");
  for (const auto& item : parsed) {
    if (!item.is_object() || !item.contains("name"))
      throw ConfigInvalid("corpus: entries need a name");
    ScriptSpec spec;
    spec.name = item["name"].get<std::string>();
    if (item.contains("seed")) spec.seed = item["seed"].get<uint64_t>();
    out.push_back(std::move(spec));
  }
  return out;
}

std::string corpus_to_json(const std::vector<ScriptSpec>& corpus) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : corpus) arr.push_back({{"name", s.name}, {"seed", s.seed}});
  return arr.dump(2);
}

MachineSpec script_environment(const ScriptSpec& spec, const ProtocolParams& p) {
  ReplayTweaks tw;
  tw.choice = int(spec.seed % 2);
  if (spec.name == "honest-replay-c0") {
    tw.choice = 0;
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "honest-replay-c1") {
    tw.choice = 1;
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "all-plus-bases") {
    tw.announce_fill = '+';
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "skewed-preparation") {
    tw.prepare_fill = '+';
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "early-abort") {
    tw.abort_at_bases = true;
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "garbage-injection") {
    tw.garbage_at = 4;
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "oversized-test-set") {
    tw.oversize_test_set = true;
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "duplicate-test-set") {
    tw.duplicate_at = 5;
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "late-choice") {
    tw.give_choice_at = 4;
    return replay_environment(p, tw, spec.seed);
  }
  if (spec.name == "fuzz") {
    tw.fuzz = spec.seed;
    return replay_environment(p, tw, spec.seed + 7);
  }

  if (spec.name == "direct-honest-c0")
    return tape_environment({to_bob("0"), to_alice(""), to_alice("")});
  if (spec.name == "direct-honest-c1")
    return tape_environment({to_bob("1"), to_alice(""), to_alice("")});
  if (spec.name == "direct-start-first")
    return tape_environment({to_alice(""), to_bob(spec.seed % 2 ? "1" : "0"), to_alice("")});
  if (spec.name == "direct-poke-adversary")
    return tape_environment({to_bob("0"), to_alice(""),
                             poke_adversary({kAdversaryId, kBobId, "junk"}),
                             poke_adversary({kAdversaryId, kAliceId, "junk"}),
                             poke_adversary({kAdversaryId, otproto::com_id(0), "junk"}),
                             to_alice("")});
  if (spec.name == "direct-double-choice")
    return tape_environment({to_bob("1"), to_bob("1"), to_alice(""), to_alice("")});

  if (spec.name == "relay-honest-c0") return relay_environment(p, 0, 0, 0);
  if (spec.name == "relay-honest-c1") return relay_environment(p, 1, 0, 0);
  if (spec.name == "relay-garbage") return relay_environment(p, 0, 6, 0);
  if (spec.name == "relay-fuzz") return relay_environment(p, int(spec.seed % 2), 0, spec.seed);

  throw ConfigInvalid("unknown script: " + spec.name);
}

// --- attack strategies -------------------------------------------------------------------

namespace {

struct AttackState {
  int phase = 0;  // 0 start, 1 committing, 2 opening, 3 after-bases, 4 masks
  size_t commit_idx = 0;
  size_t open_idx = 0;
  QubitRegister qubits;
  Bytes committed;       // 2m bits as committed
  Bytes measured;        // measurement outcomes ('?' where unmeasured)
  Bytes test_mask;
  std::vector<size_t> test_set;
  Bytes theta;
  Bytes alice_strings;   // tuple(s0, s1) reported by Alice
  Bytes log;
  LocalState hosted_bob;  // Honest strategy
};

Outgoing commit_instruct(AttackState& st, size_t j, RunContext& ctx, bool fresh_random) {
  if (fresh_random && st.committed[j] == '?') st.committed[j] = ctx.coin() ? '1' : '0';
  Bytes payload = encode_tuple({idealfunc::kCommitTag, Bytes(1, st.committed[j])});
  return instruct({kBobId, otproto::com_id(j), payload});
}

Outgoing open_instruct(const AttackState& st, size_t k) {
  size_t j = 2 * st.test_set[k / 2] + (k % 2);
  return instruct({kBobId, otproto::com_id(j), idealfunc::kOpenTag});
}

}  // namespace

MachineSpec attack_environment(const BobStrategy& strategy, const ProtocolParams& p) {
  const size_t m = p.m, n = p.n;
  const size_t commit_count = 2 * m;
  const size_t open_count = 2 * p.test_size();

  MachineSpec hosted = otproto::bob_machine(p);
  auto hosted_step = hosted.step;
  AttackState init;
  init.hosted_bob = hosted.initial_state;

  MachineSpec env;
  env.id = kEnvironmentId;
  env.initial_state = init;
  env.step = [=](LocalState& box, const Incoming& in, RunContext& ctx) {
    auto& st = std::any_cast<AttackState&>(box);
    // the log doubles as the corrupted receiver's view; the sender's own
    // outputs arrive here only as environment bookkeeping and stay out of it
    if (in.msg.sender != kAliceId) st.log += observe(in);
    auto abort_out = [&]() {
      return Outgoing::message(kEnvironmentId, "", encode_tuple({"abort"}));
    };
    auto pass_out = [&](std::vector<Bytes> extra) {
      std::vector<Bytes> parts{"pass"};
      for (auto& e : extra) parts.push_back(std::move(e));
      return Outgoing::message(kEnvironmentId, "",
                               encode_tuple(std::span<const Bytes>(parts.data(), parts.size())));
    };

    // direct messages from the honest sender
    if (in.msg.sender == kAliceId) {
      if (in.msg.payload == otproto::kAbortPayload) return abort_out();
      st.alice_strings = in.msg.payload;  // tuple(s0, s1)
      return Outgoing::message(kEnvironmentId, kAliceId, "");  // release the masks
    }

    if (strategy.kind == BobStrategy::Kind::Honest) {
      // drive the honest receiver program through the corruption party
      std::function<std::optional<Outgoing>(const ClassicalMessage&, QubitRegister)> run_bob =
          [&](const ClassicalMessage& msg, QubitRegister qreg) -> std::optional<Outgoing> {
        Incoming fed{msg, netexec::encode_message(msg), std::move(qreg)};
        Outgoing out = hosted_step(st.hosted_bob, fed, ctx);
        if (out.kind != Outgoing::Kind::Message) return std::nullopt;
        if (out.msg.recipient == kEnvironmentId)
          return pass_out({out.msg.payload, st.alice_strings});
        return instruct(out.msg, out.qreg);
      };
      std::optional<Outgoing> response;
      if (in.msg.sender.empty() && st.phase == 0) {
        st.phase = 1;
        run_bob({kEnvironmentId, kBobId, strategy.choice ? "1" : "0"}, {});
        return Outgoing::message(kEnvironmentId, kAliceId, "");  // start the sender
      }
      if (auto wrapped = unwrap_wrapped(in); wrapped && wrapped->recipient == kBobId)
        response = run_bob(*wrapped, in.qreg);
      return response ? *response : abort_out();
    }

    // scripted cheating strategies
    if (in.msg.sender.empty() && st.phase == 0) {
      st.phase = 1;
      return Outgoing::message(kEnvironmentId, kAliceId, "");  // start the sender
    }
    auto wrapped = unwrap_wrapped(in);
    if (!wrapped || wrapped->recipient != kBobId) return abort_out();
    auto parts = decode_tuple(wrapped->payload);

    if (wrapped->payload == otproto::kQubitsTag && st.phase == 1) {
      st.qubits = in.qreg;
      st.measured.assign(m, '?');
      st.committed.assign(commit_count, '0');
      switch (strategy.kind) {
        case BobStrategy::Kind::NoMeasureRandomCommit:
          st.committed.assign(commit_count, '?');
          break;
        case BobStrategy::Kind::StoreAndGuess:
          break;  // all-zero guesses
        case BobStrategy::Kind::WrongBasisAll: {
          std::vector<qcore::Basis> fill(m, strategy.basis);
          st.measured = ctx.pool().measure_in_bases(st.qubits, fill, ctx);
          for (size_t i = 0; i < m; ++i) {
            st.committed[2 * i] = strategy.basis == qcore::Basis::Times ? '1' : '0';
            st.committed[2 * i + 1] = st.measured[i];
          }
          break;
        }
        default:
          break;
      }
      st.commit_idx = 1;
      return commit_instruct(st, 0, ctx, strategy.kind == BobStrategy::Kind::NoMeasureRandomCommit);
    }

    if (wrapped->payload == otproto::kAckTag) {
      if (st.phase == 1 && st.commit_idx < commit_count) {
        Outgoing out = commit_instruct(st, st.commit_idx, ctx, strategy.kind == BobStrategy::Kind::NoMeasureRandomCommit);
        ++st.commit_idx;
        return out;
      }
      if (st.phase == 2 && st.open_idx < open_count) {
        Outgoing out = open_instruct(st, st.open_idx);
        ++st.open_idx;
        return out;
      }
      return abort_out();
    }

    if (parts && parts->size() == 2 && (*parts)[0] == otproto::kTestSetTag && st.phase == 1) {
      st.test_mask = (*parts)[1];
      st.test_set = otproto::indices_from_mask(st.test_mask);
      st.phase = 2;
      st.open_idx = 1;
      return open_instruct(st, 0);
    }

    if (parts && parts->size() == 2 && (*parts)[0] == otproto::kBasesTag && st.phase == 2) {
      st.theta = (*parts)[1];
      if (strategy.kind == BobStrategy::Kind::NoMeasureRandomCommit)
        return pass_out({});  // test survived, that is all this strategy reports
      st.phase = 3;
      if (strategy.kind == BobStrategy::Kind::StoreAndGuess) {
        // now that the bases are public, measure the kept qubits in them
        QubitRegister kept;
        for (size_t i = 0; i < m; ++i)
          if (st.test_mask[i] == '0') kept.handles.push_back(st.qubits.handles[i]);
        Bytes outcomes =
            ctx.pool().measure_in_bases(kept, qcore::bases_from_string(st.theta), ctx);
        size_t r = 0;
        for (size_t i = 0; i < m; ++i)
          if (st.test_mask[i] == '0') st.measured[i] = outcomes[r++];
        // claim everything in the first index set
        return instruct({kBobId, kAliceId,
                         encode_tuple({otproto::kPartitionTag, Bytes(n, '1'), Bytes(n, '0')})});
      }
      // WrongBasisAll: index sets split by basis agreement with the guess
      Bytes kept_bases;
      for (size_t i = 0; i < m; ++i)
        if (st.test_mask[i] == '0')
          kept_bases.push_back(qcore::basis_char(strategy.basis));
      Bytes mask0(n, '0'), mask1(n, '0');
      for (size_t r2 = 0; r2 < n; ++r2) {
        bool match = st.theta[r2] == kept_bases[r2];
        mask0[r2] = match ? '1' : '0';
        mask1[r2] = match ? '0' : '1';
      }
      return instruct({kBobId, kAliceId, encode_tuple({otproto::kPartitionTag, mask0, mask1})});
    }

    if (parts && parts->size() == 5 && (*parts)[0] == otproto::kMasksTag && st.phase == 3) {
      // recover what this strategy can and report
      Bytes kept;
      for (size_t i = 0; i < m; ++i)
        if (st.test_mask[i] == '0') kept.push_back(st.measured[i]);
      if (strategy.kind == BobStrategy::Kind::StoreAndGuess) {
        auto h0 = otproto::hash_from_bits((*parts)[1], n, p.ell);
        auto h1 = otproto::hash_from_bits((*parts)[2], n, p.ell);
        Bytes s0 = xor_bits((*parts)[3], h0.eval(kept));
        Bytes s1 = xor_bits((*parts)[4], h1.eval(Bytes()));
        auto actual = decode_tuple(st.alice_strings);
        Bytes eq0 = actual && (*actual)[0] == s0 ? "1" : "0";
        Bytes eq1 = actual && (*actual)[1] == s1 ? "1" : "0";
        return pass_out({eq0, eq1});
      }
      // WrongBasisAll: report the view; posterior analysis happens outside
      return pass_out({st.theta, kept, st.log});
    }

    return abort_out();
  };
  return env;
}

Network attack_network(const BobStrategy& strategy, const ProtocolParams& p,
                       std::optional<uint64_t> alice_fixture_seed) {
  otproto::AliceOptions aopts;
  aopts.fixture_seed = alice_fixture_seed;
  Network net;
  net.add(otproto::alice_machine(p, aopts));
  net.add(otproto::bob_machine(p));
  for (size_t j = 0; j < 2 * p.m; ++j)
    net.add(idealfunc::f_com(1, otproto::com_id(j), kBobId, kAliceId));
  net.parties = {kAliceId, kBobId};
  net = netexec::corrupt(net, {kBobId});
  net.add(dummy_adversary());
  net.add(attack_environment(strategy, p));
  return net;
}

std::optional<AttackOutcome> parse_attack_outcome(const Bytes& env_output) {
  auto parts = decode_tuple(env_output);
  if (!parts || parts->empty()) return std::nullopt;
  AttackOutcome out;
  if ((*parts)[0] == "abort")
    out.aborted = true;
  else if ((*parts)[0] == "pass")
    out.aborted = false;
  else
    return std::nullopt;
  out.detail.assign(parts->begin() + 1, parts->end());
  return out;
}

}  // namespace quclab::adversim
