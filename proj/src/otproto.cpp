#include "quclab/otproto.hpp"

#include <algorithm>
#include <cmath>

namespace quclab::otproto {

using idealfunc::kCommitTag;
using idealfunc::kCommittedTag;
using idealfunc::kOpenTag;
using netexec::Incoming;
using netexec::kEnvironmentId;
using netexec::LocalState;
using netexec::Outgoing;
using netexec::RunContext;

// --- parameters -----------------------------------------------------------------

ProtocolParams ProtocolParams::direct(size_t n, size_t m, size_t ell) {
  if (n < 1 || m <= n) throw ConfigInvalid("params: need m > n >= 1");
  if (ell < 1) throw ConfigInvalid("params: need ell >= 1");
  return ProtocolParams{n, m, ell};
}

ProtocolParams ProtocolParams::from_rates(size_t n, double alpha, double lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigInvalid("params: alpha must be in (0,1)");
  if (!(lambda > 0.0 && lambda < 0.25)) throw ConfigInvalid("params: lambda must be in (0,1/4)");
  // epsilon guards keep ceil/floor of exact rationals stable in binary fp
  size_t m = size_t(std::ceil(double(n) / (1.0 - alpha) - 1e-9));
  size_t ell = size_t(std::floor(lambda * double(n) + 1e-9));
  return direct(n, m, ell);
}

ProtocolParams ProtocolParams::from_security_parameter(unsigned k, double alpha, double lambda) {
  if (k < 1) throw ConfigInvalid("params: k must be >= 1");
  return from_rates(size_t(4) * k, alpha, lambda);
}

// --- hashing ---------------------------------------------------------------------

ToeplitzHash hash_from_bits(Bytes diagonals, size_t input_len, size_t ell) {
  if (ell < 1) throw ConfigInvalid("hash: ell must be >= 1");
  if (diagonals.size() != input_len + ell - 1 || !valid_bits(diagonals))
    throw LengthMismatch("hash: diagonals must be " + std::to_string(input_len + ell - 1) +
                         " bits");
  return ToeplitzHash{std::move(diagonals), input_len, ell};
}

ToeplitzHash hash_sample(size_t input_len, size_t ell, Rng& rng) {
  return hash_from_bits(random_bit_string(rng, input_len + ell - 1), input_len, ell);
}

Bytes ToeplitzHash::eval(const Bytes& x) const {
  if (x.size() > input_len) throw LengthMismatch("hash eval: input longer than declared");
  if (!valid_bits(x)) throw Error("hash eval: input must be '0'/'1'");
  Bytes out(ell, '0');
  for (size_t i = 0; i < ell; ++i) {
    int acc = 0;
    for (size_t j = 0; j < x.size(); ++j)
      acc ^= (diagonals[i + j] == '1') & (x[j] == '1');
    out[i] = acc ? '1' : '0';
  }
  return out;
}

// --- masks and subsets ------------------------------------------------------------

MachineId com_id(size_t j) { return "com" + std::to_string(j); }

std::vector<MachineId> com_ids(const ProtocolParams& p) {
  std::vector<MachineId> ids;
  for (size_t j = 0; j < 2 * p.m; ++j) ids.push_back(com_id(j));
  return ids;
}

Bytes mask_from_indices(const std::vector<size_t>& indices, size_t len) {
  Bytes mask(len, '0');
  for (size_t i : indices) mask.at(i) = '1';
  return mask;
}

std::vector<size_t> indices_from_mask(const Bytes& mask) {
  std::vector<size_t> out;
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i] == '1') out.push_back(i);
  return out;
}

Bytes restrict_bits(const Bytes& bits, const Bytes& mask) {
  if (bits.size() != mask.size()) throw LengthMismatch("restrict_bits: length mismatch");
  Bytes out;
  for (size_t i = 0; i < bits.size(); ++i)
    if (mask[i] == '1') out.push_back(bits[i]);
  return out;
}

namespace {

uint64_t binomial(size_t n, size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  uint64_t acc = 1;
  for (size_t i = 0; i < k; ++i) acc = acc * (n - i) / (i + 1);
  return acc;
}

// Lexicographic unranking of a k-subset of {0..n-1}.
std::vector<size_t> unrank_subset(uint64_t rank, size_t n, size_t k) {
  std::vector<size_t> out;
  size_t pos = 0;
  while (k > 0) {
    uint64_t with_pos = binomial(n - pos - 1, k - 1);
    if (rank < with_pos) {
      out.push_back(pos);
      --k;
    } else {
      rank -= with_pos;
    }
    ++pos;
  }
  return out;
}

char basis_bit(char basis_char) { return basis_char == '+' ? '0' : '1'; }
char basis_from_bit(char bit) { return bit == '0' ? '+' : 'x'; }

Bytes drop_masked(const Bytes& s, const Bytes& test_mask) {
  Bytes out;
  for (size_t i = 0; i < s.size(); ++i)
    if (test_mask[i] == '0') out.push_back(s[i]);
  return out;
}

bool valid_partition(const Bytes& m0, const Bytes& m1, size_t n) {
  if (m0.size() != n || m1.size() != n) return false;
  for (size_t i = 0; i < n; ++i) {
    bool a = m0[i] == '1', b = m1[i] == '1';
    if ((m0[i] != '0' && m0[i] != '1') || (m1[i] != '0' && m1[i] != '1')) return false;
    if (a == b) return false;  // must cover and be disjoint
  }
  return true;
}

// --- Alice ------------------------------------------------------------------------

struct AliceState {
  int phase = 0;  // 0 idle, 1 commits, 2 opens, 3 partition, 4 pending masks, 5 done
  bool fixture = false;
  Rng rng;
  Bytes raw_bits;
  Bytes raw_bases;  // '+'/'x'
  Bytes commit_seen;
  size_t committed_count = 0;
  Bytes clear_committed;
  Bytes test_mask;
  std::vector<size_t> test_set;
  Bytes opened;
  size_t opened_count = 0;
  Bytes kept_bits, kept_bases;
  Bytes out0, out1, diag0, diag1, masked0, masked1;
  Bytes in0, in1;
  Bytes pending_payload;
  bool aborted = false;
};

struct BobState {
  int phase = 0;  // 0 qubits, 1 commits, 2 opens, 3 await masks, 4 done, 5 theta seen, no c yet
  int choice = -1;
  qcore::QubitRegister qubits;
  Bytes bases;  // '?' until chosen
  Bytes bits;   // '?' until measured
  size_t commit_sent = 0;
  Bytes test_mask;
  std::vector<size_t> test_set;
  size_t open_sent = 0;
  Bytes theta;
  Bytes kept_bits, kept_bases;
  Bytes mask0, mask1;
  Bytes diag0, diag1, masked0, masked1;
  Bytes output;
};

}  // namespace

MachineSpec alice_machine(const ProtocolParams& p, const AliceOptions& opts) {
  MachineSpec spec;
  spec.id = kAliceId;
  AliceState init;
  if (opts.fixture_seed) {
    init.fixture = true;
    init.rng.seed(*opts.fixture_seed);
  }
  spec.initial_state = init;
  const size_t m = p.m, n = p.n, ell = p.ell;
  const size_t commit_count = 2 * m;
  const size_t open_count = 2 * p.test_size();
  const bool chosen_input = opts.variant == Variant::ChosenInputOt;
  const bool clear = opts.commit_mode == CommitMode::Clear;

  spec.step = [=](LocalState& box, const Incoming& in, RunContext& ctx) {
    auto& st = std::any_cast<AliceState&>(box);
    auto parts = decode_tuple(in.msg.payload);

    auto draw_bits = [&](size_t len) {
      return st.fixture ? random_bit_string(st.rng, len) : ctx.bit_string(len);
    };
    auto draw_below = [&](uint64_t count) {
      return st.fixture ? uniform_below(st.rng, count) : uint64_t(ctx.choose_uniform(count));
    };

    auto after_commit = [&]() -> Outgoing {
      ++st.committed_count;
      if (st.committed_count < commit_count)
        return Outgoing::message(kAliceId, kBobId, kAckTag);
      uint64_t rank = draw_below(binomial(m, p.test_size()));
      st.test_set = unrank_subset(rank, m, p.test_size());
      st.test_mask = mask_from_indices(st.test_set, m);
      st.opened.assign(commit_count, '?');
      st.phase = 2;
      return Outgoing::message(kAliceId, kBobId, encode_tuple({kTestSetTag, st.test_mask}));
    };

    auto after_open = [&]() -> Outgoing {
      ++st.opened_count;
      if (st.opened_count < open_count) return Outgoing::message(kAliceId, kBobId, kAckTag);
      for (size_t i : st.test_set) {
        char theta_b = basis_from_bit(st.opened[2 * i]);
        char x_b = st.opened[2 * i + 1];
        if (st.raw_bases[i] == theta_b && st.raw_bits[i] != x_b) {
          st.aborted = true;
          st.phase = 5;
          return Outgoing::message(kAliceId, kEnvironmentId, kAbortPayload);
        }
      }
      st.kept_bits = drop_masked(st.raw_bits, st.test_mask);
      st.kept_bases = drop_masked(st.raw_bases, st.test_mask);
      st.phase = 3;
      return Outgoing::message(kAliceId, kBobId, encode_tuple({kBasesTag, st.kept_bases}));
    };

    // environment line: start / chosen inputs / nudges
    if (in.msg.sender == kEnvironmentId) {
      if (st.phase == 0) {
        if (chosen_input) {
          if (!parts || parts->size() != 2 || (*parts)[0].size() != ell ||
              (*parts)[1].size() != ell || !valid_bits((*parts)[0]) || !valid_bits((*parts)[1]))
            return Outgoing::none();
          st.in0 = (*parts)[0];
          st.in1 = (*parts)[1];
        }
        st.raw_bits = draw_bits(m);
        Bytes basis_bits = draw_bits(m);
        st.raw_bases.clear();
        for (char b : basis_bits) st.raw_bases.push_back(basis_from_bit(b));
        st.commit_seen.assign(commit_count, '?');
        if (clear) st.clear_committed.assign(commit_count, '?');
        auto reg = ctx.pool().encode_bb84(st.raw_bits, qcore::bases_from_string(st.raw_bases));
        st.phase = 1;
        return Outgoing::message(kAliceId, kBobId, kQubitsTag, std::move(reg));
      }
      if (st.phase == 4) {
        st.phase = 5;
        return Outgoing::message(kAliceId, kBobId, st.pending_payload);
      }
      return Outgoing::none();
    }

    // commitment confirmations
    if (!clear && st.phase == 1 && in.msg.payload == kCommittedTag) {
      for (size_t j = 0; j < commit_count; ++j) {
        if (in.msg.sender == com_id(j) && st.commit_seen[j] == '?') {
          st.commit_seen[j] = '1';
          return after_commit();
        }
      }
      return Outgoing::none();
    }
    if (clear && st.phase == 1 && in.msg.sender == kBobId && parts && parts->size() == 4 &&
        (*parts)[0] == kClearComTag && (*parts)[2] == kCommitTag && (*parts)[3].size() == 1 &&
        valid_bits((*parts)[3])) {
      size_t j = size_t(std::strtoull((*parts)[1].c_str(), nullptr, 10));
      if (j < commit_count && st.clear_committed[j] == '?') {
        st.clear_committed[j] = (*parts)[3][0];
        return after_commit();
      }
      return Outgoing::none();
    }

    // openings
    if (!clear && st.phase == 2 && parts && parts->size() == 2 && (*parts)[0] == kOpenTag &&
        (*parts)[1].size() == 1 && valid_bits((*parts)[1])) {
      for (size_t i : st.test_set) {
        for (size_t j : {2 * i, 2 * i + 1}) {
          if (in.msg.sender == com_id(j) && st.opened[j] == '?') {
            st.opened[j] = (*parts)[1][0];
            return after_open();
          }
        }
      }
      return Outgoing::none();
    }
    if (clear && st.phase == 2 && in.msg.sender == kBobId && parts && parts->size() == 3 &&
        (*parts)[0] == kClearComTag && (*parts)[2] == kOpenTag) {
      size_t j = size_t(std::strtoull((*parts)[1].c_str(), nullptr, 10));
      bool in_test = false;
      for (size_t i : st.test_set) in_test |= (j == 2 * i || j == 2 * i + 1);
      if (in_test && j < commit_count && st.clear_committed[j] != '?' && st.opened[j] == '?') {
        st.opened[j] = st.clear_committed[j];
        return after_open();
      }
      return Outgoing::none();
    }

    // index sets -> sample strings and hashes
    if (st.phase == 3 && in.msg.sender == kBobId && parts && parts->size() == 3 &&
        (*parts)[0] == kPartitionTag) {
      const Bytes& mask0 = (*parts)[1];
      const Bytes& mask1 = (*parts)[2];
      if (!valid_partition(mask0, mask1, n)) return Outgoing::none();
      st.out0 = draw_bits(ell);
      st.out1 = draw_bits(ell);
      st.diag0 = draw_bits(p.diag_len());
      st.diag1 = draw_bits(p.diag_len());
      auto h0 = hash_from_bits(st.diag0, n, ell);
      auto h1 = hash_from_bits(st.diag1, n, ell);
      st.masked0 = xor_bits(st.out0, h0.eval(restrict_bits(st.kept_bits, mask0)));
      st.masked1 = xor_bits(st.out1, h1.eval(restrict_bits(st.kept_bits, mask1)));
      if (chosen_input) {
        Bytes t0 = xor_bits(st.out0, st.in0);
        Bytes t1 = xor_bits(st.out1, st.in1);
        st.phase = 5;
        return Outgoing::message(
            kAliceId, kBobId,
            encode_tuple({kMasksPadsTag, st.diag0, st.diag1, st.masked0, st.masked1, t0, t1}));
      }
      // randomized variant: hand (s0, s1) to the environment first, release
      // the masks message on the next activation
      st.pending_payload =
          encode_tuple({kMasksTag, st.diag0, st.diag1, st.masked0, st.masked1});
      st.phase = 4;
      return Outgoing::message(kAliceId, kEnvironmentId, encode_tuple({st.out0, st.out1}));
    }

    return Outgoing::none();
  };
  return spec;
}

// --- Bob -------------------------------------------------------------------------

MachineSpec bob_machine(const ProtocolParams& p, const BobOptions& opts) {
  MachineSpec spec;
  spec.id = kBobId;
  spec.initial_state = BobState{};
  const size_t m = p.m, n = p.n, ell = p.ell;
  const size_t commit_count = 2 * m;
  const size_t open_count = 2 * p.test_size();
  const bool chosen_input = opts.variant == Variant::ChosenInputOt;
  const bool clear = opts.commit_mode == CommitMode::Clear;
  const bool sim = opts.simulator_mode;
  const auto forced = opts.forced_bases;

  spec.step = [=](LocalState& box, const Incoming& in, RunContext& ctx) {
    auto& st = std::any_cast<BobState&>(box);
    auto parts = decode_tuple(in.msg.payload);

    auto commit_payload = [&](size_t j) -> Bytes {
      if (sim) return kCommitTag;  // equivocal: value supplied at open time
      size_t i = j / 2;
      Bytes bit(1, (j % 2 == 0) ? basis_bit(st.bases[i]) : st.bits[i]);
      if (clear)
        return encode_tuple({kClearComTag, std::to_string(j), kCommitTag, bit});
      return encode_tuple({kCommitTag, bit});
    };
    auto send_commit = [&](size_t j) {
      Bytes payload = commit_payload(j);
      st.commit_sent = j + 1;
      return Outgoing::message(kBobId, clear ? kAliceId : com_id(j), std::move(payload));
    };
    auto open_payload = [&](size_t k) -> Bytes {
      size_t i = st.test_set[k / 2];
      size_t j = 2 * i + (k % 2);
      if (sim && k % 2 == 0) {
        // measure this test qubit now, in a freshly drawn basis, and open that
        st.bases[i] = ctx.coin() ? 'x' : '+';
        qcore::QubitRegister one{{st.qubits.handles[i]}};
        qcore::Basis b[1] = {qcore::basis_from_char(st.bases[i])};
        st.bits[i] = ctx.pool().measure_in_bases(one, b, ctx)[0];
      }
      Bytes bit(1, (j % 2 == 0) ? basis_bit(st.bases[i]) : st.bits[i]);
      if (clear) return encode_tuple({kClearComTag, std::to_string(j), kOpenTag});
      if (sim) return encode_tuple({kOpenTag, bit});
      return kOpenTag;
    };
    auto send_open = [&](size_t k) {
      size_t j = 2 * st.test_set[k / 2] + (k % 2);
      Bytes payload = open_payload(k);
      st.open_sent = k + 1;
      return Outgoing::message(kBobId, clear ? kAliceId : com_id(j), std::move(payload));
    };

    auto send_partition = [&]() -> Outgoing {
      st.kept_bases = drop_masked(st.bases, st.test_mask);
      if (sim) {
        // measure the kept qubits in the announced bases and pick the index
        // sets as a fresh uniform partition
        qcore::QubitRegister kept;
        for (size_t i = 0; i < m; ++i)
          if (st.test_mask[i] == '0') kept.handles.push_back(st.qubits.handles[i]);
        Bytes outcomes =
            ctx.pool().measure_in_bases(kept, qcore::bases_from_string(st.theta), ctx);
        st.kept_bits = outcomes;
        st.mask0 = ctx.bit_string(n);
        st.mask1.clear();
        for (char c : st.mask0) st.mask1.push_back(c == '1' ? '0' : '1');
      } else {
        st.kept_bits = drop_masked(st.bits, st.test_mask);
        Bytes match(n, '0');
        for (size_t r = 0; r < n; ++r)
          match[r] = (st.theta[r] == st.kept_bases[r]) ? '1' : '0';
        Bytes mismatch(n, '0');
        for (size_t r = 0; r < n; ++r) mismatch[r] = match[r] == '1' ? '0' : '1';
        st.mask0 = st.choice == 0 ? match : mismatch;
        st.mask1 = st.choice == 0 ? mismatch : match;
      }
      st.phase = 3;
      return Outgoing::message(kBobId, kAliceId,
                               encode_tuple({kPartitionTag, st.mask0, st.mask1}));
    };

    // choice bit from the environment (buffered; may arrive at any point)
    if (in.msg.sender == kEnvironmentId) {
      if (st.choice < 0 && (in.msg.payload == "0" || in.msg.payload == "1")) {
        st.choice = in.msg.payload == "1" ? 1 : 0;
        if (st.phase == 5) return send_partition();  // bases already announced
      }
      return Outgoing::none();
    }

    if (in.msg.sender == kAliceId && in.msg.payload == kQubitsTag && st.phase == 0) {
      if (in.qreg.size() != m) return Outgoing::none();
      st.qubits = in.qreg;
      st.bases.assign(m, '?');
      st.bits.assign(m, '?');
      if (!sim) {
        if (forced) {
          st.bases = qcore::bases_to_string(*forced);
        } else {
          Bytes basis_bits = ctx.bit_string(m);
          for (size_t i = 0; i < m; ++i) st.bases[i] = basis_from_bit(basis_bits[i]);
        }
        st.bits = ctx.pool().measure_in_bases(st.qubits, qcore::bases_from_string(st.bases), ctx);
      }
      st.phase = 1;
      return send_commit(0);
    }

    if (in.msg.sender == kAliceId && in.msg.payload == kAckTag) {
      if (st.phase == 1 && st.commit_sent < commit_count) return send_commit(st.commit_sent);
      if (st.phase == 2 && st.open_sent < open_count) return send_open(st.open_sent);
      return Outgoing::none();
    }

    if (in.msg.sender == kAliceId && st.phase == 1 && st.commit_sent == commit_count &&
        parts && parts->size() == 2 && (*parts)[0] == kTestSetTag) {
      const Bytes& mask = (*parts)[1];
      if (mask.size() != m || !valid_bits(mask)) return Outgoing::none();
      if (indices_from_mask(mask).size() != p.test_size()) return Outgoing::none();
      st.test_mask = mask;
      st.test_set = indices_from_mask(mask);
      st.phase = 2;
      return send_open(0);
    }

    if (in.msg.sender == kAliceId && st.phase == 2 && st.open_sent == open_count && parts &&
        parts->size() == 2 && (*parts)[0] == kBasesTag) {
      const Bytes& theta = (*parts)[1];
      if (theta.size() != n) return Outgoing::none();
      for (char c : theta)
        if (c != '+' && c != 'x') return Outgoing::none();
      st.theta = theta;
      if (!sim && st.choice < 0) {
        st.phase = 5;  // wait for the choice bit
        return Outgoing::none();
      }
      return send_partition();
    }

    if (in.msg.sender == kAliceId && st.phase == 3 && parts &&
        parts->size() == (chosen_input ? 7u : 5u) &&
        (*parts)[0] == (chosen_input ? kMasksPadsTag : kMasksTag)) {
      const Bytes& d0 = (*parts)[1];
      const Bytes& d1 = (*parts)[2];
      const Bytes& m0 = (*parts)[3];
      const Bytes& m1 = (*parts)[4];
      if (d0.size() != p.diag_len() || d1.size() != p.diag_len() || m0.size() != ell ||
          m1.size() != ell || !valid_bits(d0) || !valid_bits(d1) || !valid_bits(m0) ||
          !valid_bits(m1))
        return Outgoing::none();
      if (chosen_input &&
          ((*parts)[5].size() != ell || (*parts)[6].size() != ell ||
           !valid_bits((*parts)[5]) || !valid_bits((*parts)[6])))
        return Outgoing::none();
      st.diag0 = d0;
      st.diag1 = d1;
      st.masked0 = m0;
      st.masked1 = m1;
      auto h0 = hash_from_bits(d0, n, ell);
      auto h1 = hash_from_bits(d1, n, ell);
      if (sim) {
        Bytes s0 = xor_bits(m0, h0.eval(restrict_bits(st.kept_bits, st.mask0)));
        Bytes s1 = xor_bits(m1, h1.eval(restrict_bits(st.kept_bits, st.mask1)));
        st.phase = 4;
        return Outgoing::message(kBobId, kEnvironmentId, encode_tuple({kStringsPairTag, s0, s1}));
      }
      const auto& h = st.choice == 0 ? h0 : h1;
      const Bytes& mask = st.choice == 0 ? st.mask0 : st.mask1;
      const Bytes& mc = st.choice == 0 ? m0 : m1;
      Bytes s = xor_bits(mc, h.eval(restrict_bits(st.kept_bits, mask)));
      if (chosen_input) s = xor_bits(s, (*parts)[5 + st.choice]);
      st.output = s;
      st.phase = 4;
      return Outgoing::message(kBobId, kEnvironmentId, s);
    }

    return Outgoing::none();
  };
  return spec;
}

// --- networks ----------------------------------------------------------------------

namespace {

Network two_party_net(const ProtocolParams& p, Variant variant, CommitMode mode) {
  Network net;
  net.add(alice_machine(p, AliceOptions{variant, mode}));
  net.add(bob_machine(p, BobOptions{variant, mode}));
  if (mode == CommitMode::Functionality)
    for (size_t j = 0; j < 2 * p.m; ++j) net.add(idealfunc::f_com(1, com_id(j), kBobId, kAliceId));
  net.parties = {kAliceId, kBobId};
  return net;
}

struct HybridAliceState {
  int phase = 0;
  Bytes in0, in1;
};

struct HybridBobState {
  int choice = -1;
  Bytes s, t0, t1;
  bool have_pads = false;
  bool done = false;
};

}  // namespace

Network qrot_network(const ProtocolParams& p) {
  return two_party_net(p, Variant::RandomizedOt, CommitMode::Functionality);
}

Network qrot_clear_network(const ProtocolParams& p) {
  return two_party_net(p, Variant::RandomizedOt, CommitMode::Clear);
}

Network qot_network(const ProtocolParams& p) {
  return two_party_net(p, Variant::ChosenInputOt, CommitMode::Functionality);
}

Network qot_hybrid_network(const ProtocolParams& p) {
  const size_t ell = p.ell;
  Network net;

  MachineSpec alice;
  alice.id = kAliceId;
  alice.classical = true;
  alice.initial_state = HybridAliceState{};
  alice.step = [ell](LocalState& box, const Incoming& in, RunContext&) {
    auto& st = std::any_cast<HybridAliceState&>(box);
    auto parts = decode_tuple(in.msg.payload);
    if (in.msg.sender == kEnvironmentId) {
      if (st.phase == 0) {
        if (!parts || parts->size() != 2 || (*parts)[0].size() != ell ||
            (*parts)[1].size() != ell || !valid_bits((*parts)[0]) || !valid_bits((*parts)[1]))
          return Outgoing::none();
        st.in0 = (*parts)[0];
        st.in1 = (*parts)[1];
        st.phase = 1;
      }
      // first poke starts the functionality line, later pokes nudge it
      return Outgoing::message(kAliceId, kRotId, "");
    }
    if (in.msg.sender == kRotId && st.phase == 1 && parts && parts->size() == 2 &&
        (*parts)[0].size() == ell && (*parts)[1].size() == ell) {
      Bytes t0 = xor_bits(st.in0, (*parts)[0]);
      Bytes t1 = xor_bits(st.in1, (*parts)[1]);
      st.phase = 2;
      return Outgoing::message(kAliceId, kBobId, encode_tuple({"t", t0, t1}));
    }
    return Outgoing::none();
  };
  net.add(std::move(alice));

  MachineSpec bob;
  bob.id = kBobId;
  bob.classical = true;
  bob.initial_state = HybridBobState{};
  bob.step = [ell](LocalState& box, const Incoming& in, RunContext&) {
    auto& st = std::any_cast<HybridBobState&>(box);
    auto parts = decode_tuple(in.msg.payload);
    if (in.msg.sender == kEnvironmentId && st.choice < 0 &&
        (in.msg.payload == "0" || in.msg.payload == "1")) {
      st.choice = in.msg.payload == "1" ? 1 : 0;
      return Outgoing::message(kBobId, kRotId, in.msg.payload);
    }
    if (in.msg.sender == kRotId && st.s.empty() && in.msg.payload.size() == ell &&
        valid_bits(in.msg.payload))
      st.s = in.msg.payload;
    else if (in.msg.sender == kAliceId && !st.have_pads && parts && parts->size() == 3 &&
             (*parts)[0] == "t" && (*parts)[1].size() == ell && (*parts)[2].size() == ell) {
      st.t0 = (*parts)[1];
      st.t1 = (*parts)[2];
      st.have_pads = true;
    }
    if (!st.done && !st.s.empty() && st.have_pads) {
      st.done = true;
      return Outgoing::message(kBobId, kEnvironmentId,
                               xor_bits(st.s, st.choice == 1 ? st.t1 : st.t0));
    }
    return Outgoing::none();
  };
  net.add(std::move(bob));

  net.add(idealfunc::f_rot(ell, kRotId, kAliceId, kBobId, /*sender_corrupted=*/false));
  net.parties = {kAliceId, kBobId};
  return net;
}

Network ideal_rot_network(const ProtocolParams& p, const std::vector<MachineId>& corrupted) {
  auto is_corrupted = [&](const MachineId& id) {
    return std::find(corrupted.begin(), corrupted.end(), id) != corrupted.end();
  };
  Network net;
  for (const auto& party : {kAliceId, kBobId}) {
    if (is_corrupted(party))
      net.add(netexec::make_corruption_party(party));
    else
      net.add(netexec::make_dummy_party(party, kRotId));
  }
  net.add(idealfunc::f_rot(p.ell, kRotId, kAliceId, kBobId, is_corrupted(kAliceId)));
  net.parties = {kAliceId, kBobId};
  return net;
}

AliceView alice_view(const netexec::LocalState& box) {
  const auto& st = std::any_cast<const AliceState&>(box);
  AliceView v;
  v.raw_bits = st.raw_bits;
  v.raw_bases = st.raw_bases;
  v.out0 = st.out0;
  v.out1 = st.out1;
  v.aborted = st.aborted;
  v.done = st.phase == 5;
  return v;
}

BobView bob_view(const netexec::LocalState& box) {
  const auto& st = std::any_cast<const BobState&>(box);
  BobView v;
  v.choice = st.choice;
  v.bases = st.bases;
  v.bits = st.bits;
  v.test_mask = st.test_mask;
  v.theta = st.theta;
  v.diag0 = st.diag0;
  v.diag1 = st.diag1;
  v.mask0 = st.mask0;
  v.mask1 = st.mask1;
  v.masked0 = st.masked0;
  v.masked1 = st.masked1;
  v.output = st.output;
  v.done = st.phase == 4;
  return v;
}

}  // namespace quclab::otproto
