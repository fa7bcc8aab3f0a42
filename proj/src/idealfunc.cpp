#include "quclab/idealfunc.hpp"

namespace quclab::idealfunc {

using netexec::Incoming;
using netexec::LocalState;
using netexec::Outgoing;
using netexec::RunContext;

namespace {

struct ComState {
  int phase = 0;  // 0 empty, 1 committed, 2 opened
  Bytes value;
};

bool is_bit(const Bytes& p) { return p == "0" || p == "1"; }

}  // namespace

MachineSpec f_com(size_t ell, MachineId id, MachineId sender, MachineId recipient) {
  if (ell < 1) throw Error("f_com: ell must be >= 1");
  MachineSpec spec;
  spec.id = id;
  spec.classical = true;
  spec.initial_state = ComState{};
  spec.step = [=](LocalState& box, const Incoming& in, RunContext&) {
    auto& st = std::any_cast<ComState&>(box);
    if (in.msg.sender != sender) return Outgoing::none();
    if (st.phase == 0) {
      auto parts = decode_tuple(in.msg.payload);
      if (parts && parts->size() == 2 && (*parts)[0] == kCommitTag &&
          (*parts)[1].size() == ell && valid_bits((*parts)[1])) {
        st.phase = 1;
        st.value = (*parts)[1];
        return Outgoing::message(id, recipient, kCommittedTag);
      }
      return Outgoing::none();
    }
    if (st.phase == 1 && in.msg.payload == kOpenTag) {
      st.phase = 2;
      return Outgoing::message(id, recipient, encode_tuple({kOpenTag, st.value}));
    }
    return Outgoing::none();
  };
  return spec;
}

MachineSpec f_com_equivocal(size_t ell, MachineId id, MachineId sender, MachineId recipient) {
  if (ell < 1) throw Error("f_com_equivocal: ell must be >= 1");
  MachineSpec spec;
  spec.id = id;
  spec.classical = true;
  spec.initial_state = ComState{};
  spec.step = [=](LocalState& box, const Incoming& in, RunContext&) {
    auto& st = std::any_cast<ComState&>(box);
    if (in.msg.sender != sender) return Outgoing::none();
    if (st.phase == 0 && in.msg.payload == kCommitTag) {
      st.phase = 1;
      return Outgoing::message(id, recipient, kCommittedTag);
    }
    if (st.phase == 1) {
      auto parts = decode_tuple(in.msg.payload);
      if (parts && parts->size() == 2 && (*parts)[0] == kOpenTag && (*parts)[1].size() == ell &&
          valid_bits((*parts)[1])) {
        st.phase = 2;
        return Outgoing::message(id, recipient, encode_tuple({kOpenTag, (*parts)[1]}));
      }
    }
    return Outgoing::none();
  };
  return spec;
}

namespace {

struct OtState {
  bool have_strings = false;
  Bytes s0, s1;
  int choice = -1;
  bool delivered = false;
};

Outgoing ot_step(OtState& st, const Incoming& in, size_t ell, const MachineId& id,
                 const MachineId& sender, const MachineId& receiver) {
  if (in.msg.sender == sender && !st.have_strings) {
    auto parts = decode_tuple(in.msg.payload);
    if (parts && parts->size() == 2 && (*parts)[0].size() == ell && (*parts)[1].size() == ell &&
        valid_bits((*parts)[0]) && valid_bits((*parts)[1])) {
      st.have_strings = true;
      st.s0 = (*parts)[0];
      st.s1 = (*parts)[1];
    }
  } else if (in.msg.sender == receiver && st.choice < 0 && is_bit(in.msg.payload)) {
    st.choice = in.msg.payload == "1" ? 1 : 0;
  }
  if (st.have_strings && st.choice >= 0 && !st.delivered) {
    st.delivered = true;
    return Outgoing::message(id, receiver, st.choice ? st.s1 : st.s0);
  }
  return Outgoing::none();
}

struct RotState {
  int choice = -1;
  bool sender_pinged = false;
  bool fired = false;
  bool delivered = false;
  Bytes s0, s1;
};

}  // namespace

MachineSpec f_ot(size_t ell, MachineId id, MachineId sender, MachineId receiver) {
  if (ell < 1) throw Error("f_ot: ell must be >= 1");
  MachineSpec spec;
  spec.id = id;
  spec.classical = true;
  spec.initial_state = OtState{};
  spec.step = [=](LocalState& box, const Incoming& in, RunContext&) {
    return ot_step(std::any_cast<OtState&>(box), in, ell, id, sender, receiver);
  };
  return spec;
}

MachineSpec f_rot(size_t ell, MachineId id, MachineId sender, MachineId receiver,
                  bool sender_corrupted) {
  if (ell < 1) throw Error("f_rot: ell must be >= 1");
  MachineSpec spec;
  spec.id = id;
  spec.classical = true;
  if (sender_corrupted) {
    spec.initial_state = OtState{};
    spec.step = [=](LocalState& box, const Incoming& in, RunContext&) {
      return ot_step(std::any_cast<OtState&>(box), in, ell, id, sender, receiver);
    };
    return spec;
  }
  spec.initial_state = RotState{};
  spec.step = [=](LocalState& box, const Incoming& in, RunContext& ctx) {
    auto& st = std::any_cast<RotState&>(box);
    bool from_sender_side = in.msg.sender == sender;
    if (in.msg.sender == receiver && st.choice < 0 && is_bit(in.msg.payload))
      st.choice = in.msg.payload == "1" ? 1 : 0;
    if (from_sender_side) st.sender_pinged = true;

    if (!st.fired && st.choice >= 0 && st.sender_pinged) {
      st.fired = true;
      st.s0 = ctx.bit_string(ell);
      st.s1 = ctx.bit_string(ell);
      return Outgoing::message(id, sender, encode_tuple({st.s0, st.s1}));
    }
    if (st.fired && !st.delivered && from_sender_side) {
      st.delivered = true;
      return Outgoing::message(id, receiver, st.choice ? st.s1 : st.s0);
    }
    return Outgoing::none();
  };
  return spec;
}

namespace {
struct AndState {
  int a = -1, b = -1;
  int delivered = 0;
};
}  // namespace

MachineSpec f_and(MachineId id, MachineId alice, MachineId bob) {
  MachineSpec spec;
  spec.id = id;
  spec.classical = true;
  spec.initial_state = AndState{};
  spec.step = [=](LocalState& box, const Incoming& in, RunContext&) {
    auto& st = std::any_cast<AndState&>(box);
    if (in.msg.sender == alice && st.a < 0 && is_bit(in.msg.payload))
      st.a = in.msg.payload == "1";
    else if (in.msg.sender == bob && st.b < 0 && is_bit(in.msg.payload))
      st.b = in.msg.payload == "1";
    if (st.a >= 0 && st.b >= 0 && st.delivered < 2) {
      Bytes product = (st.a && st.b) ? "1" : "0";
      ++st.delivered;
      return Outgoing::message(id, st.delivered == 1 ? alice : bob, product);
    }
    return Outgoing::none();
  };
  return spec;
}

namespace {
struct ClearComState {
  bool committed = false;
  Bytes value;
};
}  // namespace

TrivialCommitment trivial_commitment_protocol(MachineId sender_id, MachineId recipient_id) {
  TrivialCommitment proto;

  proto.sender.id = sender_id;
  proto.sender.classical = true;
  proto.sender.initial_state = ClearComState{};
  proto.sender.step = [=](LocalState& box, const Incoming& in, RunContext&) {
    auto& st = std::any_cast<ClearComState&>(box);
    if (in.msg.sender != netexec::kEnvironmentId) return Outgoing::none();
    auto parts = decode_tuple(in.msg.payload);
    if (!st.committed && parts && parts->size() == 2 && (*parts)[0] == kCommitTag) {
      st.committed = true;
      st.value = (*parts)[1];
      return Outgoing::message(sender_id, recipient_id, encode_tuple({kCommitTag, st.value}));
    }
    if (st.committed && in.msg.payload == kOpenTag)
      return Outgoing::message(sender_id, recipient_id, kOpenTag);
    return Outgoing::none();
  };

  proto.recipient.id = recipient_id;
  proto.recipient.classical = true;
  proto.recipient.initial_state = ClearComState{};
  proto.recipient.step = [=](LocalState& box, const Incoming& in, RunContext&) {
    auto& st = std::any_cast<ClearComState&>(box);
    if (in.msg.sender != sender_id) return Outgoing::none();
    auto parts = decode_tuple(in.msg.payload);
    if (!st.committed && parts && parts->size() == 2 && (*parts)[0] == kCommitTag) {
      st.committed = true;
      st.value = (*parts)[1];
      return Outgoing::message(recipient_id, netexec::kEnvironmentId, kCommittedTag);
    }
    if (st.committed && in.msg.payload == kOpenTag)
      return Outgoing::message(recipient_id, netexec::kEnvironmentId,
                               encode_tuple({kOpenTag, st.value}));
    // an opening that names a value must match the committed one
    if (st.committed && parts && parts->size() == 2 && (*parts)[0] == kOpenTag) {
      if ((*parts)[1] == st.value)
        return Outgoing::message(recipient_id, netexec::kEnvironmentId,
                                 encode_tuple({kOpenTag, st.value}));
      return Outgoing::message(recipient_id, netexec::kEnvironmentId, "reject");
    }
    return Outgoing::none();
  };

  return proto;
}

std::optional<Bytes> extract_committed(const Bytes& commit_payload) {
  auto parts = decode_tuple(commit_payload);
  if (parts && parts->size() == 2 && (*parts)[0] == kCommitTag) return (*parts)[1];
  return std::nullopt;
}

}  // namespace quclab::idealfunc
