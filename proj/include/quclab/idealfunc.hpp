#pragma once

#include "quclab/netexec.hpp"

namespace quclab::idealfunc {

using netexec::MachineId;
using netexec::MachineSpec;

// Payload conventions (bit strings travel as ASCII '0'/'1'):
//   commit to x   : tuple("commit", x)
//   committed     : "committed"
//   open          : "open"                  (equivocal variant: tuple("open", x))
//   opened value  : tuple("open", x)
//   OT sender in  : tuple(s0, s1)
//   choice bit in : "0" / "1"

inline const Bytes kCommitTag = "commit";
inline const Bytes kCommittedTag = "committed";
inline const Bytes kOpenTag = "open";

// Commitment functionality: binding and hiding by construction. First
// (commit, x) from the sender is stored; open releases exactly that x.
MachineSpec f_com(size_t ell, MachineId id, MachineId sender, MachineId recipient);

// Equivocal commitment: the commit phase carries no value, the open phase
// supplies it. Used only inside simulators.
MachineSpec f_com_equivocal(size_t ell, MachineId id, MachineId sender, MachineId recipient);

// Oblivious transfer: sender gives (s0, s1), receiver gives c, receiver
// learns s_c, sender learns nothing. Inputs buffered in either order.
MachineSpec f_ot(size_t ell, MachineId id, MachineId sender, MachineId receiver);

// Randomized OT. With an honest sender the two strings are sampled inside
// the functionality; output delivery is aligned to the activation pattern of
// the commitment-based protocol (sender-side pings release the outputs).
// With a corrupted sender it accepts (s0, s1) like plain OT.
MachineSpec f_rot(size_t ell, MachineId id, MachineId sender, MachineId receiver,
                  bool sender_corrupted);

// AND gate: both parties receive a*b.
MachineSpec f_and(MachineId id, MachineId alice, MachineId bob);

// Commitment protocol that sends the committed value in the clear during the
// commit phase. Trivially extractable, statistically binding, not hiding.
struct TrivialCommitment {
  MachineSpec sender;
  MachineSpec recipient;
};
TrivialCommitment trivial_commitment_protocol(MachineId sender_id, MachineId recipient_id);

// Reads the committed value out of a clear commit-phase payload.
std::optional<Bytes> extract_committed(const Bytes& commit_payload);

}  // namespace quclab::idealfunc
