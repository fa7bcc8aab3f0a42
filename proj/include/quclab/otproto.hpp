#pragma once

#include <optional>

#include "quclab/idealfunc.hpp"
#include "quclab/netexec.hpp"
#include "quclab/qcore.hpp"

namespace quclab::otproto {

using netexec::MachineId;
using netexec::MachineSpec;
using netexec::Network;
using qcore::Basis;

// Parameters: m qubits on the wire, n kept after the consistency test on the
// other m-n, outputs of length ell extracted by universal hashing.
struct ProtocolParams {
  size_t n = 0;
  size_t m = 0;
  size_t ell = 0;

  static ProtocolParams direct(size_t n, size_t m, size_t ell);
  // m = ceil(n / (1 - alpha)), ell = floor(lambda * n); alpha in (0,1),
  // lambda in (0, 1/4).
  static ProtocolParams from_rates(size_t n, double alpha, double lambda);
  // Default experiment profile: n = 4k, alpha = 1/3, lambda = 1/8.
  static ProtocolParams from_security_parameter(unsigned k, double alpha = 1.0 / 3.0,
                                                double lambda = 0.125);

  size_t test_size() const { return m - n; }
  size_t diag_len() const { return n + ell - 1; }
};

// --- universal hashing ---------------------------------------------------------
// Toeplitz matrix over GF(2), row i = diagonals[i .. i+input_len-1].
// Inputs shorter than input_len are zero-padded on the right.

struct ToeplitzHash {
  Bytes diagonals;  // '0'/'1', length input_len + ell - 1
  size_t input_len = 0;
  size_t ell = 0;

  Bytes eval(const Bytes& x) const;
};

ToeplitzHash hash_from_bits(Bytes diagonals, size_t input_len, size_t ell);
ToeplitzHash hash_sample(size_t input_len, size_t ell, Rng& rng);

// --- wire format ----------------------------------------------------------------
// Message payloads between the parties (bit strings are ASCII '0'/'1',
// index sets are mask strings, bases are '+'/'x' strings):
//   qubits        : "q" (the quantum register carries the m qubits)
//   ack           : "ack" (receiver-side continuation for commit/open rounds)
//   test set      : tuple("T", mask_m)
//   kept bases    : tuple("theta", bases_n)
//   index sets    : tuple("I0I1", mask0_n, mask1_n)
//   masks         : tuple("fm", diag0, diag1, m0, m1)            (randomized OT)
//                   tuple("fmt", diag0, diag1, m0, m1, t0, t1)   (chosen-input OT)
//   clear commits : tuple("com", j, "commit", bit) / tuple("com", j, "open")
//   abort         : "abort" (sender output to the environment)
// Sender output to the environment is tuple(s0, s1); receiver output is the
// extracted bit string itself.

inline const Bytes kQubitsTag = "q";
inline const Bytes kAckTag = "ack";
inline const Bytes kTestSetTag = "T";
inline const Bytes kBasesTag = "theta";
inline const Bytes kPartitionTag = "I0I1";
inline const Bytes kMasksTag = "fm";
inline const Bytes kMasksPadsTag = "fmt";
inline const Bytes kClearComTag = "com";
inline const Bytes kAbortPayload = "abort";
inline const Bytes kStringsPairTag = "s0s1";  // simulator boundary feed

inline const MachineId kAliceId = "Alice";
inline const MachineId kBobId = "Bob";
inline const MachineId kRotId = "rot";
inline const MachineId kOtId = "ot";

MachineId com_id(size_t j);
std::vector<MachineId> com_ids(const ProtocolParams& p);

Bytes mask_from_indices(const std::vector<size_t>& indices, size_t len);
std::vector<size_t> indices_from_mask(const Bytes& mask);
Bytes restrict_bits(const Bytes& bits, const Bytes& mask);

// --- protocol machines -----------------------------------------------------------

enum class Variant { RandomizedOt, ChosenInputOt };
enum class CommitMode { Functionality, Clear };

struct AliceOptions {
  Variant variant = Variant::RandomizedOt;
  CommitMode commit_mode = CommitMode::Functionality;
  // Test fixture: draw Alice's randomness from this seed instead of the
  // execution's choice source, so exhaustive runs do not enumerate it.
  std::optional<uint64_t> fixture_seed;
};

struct BobOptions {
  Variant variant = Variant::RandomizedOt;
  CommitMode commit_mode = CommitMode::Functionality;
  // Simulator construction: commitments are equivocal, test-index qubits are
  // measured only when opened, kept qubits are measured in the announced
  // bases, the index sets are a fresh uniform partition, and the final step
  // emits tuple("s0s1", s0, s1) toward the environment boundary instead of a
  // receiver output.
  bool simulator_mode = false;
  std::optional<std::vector<Basis>> forced_bases;  // test fixture
};

MachineSpec alice_machine(const ProtocolParams& p, const AliceOptions& opts = {});
MachineSpec bob_machine(const ProtocolParams& p, const BobOptions& opts = {});

// --- networks ---------------------------------------------------------------------

// Randomized OT from commitments: Alice, Bob and 2m single-bit commitment
// functionality instances. Parties: {Alice, Bob}.
Network qrot_network(const ProtocolParams& p);

// Same protocol with commitments sent in the clear (trivially extractable).
Network qrot_clear_network(const ProtocolParams& p);

// Chosen-input OT: Alice takes (v0, v1) and additionally sends t_i = s_i + v_i.
Network qot_network(const ProtocolParams& p);

// Chosen-input OT in the randomized-OT-hybrid model: one-time-pad on top of
// a rot functionality machine.
Network qot_hybrid_network(const ProtocolParams& p);

// Ideal randomized-OT protocol: dummy parties plus the rot functionality
// (honest parties replaced by corruption parties per `corrupted`).
Network ideal_rot_network(const ProtocolParams& p, const std::vector<MachineId>& corrupted);

// Peeks into machine state boxes (used by experiment leaf keys).
struct AliceView {
  Bytes raw_bits;   // encoded bits
  Bytes raw_bases;  // encoding bases
  Bytes out0, out1;  // s0, s1 once sampled
  bool aborted = false;
  bool done = false;
};
struct BobView {
  int choice = -1;
  Bytes bases;      // raw measurement bases, '+'/'x'
  Bytes bits;       // raw measurement outcomes
  Bytes test_mask;  // T
  Bytes theta;      // announced kept bases
  Bytes diag0, diag1, mask0, mask1, masked0, masked1;
  Bytes output;
  bool done = false;
};
AliceView alice_view(const netexec::LocalState& box);
BobView bob_view(const netexec::LocalState& box);

}  // namespace quclab::otproto
