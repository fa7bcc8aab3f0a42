#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "quclab/common.hpp"

namespace quclab::qcore {

using Amp = std::complex<double>;

// Conjugate-coding bases: Plus is the computational basis, Times the diagonal.
enum class Basis : uint8_t { Plus, Times };

inline char basis_char(Basis b) { return b == Basis::Plus ? '+' : 'x'; }

inline Basis basis_from_char(char c) {
  if (c == '+') return Basis::Plus;
  if (c == 'x') return Basis::Times;
  throw Error("basis_from_char: bad basis char");
}

Bytes bases_to_string(std::span<const Basis> bases);
std::vector<Basis> bases_from_string(const Bytes& s);

// Where a machine's random/measurement outcomes come from. Sampled runs draw
// from a seeded RNG; exhaustive runs fork the execution on every call.
class ChoiceSource {
 public:
  virtual ~ChoiceSource() = default;
  // Picks an index with the given probabilities (must sum to ~1).
  virtual size_t choose(std::span<const double> probs) = 0;
  // Uniform pick from n alternatives.
  virtual size_t choose_uniform(size_t n) = 0;

  bool coin() { return choose_uniform(2) == 1; }
  Bytes bit_string(size_t len);
};

// Dense pure state over a fixed number of qubits.
class StateVector {
 public:
  explicit StateVector(size_t num_qubits, size_t cap = kDefaultQubitCap);

  static constexpr size_t kDefaultQubitCap = 20;

  size_t num_qubits() const { return num_qubits_; }
  std::span<const Amp> amplitudes() const { return amps_; }
  std::span<Amp> amplitudes() { return amps_; }

  void set_basis_state(size_t index);
  void apply_unitary(std::span<const size_t> targets, std::span<const Amp> matrix);
  double prob_one(size_t target) const;
  void collapse(size_t target, int outcome, double prob);
  double norm_error() const;

 private:
  size_t num_qubits_;
  std::vector<Amp> amps_;
};

// Handles into the per-execution qubit pool.
using QubitId = uint32_t;

struct QubitRegister {
  std::vector<QubitId> handles;

  size_t size() const { return handles.size(); }
  bool empty() const { return handles.empty(); }
};

// Pool of allocated qubits for one execution. The pool keeps the global state
// factored into independent StateVector blocks and only merges factors when a
// gate or measurement spans more than one of them, so product-state protocols
// stay cheap to copy no matter how many qubits are in flight.
class QubitPool {
 public:
  explicit QubitPool(size_t cap = StateVector::kDefaultQubitCap) : cap_(cap) {}

  size_t qubit_cap() const { return cap_; }
  size_t num_qubits() const;

  // Allocates |bits⟩ encoded qubit-wise in the given bases.
  QubitRegister encode_bb84(const Bytes& bits, std::span<const Basis> bases);

  // Measures reg qubit-by-qubit in the given bases; collapses the state.
  Bytes measure_in_bases(const QubitRegister& reg, std::span<const Basis> bases,
                         ChoiceSource& choice);

  // Embeds a 2^t x 2^t unitary acting on reg[targets].
  void apply_unitary(const QubitRegister& reg, std::span<const size_t> targets,
                     std::span<const Amp> matrix);

  // Computational-basis measurement of the whole register, outcome kept in
  // the collapsed state; removes any superposition across the register.
  void classicalize(const QubitRegister& reg, ChoiceSource& choice);

  // Born-rule outcome distribution of measuring reg in the given bases,
  // without disturbing the state.
  std::map<Bytes, double> exact_outcome_distribution(const QubitRegister& reg,
                                                     std::span<const Basis> bases) const;

  void release(const QubitRegister& reg, ChoiceSource& choice);

  double max_norm_error() const;

 private:
  struct Factor {
    std::vector<QubitId> qubits;
    StateVector state;
  };

  size_t factor_of(QubitId q) const;
  size_t position_in_factor(size_t f, QubitId q) const;
  // Merges all factors containing the given qubits into one; returns its index.
  size_t merge_factors(std::span<const QubitId> qubits);
  int measure_qubit(QubitId q, Basis basis, ChoiceSource& choice);

  size_t cap_;
  QubitId next_id_ = 0;
  std::vector<Factor> factors_;
};

// Single-qubit gate constants.
extern const Amp kHadamard[4];
extern const Amp kPauliX[4];
extern const Amp kIdentity2[4];

void check_unitary(std::span<const Amp> matrix, size_t dim);

}  // namespace quclab::qcore
