#include "quclab/qcore.hpp"

#include <algorithm>
#include <cmath>

#include "quclab/kernels.hpp"

namespace quclab::qcore {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

const Amp kHadamard[4] = {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
const Amp kPauliX[4] = {0, 1, 1, 0};
const Amp kIdentity2[4] = {1, 0, 0, 1};

Bytes bases_to_string(std::span<const Basis> bases) {
  Bytes s;
  s.reserve(bases.size());
  for (Basis b : bases) s.push_back(basis_char(b));
  return s;
}

std::vector<Basis> bases_from_string(const Bytes& s) {
  std::vector<Basis> out;
  out.reserve(s.size());
  for (char c : s) out.push_back(basis_from_char(c));
  return out;
}

Bytes ChoiceSource::bit_string(size_t len) {
  Bytes s(len, '0');
  // chunked forks keep any single branch point narrow without changing leaves
  size_t i = 0;
  while (i < len) {
    size_t chunk = std::min<size_t>(8, len - i);
    size_t v = choose_uniform(size_t(1) << chunk);
    for (size_t j = 0; j < chunk; ++j)
      s[i + j] = (v >> (chunk - 1 - j)) & 1 ? '1' : '0';
    i += chunk;
  }
  return s;
}

// --- StateVector ------------------------------------------------------------

StateVector::StateVector(size_t num_qubits, size_t cap) : num_qubits_(num_qubits) {
  if (num_qubits > cap) throw CapExceeded("StateVector: qubit count over cap");
  amps_.assign(size_t(1) << num_qubits, Amp(0));
  amps_[0] = 1;
}

void StateVector::set_basis_state(size_t index) {
  std::fill(amps_.begin(), amps_.end(), Amp(0));
  amps_.at(index) = 1;
}

void StateVector::apply_unitary(std::span<const size_t> targets, std::span<const Amp> matrix) {
  kernels::apply_gate(amps_, num_qubits_, targets, matrix);
}

double StateVector::prob_one(size_t target) const {
  return kernels::prob_one(amps_, num_qubits_, target);
}

void StateVector::collapse(size_t target, int outcome, double prob) {
  kernels::collapse(amps_, num_qubits_, target, outcome, prob);
}

double StateVector::norm_error() const {
  return std::abs(std::sqrt(kernels::norm_sq(amps_)) - 1.0);
}

void check_unitary(std::span<const Amp> matrix, size_t dim) {
  if (matrix.size() != dim * dim) throw NotUnitary("matrix has wrong shape");
  for (size_t i = 0; i < dim; ++i) {
    for (size_t j = 0; j < dim; ++j) {
      Amp acc = 0;
      for (size_t k = 0; k < dim; ++k)
        acc += std::conj(matrix[k * dim + i]) * matrix[k * dim + j];
      Amp want = (i == j) ? Amp(1) : Amp(0);
      if (std::abs(acc - want) > tol::kUnitary) throw NotUnitary("matrix is not unitary");
    }
  }
}

// --- QubitPool ---------------------------------------------------------------

size_t QubitPool::num_qubits() const {
  size_t n = 0;
  for (const auto& f : factors_) n += f.qubits.size();
  return n;
}

size_t QubitPool::factor_of(QubitId q) const {
  for (size_t i = 0; i < factors_.size(); ++i)
    for (QubitId h : factors_[i].qubits)
      if (h == q) return i;
  throw BadTargets("unknown qubit handle");
}

size_t QubitPool::position_in_factor(size_t f, QubitId q) const {
  const auto& qs = factors_[f].qubits;
  for (size_t i = 0; i < qs.size(); ++i)
    if (qs[i] == q) return i;
  throw BadTargets("qubit not in factor");
}

QubitRegister QubitPool::encode_bb84(const Bytes& bits, std::span<const Basis> bases) {
  if (bits.size() != bases.size()) throw LengthMismatch("encode_bb84: |bits| != |bases|");
  if (bits.empty()) throw LengthMismatch("encode_bb84: empty input");
  if (!valid_bits(bits)) throw Error("encode_bb84: bits must be '0'/'1'");
  if (num_qubits() + bits.size() > cap_) throw CapExceeded("encode_bb84: pool qubit cap");

  QubitRegister reg;
  for (size_t i = 0; i < bits.size(); ++i) {
    Factor f{{next_id_}, StateVector(1, cap_)};
    f.state.set_basis_state(bits[i] == '1' ? 1 : 0);
    if (bases[i] == Basis::Times) {
      size_t t[1] = {0};
      f.state.apply_unitary(t, std::span<const Amp>(kHadamard, 4));
    }
    reg.handles.push_back(next_id_);
    factors_.push_back(std::move(f));
    ++next_id_;
  }
  return reg;
}

int QubitPool::measure_qubit(QubitId q, Basis basis, ChoiceSource& choice) {
  size_t f = factor_of(q);
  size_t pos = position_in_factor(f, q);
  StateVector& sv = factors_[f].state;
  size_t t[1] = {pos};
  if (basis == Basis::Times) sv.apply_unitary(t, std::span<const Amp>(kHadamard, 4));
  double p1 = sv.prob_one(pos);
  // conjugate-coding states measure at exactly 0, 1/2 or 1; snap rounding dust
  // so exhaustive runs do not grow spurious near-zero branches
  for (double snap : {0.0, 0.5, 1.0})
    if (p1 != snap && std::abs(p1 - snap) < tol::kStateNorm) p1 = snap;
  double p0 = 1.0 - p1;
  double probs[2] = {p0, p1};
  int outcome = int(choice.choose(std::span<const double>(probs, 2)));
  sv.collapse(pos, outcome, outcome ? p1 : p0);
  // rotate back so the post-measurement state is the basis eigenstate
  if (basis == Basis::Times) sv.apply_unitary(t, std::span<const Amp>(kHadamard, 4));
  return outcome;
}

Bytes QubitPool::measure_in_bases(const QubitRegister& reg, std::span<const Basis> bases,
                                  ChoiceSource& choice) {
  if (reg.size() != bases.size()) throw LengthMismatch("measure_in_bases: |reg| != |bases|");
  Bytes out(reg.size(), '0');
  for (size_t i = 0; i < reg.size(); ++i)
    out[i] = measure_qubit(reg.handles[i], bases[i], choice) ? '1' : '0';
  return out;
}

size_t QubitPool::merge_factors(std::span<const QubitId> qubits) {
  std::vector<size_t> involved;
  for (QubitId q : qubits) {
    size_t f = factor_of(q);
    if (std::find(involved.begin(), involved.end(), f) == involved.end()) involved.push_back(f);
  }
  if (involved.size() == 1) return involved[0];
  std::sort(involved.begin(), involved.end());

  size_t total = 0;
  for (size_t f : involved) total += factors_[f].qubits.size();
  if (total > cap_) throw CapExceeded("merge_factors: entangling past qubit cap");

  Factor merged{{}, StateVector(total, cap_)};
  auto out = merged.state.amplitudes();
  // tensor product, first involved factor owning the most significant bits
  out[0] = 1;
  size_t dim = 1;
  size_t filled = 0;
  std::vector<Amp> scratch;
  for (size_t f : involved) {
    const auto& part = factors_[f];
    size_t pdim = size_t(1) << part.qubits.size();
    scratch.assign(dim * pdim, Amp(0));
    for (size_t i = 0; i < dim; ++i)
      for (size_t j = 0; j < pdim; ++j)
        scratch[i * pdim + j] = out[i] * part.state.amplitudes()[j];
    std::copy(scratch.begin(), scratch.end(), out.begin());
    dim *= pdim;
    for (QubitId q : part.qubits) merged.qubits.push_back(q);
    filled += part.qubits.size();
  }
  (void)filled;

  for (size_t k = involved.size(); k-- > 0;) factors_.erase(factors_.begin() + involved[k]);
  factors_.push_back(std::move(merged));
  return factors_.size() - 1;
}

void QubitPool::apply_unitary(const QubitRegister& reg, std::span<const size_t> targets,
                              std::span<const Amp> matrix) {
  if (targets.empty()) throw BadTargets("apply_unitary: no targets");
  std::vector<QubitId> qubits;
  for (size_t t : targets) {
    if (t >= reg.size()) throw BadTargets("apply_unitary: target out of range");
    qubits.push_back(reg.handles[t]);
  }
  for (size_t i = 0; i < qubits.size(); ++i)
    for (size_t j = i + 1; j < qubits.size(); ++j)
      if (qubits[i] == qubits[j]) throw BadTargets("apply_unitary: duplicate target");
  check_unitary(matrix, size_t(1) << targets.size());

  size_t f = merge_factors(qubits);
  std::vector<size_t> pos;
  for (QubitId q : qubits) pos.push_back(position_in_factor(f, q));
  factors_[f].state.apply_unitary(pos, matrix);
}

void QubitPool::classicalize(const QubitRegister& reg, ChoiceSource& choice) {
  std::vector<Basis> comp(reg.size(), Basis::Plus);
  if (!reg.empty()) measure_in_bases(reg, comp, choice);
}

void QubitPool::release(const QubitRegister& reg, ChoiceSource& choice) {
  // collapse first so dropping the qubits cannot leave entangled partners mixed
  classicalize(reg, choice);
  for (QubitId q : reg.handles) {
    size_t f = factor_of(q);
    if (factors_[f].qubits.size() == 1) {
      factors_.erase(factors_.begin() + f);
      continue;
    }
    // measured qubit is in a basis state; project it out of the factor
    size_t pos = position_in_factor(f, q);
    StateVector& sv = factors_[f].state;
    double p1 = sv.prob_one(pos);
    int bit = p1 > 0.5 ? 1 : 0;
    size_t n = factors_[f].qubits.size();
    StateVector reduced(n - 1, cap_);
    auto ramps = reduced.amplitudes();
    size_t stride = size_t(1) << (n - 1 - pos);
    size_t w = 0;
    for (size_t i = 0; i < (size_t(1) << n); ++i) {
      bool b = (i & stride) != 0;
      if (b == (bit != 0)) ramps[w++] = sv.amplitudes()[i];
    }
    factors_[f].state = std::move(reduced);
    factors_[f].qubits.erase(factors_[f].qubits.begin() + pos);
  }
}

std::map<Bytes, double> QubitPool::exact_outcome_distribution(
    const QubitRegister& reg, std::span<const Basis> bases) const {
  if (reg.size() != bases.size())
    throw LengthMismatch("exact_outcome_distribution: |reg| != |bases|");

  // Work on a copy: rotate diagonal-basis qubits, then marginalize.
  QubitPool copy(*this);
  for (size_t i = 0; i < reg.size(); ++i) {
    if (bases[i] != Basis::Times) continue;
    size_t f = copy.factor_of(reg.handles[i]);
    size_t pos = copy.position_in_factor(f, reg.handles[i]);
    size_t t[1] = {pos};
    copy.factors_[f].state.apply_unitary(t, std::span<const Amp>(kHadamard, 4));
  }

  std::map<Bytes, double> dist;
  dist[""] = 1.0;
  // per factor, joint distribution of the register bits it holds
  for (const auto& factor : copy.factors_) {
    std::vector<std::pair<size_t, size_t>> slots;  // (register index, factor position)
    for (size_t i = 0; i < reg.size(); ++i) {
      for (size_t p = 0; p < factor.qubits.size(); ++p)
        if (factor.qubits[p] == reg.handles[i]) slots.emplace_back(i, p);
    }
    if (slots.empty()) continue;
    size_t n = factor.qubits.size();
    std::map<Bytes, double> local;
    for (size_t idx = 0; idx < (size_t(1) << n); ++idx) {
      double p = std::norm(factor.state.amplitudes()[idx]);
      if (p < 1e-24) continue;  // amplitude rounding dust, not a real outcome
      Bytes key(slots.size(), '0');
      for (size_t s = 0; s < slots.size(); ++s) {
        size_t stride = size_t(1) << (n - 1 - slots[s].second);
        key[s] = (idx & stride) ? '1' : '0';
      }
      local[key] += p;
    }
    // combine with what previous factors contributed
    std::map<Bytes, double> next;
    for (const auto& [k1, p1] : dist)
      for (const auto& [k2, p2] : local) next[k1 + k2] += p1 * p2;
    // keys carry bits in factor-visit order; remember slot order for reassembly
    dist = std::move(next);
  }

  // Reassemble keys into register order.
  std::vector<size_t> order;
  for (const auto& factor : copy.factors_)
    for (size_t i = 0; i < reg.size(); ++i)
      for (QubitId q : factor.qubits)
        if (q == reg.handles[i]) order.push_back(i);

  std::map<Bytes, double> out;
  for (const auto& [k, p] : dist) {
    Bytes key(reg.size(), '0');
    for (size_t s = 0; s < order.size(); ++s) key[order[s]] = k[s];
    out[key] += p;
  }
  return out;
}

double QubitPool::max_norm_error() const {
  double worst = 0;
  for (const auto& f : factors_) worst = std::max(worst, f.state.norm_error());
  return worst;
}

}  // namespace quclab::qcore
