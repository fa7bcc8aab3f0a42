#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace quclab::kernels {

using Amp = std::complex<double>;

// Dense statevector kernels. The default entry points parallelize with
// OpenMP once the vector is large enough to pay for the fork; the serial
// namespace keeps the reference loops used by the tests and the benchmark.

// Amplitude count below which the OpenMP versions stay on the serial path.
inline constexpr size_t kParallelCutoff = size_t(1) << 12;

// One-qubit gate on qubit `target` (0 = most significant / leftmost).
void apply_1q(std::span<Amp> amps, size_t num_qubits, size_t target, const Amp u[2][2]);

// General t-qubit gate; `targets` are distinct qubit positions, matrix is
// (2^t x 2^t) row-major, bit order of the matrix index follows `targets`.
void apply_gate(std::span<Amp> amps, size_t num_qubits, std::span<const size_t> targets,
                std::span<const Amp> matrix);

double norm_sq(std::span<const Amp> amps);

void scale(std::span<Amp> amps, double factor);

// Probability that qubit `target` reads 1 in the computational basis.
double prob_one(std::span<const Amp> amps, size_t num_qubits, size_t target);

// Project qubit `target` onto `outcome` and renormalize by 1/sqrt(prob).
void collapse(std::span<Amp> amps, size_t num_qubits, size_t target, int outcome, double prob);

namespace serial {
void apply_1q(std::span<Amp> amps, size_t num_qubits, size_t target, const Amp u[2][2]);
void apply_gate(std::span<Amp> amps, size_t num_qubits, std::span<const size_t> targets,
                std::span<const Amp> matrix);
double norm_sq(std::span<const Amp> amps);
void scale(std::span<Amp> amps, double factor);
double prob_one(std::span<const Amp> amps, size_t num_qubits, size_t target);
void collapse(std::span<Amp> amps, size_t num_qubits, size_t target, int outcome, double prob);
}  // namespace serial

}  // namespace quclab::kernels
