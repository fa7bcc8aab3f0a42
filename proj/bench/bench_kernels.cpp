// Compares the serial reference kernels against the OpenMP versions on a
// dense statevector, for the gate, probability and norm primitives.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "quclab/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace quclab;
using kernels::Amp;

namespace {

std::vector<Amp> random_state(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Amp> amps(size_t(1) << n);
  double norm = 0;
  for (auto& a : amps) {
    double re = double(rng() >> 11) * 0x1.0p-53 - 0.5;
    double im = double(rng() >> 11) * 0x1.0p-53 - 0.5;
    a = Amp(re, im);
    norm += std::norm(a);
  }
  double inv = 1.0 / std::sqrt(norm);
  for (auto& a : amps) a *= inv;
  return amps;
}

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  size_t n = argc > 1 ? size_t(std::stoul(argv[1])) : 20;
  int reps = argc > 2 ? std::stoi(argv[2]) : 5;

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif
  std::printf("qubits: %zu, reps: %d\n\n", n, reps);
  std::printf("%-18s %12s %12s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  const Amp h[2][2] = {{Amp(M_SQRT1_2), Amp(M_SQRT1_2)}, {Amp(M_SQRT1_2), Amp(-M_SQRT1_2)}};
  const std::vector<Amp> h4 = {
      Amp(0.5), Amp(0.5),  Amp(0.5), Amp(0.5),  Amp(0.5), Amp(-0.5), Amp(0.5), Amp(-0.5),
      Amp(0.5), Amp(0.5),  Amp(-0.5), Amp(-0.5), Amp(0.5), Amp(-0.5), Amp(-0.5), Amp(0.5)};

  auto state = random_state(n, 42);
  auto work = state;

  double t_serial = time_ms(
      [&] {
        for (size_t q = 0; q < n; ++q) kernels::serial::apply_1q(work, n, q, h);
      },
      reps);
  work = state;
  double t_omp = time_ms(
      [&] {
        for (size_t q = 0; q < n; ++q) kernels::apply_1q(work, n, q, h);
      },
      reps);
  std::printf("%-18s %12.3f %12.3f %8.2fx\n", "h_layer", t_serial, t_omp, t_serial / t_omp);

  work = state;
  size_t targets[2] = {0, n / 2};
  t_serial = time_ms([&] { kernels::serial::apply_gate(work, n, targets, h4); }, reps);
  work = state;
  t_omp = time_ms([&] { kernels::apply_gate(work, n, targets, h4); }, reps);
  std::printf("%-18s %12.3f %12.3f %8.2fx\n", "two_qubit_gate", t_serial, t_omp,
              t_serial / t_omp);

  t_serial = time_ms([&] { (void)kernels::serial::norm_sq(state); }, reps);
  t_omp = time_ms([&] { (void)kernels::norm_sq(state); }, reps);
  std::printf("%-18s %12.3f %12.3f %8.2fx\n", "norm_sq", t_serial, t_omp, t_serial / t_omp);

  t_serial = time_ms([&] { (void)kernels::serial::prob_one(state, n, n / 2); }, reps);
  t_omp = time_ms([&] { (void)kernels::prob_one(state, n, n / 2); }, reps);
  std::printf("%-18s %12.3f %12.3f %8.2fx\n", "prob_one", t_serial, t_omp, t_serial / t_omp);

  return 0;
}
