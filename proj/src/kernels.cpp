#include "quclab/kernels.hpp"

#include <cmath>
#include <cstdint>

namespace quclab::kernels {

namespace serial {

void apply_1q(std::span<Amp> amps, size_t num_qubits, size_t target, const Amp u[2][2]) {
  const size_t dim = amps.size();
  const size_t stride = size_t(1) << (num_qubits - 1 - target);
  for (size_t base = 0; base < dim; base += 2 * stride) {
    for (size_t off = 0; off < stride; ++off) {
      Amp a0 = amps[base + off];
      Amp a1 = amps[base + off + stride];
      amps[base + off] = u[0][0] * a0 + u[0][1] * a1;
      amps[base + off + stride] = u[1][0] * a0 + u[1][1] * a1;
    }
  }
}

void apply_gate(std::span<Amp> amps, size_t num_qubits, std::span<const size_t> targets,
                std::span<const Amp> matrix) {
  const size_t t = targets.size();
  const size_t sub = size_t(1) << t;
  const size_t dim = amps.size();
  std::vector<size_t> strides(t);
  for (size_t j = 0; j < t; ++j) strides[j] = size_t(1) << (num_qubits - 1 - targets[j]);
  size_t target_mask = 0;
  for (size_t s : strides) target_mask |= s;

  std::vector<Amp> in(sub), out(sub);
  for (size_t base = 0; base < dim; ++base) {
    if (base & target_mask) continue;
    for (size_t r = 0; r < sub; ++r) {
      size_t idx = base;
      for (size_t j = 0; j < t; ++j)
        if (r & (sub >> 1 >> j)) idx |= strides[j];
      in[r] = amps[idx];
    }
    for (size_t r = 0; r < sub; ++r) {
      Amp acc = 0;
      for (size_t c = 0; c < sub; ++c) acc += matrix[r * sub + c] * in[c];
      out[r] = acc;
    }
    for (size_t r = 0; r < sub; ++r) {
      size_t idx = base;
      for (size_t j = 0; j < t; ++j)
        if (r & (sub >> 1 >> j)) idx |= strides[j];
      amps[idx] = out[r];
    }
  }
}

double norm_sq(std::span<const Amp> amps) {
  double acc = 0;
  for (const Amp& a : amps) acc += std::norm(a);
  return acc;
}

void scale(std::span<Amp> amps, double factor) {
  for (Amp& a : amps) a *= factor;
}

double prob_one(std::span<const Amp> amps, size_t num_qubits, size_t target) {
  const size_t stride = size_t(1) << (num_qubits - 1 - target);
  double acc = 0;
  for (size_t i = 0; i < amps.size(); ++i)
    if (i & stride) acc += std::norm(amps[i]);
  return acc;
}

void collapse(std::span<Amp> amps, size_t num_qubits, size_t target, int outcome, double prob) {
  const size_t stride = size_t(1) << (num_qubits - 1 - target);
  const double inv = 1.0 / std::sqrt(prob);
  for (size_t i = 0; i < amps.size(); ++i) {
    bool bit = (i & stride) != 0;
    if (bit == (outcome != 0))
      amps[i] *= inv;
    else
      amps[i] = 0;
  }
}

}  // namespace serial

void apply_1q(std::span<Amp> amps, size_t num_qubits, size_t target, const Amp u[2][2]) {
  const size_t dim = amps.size();
  if (dim < kParallelCutoff) {
    serial::apply_1q(amps, num_qubits, target, u);
    return;
  }
  const int64_t stride = int64_t(1) << (num_qubits - 1 - target);
  const int64_t pairs = int64_t(dim) / 2;
  Amp* p = amps.data();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < pairs; ++i) {
    int64_t i0 = ((i & ~(stride - 1)) << 1) | (i & (stride - 1));
    int64_t i1 = i0 | stride;
    Amp a0 = p[i0];
    Amp a1 = p[i1];
    p[i0] = u[0][0] * a0 + u[0][1] * a1;
    p[i1] = u[1][0] * a0 + u[1][1] * a1;
  }
}

void apply_gate(std::span<Amp> amps, size_t num_qubits, std::span<const size_t> targets,
                std::span<const Amp> matrix) {
  if (targets.size() == 1) {
    Amp u[2][2] = {{matrix[0], matrix[1]}, {matrix[2], matrix[3]}};
    apply_1q(amps, num_qubits, targets[0], u);
    return;
  }
  if (amps.size() < kParallelCutoff) {
    serial::apply_gate(amps, num_qubits, targets, matrix);
    return;
  }
  const size_t t = targets.size();
  const size_t sub = size_t(1) << t;
  std::vector<size_t> strides(t);
  for (size_t j = 0; j < t; ++j) strides[j] = size_t(1) << (num_qubits - 1 - targets[j]);
  size_t target_mask = 0;
  for (size_t s : strides) target_mask |= s;
  const int64_t groups = int64_t(amps.size()) >> t;
  Amp* p = amps.data();
  const Amp* m = matrix.data();

#pragma omp parallel
  {
    std::vector<Amp> in(sub), out(sub);
    std::vector<size_t> idx(sub);
#pragma omp for schedule(static)
    for (int64_t g = 0; g < groups; ++g) {
      // spread the group index over the non-target bit positions
      size_t base = 0;
      size_t rem = size_t(g);
      for (size_t pos = 1; pos < amps.size(); pos <<= 1) {
        if (pos & target_mask) continue;
        if (rem & 1) base |= pos;
        rem >>= 1;
      }
      for (size_t r = 0; r < sub; ++r) {
        size_t id = base;
        for (size_t j = 0; j < t; ++j)
          if (r & (sub >> 1 >> j)) id |= strides[j];
        idx[r] = id;
        in[r] = p[id];
      }
      for (size_t r = 0; r < sub; ++r) {
        Amp acc = 0;
        for (size_t c = 0; c < sub; ++c) acc += m[r * sub + c] * in[c];
        out[r] = acc;
      }
      for (size_t r = 0; r < sub; ++r) p[idx[r]] = out[r];
    }
  }
}

double norm_sq(std::span<const Amp> amps) {
  if (amps.size() < kParallelCutoff) return serial::norm_sq(amps);
  const int64_t n = int64_t(amps.size());
  const Amp* p = amps.data();
  double acc = 0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (int64_t i = 0; i < n; ++i) acc += std::norm(p[i]);
  return acc;
}

void scale(std::span<Amp> amps, double factor) {
  if (amps.size() < kParallelCutoff) {
    serial::scale(amps, factor);
    return;
  }
  const int64_t n = int64_t(amps.size());
  Amp* p = amps.data();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) p[i] *= factor;
}

double prob_one(std::span<const Amp> amps, size_t num_qubits, size_t target) {
  if (amps.size() < kParallelCutoff) return serial::prob_one(amps, num_qubits, target);
  const int64_t stride = int64_t(1) << (num_qubits - 1 - target);
  const int64_t n = int64_t(amps.size());
  const Amp* p = amps.data();
  double acc = 0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (int64_t i = 0; i < n; ++i)
    if (i & stride) acc += std::norm(p[i]);
  return acc;
}

void collapse(std::span<Amp> amps, size_t num_qubits, size_t target, int outcome, double prob) {
  if (amps.size() < kParallelCutoff) {
    serial::collapse(amps, num_qubits, target, outcome, prob);
    return;
  }
  const int64_t stride = int64_t(1) << (num_qubits - 1 - target);
  const int64_t n = int64_t(amps.size());
  const double inv = 1.0 / std::sqrt(prob);
  Amp* p = amps.data();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    bool bit = (i & stride) != 0;
    if (bit == (outcome != 0))
      p[i] *= inv;
    else
      p[i] = 0;
  }
}

}  // namespace quclab::kernels
