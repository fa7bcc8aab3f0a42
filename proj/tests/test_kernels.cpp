#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "quclab/kernels.hpp"

using namespace quclab;
using kernels::Amp;

namespace {

std::vector<Amp> random_state(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Amp> amps(size_t(1) << n);
  double norm = 0;
  for (auto& a : amps) {
    a = Amp(double(rng() >> 11) * 0x1.0p-53 - 0.5, double(rng() >> 11) * 0x1.0p-53 - 0.5);
    norm += std::norm(a);
  }
  double inv = 1.0 / std::sqrt(norm);
  for (auto& a : amps) a *= inv;
  return amps;
}

// random unitary via Gram-Schmidt on a random complex matrix
std::vector<Amp> random_unitary(size_t dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Amp>> cols(dim, std::vector<Amp>(dim));
  for (auto& col : cols)
    for (auto& v : col)
      v = Amp(double(rng() >> 11) * 0x1.0p-53 - 0.5, double(rng() >> 11) * 0x1.0p-53 - 0.5);
  for (size_t c = 0; c < dim; ++c) {
    for (size_t prev = 0; prev < c; ++prev) {
      Amp dot = 0;
      for (size_t r = 0; r < dim; ++r) dot += std::conj(cols[prev][r]) * cols[c][r];
      for (size_t r = 0; r < dim; ++r) cols[c][r] -= dot * cols[prev][r];
    }
    double norm = 0;
    for (size_t r = 0; r < dim; ++r) norm += std::norm(cols[c][r]);
    double inv = 1.0 / std::sqrt(norm);
    for (size_t r = 0; r < dim; ++r) cols[c][r] *= inv;
  }
  std::vector<Amp> m(dim * dim);
  for (size_t r = 0; r < dim; ++r)
    for (size_t c = 0; c < dim; ++c) m[r * dim + c] = cols[c][r];
  return m;
}

void check_equal(std::span<const Amp> a, std::span<const Amp> b) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

}  // namespace

TEST_CASE("parallel one-qubit kernel matches the serial reference") {
  // n = 13 exceeds the parallel cutoff, n = 6 stays below it
  for (size_t n : {6u, 13u}) {
    auto base = random_state(n, 17 + n);
    const Amp h[2][2] = {{Amp(M_SQRT1_2), Amp(M_SQRT1_2)}, {Amp(M_SQRT1_2), Amp(-M_SQRT1_2)}};
    for (size_t target = 0; target < n; ++target) {
      auto a = base;
      auto b = base;
      kernels::serial::apply_1q(a, n, target, h);
      kernels::apply_1q(b, n, target, h);
      check_equal(a, b);
    }
  }
}

TEST_CASE("parallel multi-qubit kernel matches the serial reference") {
  for (size_t n : {5u, 13u}) {
    auto base = random_state(n, 23 + n);
    for (size_t t = 1; t <= 3; ++t) {
      auto u = random_unitary(size_t(1) << t, 31 * n + t);
      std::vector<size_t> targets;
      for (size_t i = 0; i < t; ++i) targets.push_back((i * 2 + 1) % n);
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      if (targets.size() != t) continue;
      auto a = base;
      auto b = base;
      kernels::serial::apply_gate(a, n, targets, u);
      kernels::apply_gate(b, n, targets, u);
      check_equal(a, b);
    }
  }
}

TEST_CASE("norm, probability and collapse agree between paths") {
  for (size_t n : {4u, 13u}) {
    auto state = random_state(n, 47 + n);
    CHECK(kernels::norm_sq(state) == doctest::Approx(kernels::serial::norm_sq(state)).epsilon(1e-12));
    for (size_t target = 0; target < n; target += 3) {
      double p1s = kernels::serial::prob_one(state, n, target);
      double p1p = kernels::prob_one(state, n, target);
      CHECK(p1p == doctest::Approx(p1s).epsilon(1e-12));
      auto a = state;
      auto b = state;
      kernels::serial::collapse(a, n, target, 1, p1s);
      kernels::collapse(b, n, target, 1, p1p);
      check_equal(a, b);
      CHECK(kernels::norm_sq(a) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("unitaries preserve the norm") {
  auto state = random_state(13, 91);
  auto u = random_unitary(4, 7);
  std::vector<size_t> targets{2, 9};
  kernels::apply_gate(state, 13, targets, u);
  CHECK(kernels::norm_sq(state) == doctest::Approx(1.0).epsilon(1e-10));
}
