#pragma once

// Test-only oracles, independent of the library's computation paths: a naive
// dense tensor-product simulator for Born-rule distributions, and a direct
// combinatorial pass-rate enumeration for the commit-without-measuring
// strategy.

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Amp = std::complex<double>;
using State = std::vector<Amp>;

// |bits> encoded qubit-wise, '+' computational / 'x' diagonal, built by
// explicit tensor products.
inline State bb84_state(const std::string& bits, const std::string& bases) {
  const double r = 1.0 / std::sqrt(2.0);
  State state{1.0};
  for (size_t i = 0; i < bits.size(); ++i) {
    Amp q[2];
    if (bases[i] == '+') {
      q[0] = bits[i] == '0' ? 1.0 : 0.0;
      q[1] = bits[i] == '0' ? 0.0 : 1.0;
    } else {
      q[0] = r;
      q[1] = bits[i] == '0' ? r : -r;
    }
    State next(state.size() * 2);
    for (size_t j = 0; j < state.size(); ++j) {
      next[2 * j] = state[j] * q[0];
      next[2 * j + 1] = state[j] * q[1];
    }
    state = std::move(next);
  }
  return state;
}

// Measurement distribution of `state` in the given per-qubit bases: rotate
// each 'x' qubit by H, then read squared amplitudes.
inline std::map<std::string, double> measure_distribution(State state,
                                                          const std::string& bases) {
  const double r = 1.0 / std::sqrt(2.0);
  size_t n = bases.size();
  for (size_t q = 0; q < n; ++q) {
    if (bases[q] != 'x') continue;
    size_t stride = size_t(1) << (n - 1 - q);
    for (size_t i = 0; i < state.size(); ++i) {
      if (i & stride) continue;
      Amp a0 = state[i];
      Amp a1 = state[i | stride];
      state[i] = r * (a0 + a1);
      state[i | stride] = r * (a0 - a1);
    }
  }
  std::map<std::string, double> dist;
  for (size_t i = 0; i < state.size(); ++i) {
    double p = std::norm(state[i]);
    if (p == 0.0) continue;
    std::string key(n, '0');
    for (size_t q = 0; q < n; ++q)
      if (i & (size_t(1) << (n - 1 - q))) key[q] = '1';
    dist[key] += p;
  }
  return dist;
}

// Exact pass probability of the sender's consistency test when the receiver
// commits to uniformly random basis/value pairs without measuring: direct
// enumeration over the committed pairs for the tested indices.
inline double no_measure_pass_rate(size_t test_size) {
  // per tested index: basis guess differs (1/2) or matches and the value
  // guess is right (1/2 * 1/2), independently across indices
  size_t pass = 0, total = 0;
  for (size_t combo = 0; combo < (size_t(1) << (2 * test_size)); ++combo) {
    // bit 2i: basis matches the sender's, bit 2i+1: value matches
    bool ok = true;
    for (size_t i = 0; i < test_size; ++i) {
      bool basis_match = combo & (size_t(1) << (2 * i));
      bool value_match = combo & (size_t(1) << (2 * i + 1));
      if (basis_match && !value_match) ok = false;
    }
    ++total;
    if (ok) ++pass;
  }
  return double(pass) / double(total);
}

}  // namespace oracle
