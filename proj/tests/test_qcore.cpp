#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "quclab/netexec.hpp"
#include "quclab/qcore.hpp"

using namespace quclab;
using qcore::Basis;
using qcore::QubitPool;

namespace {

const double kR = 1.0 / std::sqrt(2.0);

struct SamplingCtx {
  Rng rng;
  qcore::QubitPool pool;
  netexec::RunContext ctx;
  explicit SamplingCtx(uint64_t seed, size_t cap = 20)
      : rng(seed), pool(cap), ctx(netexec::RunContext::sampling(&rng, &pool, 1)) {}
};

std::vector<Basis> bases(const std::string& s) { return qcore::bases_from_string(s); }

void check_amps(const qcore::StateVector& sv, const std::vector<qcore::Amp>& want) {
  REQUIRE(sv.amplitudes().size() == want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    CHECK(std::abs(sv.amplitudes()[i].real() - want[i].real()) < 1e-12);
    CHECK(std::abs(sv.amplitudes()[i].imag() - want[i].imag()) < 1e-12);
  }
}

}  // namespace

TEST_CASE("bb84 encoding produces the expected amplitudes") {
  SamplingCtx s(1);
  SUBCASE("|0> in the computational basis") {
    auto reg = s.pool.encode_bb84("0", bases("+"));
    auto dist = s.pool.exact_outcome_distribution(reg, bases("+"));
    CHECK(dist.at("0") == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("|1> in the diagonal basis has amplitudes (r, -r)") {
    qcore::StateVector sv(1);
    sv.set_basis_state(1);
    size_t t[1] = {0};
    sv.apply_unitary(t, std::span<const qcore::Amp>(qcore::kHadamard, 4));
    check_amps(sv, {kR, -kR});
  }
  SUBCASE("two computational qubits tensor to [1,0,0,0]") {
    auto state = oracle::bb84_state("00", "++");
    CHECK(state[0].real() == doctest::Approx(1.0));
    for (size_t i = 1; i < 4; ++i) CHECK(std::abs(state[i]) < 1e-15);
  }
}

TEST_CASE("same-basis measurement is deterministic for every input") {
  for (size_t m = 1; m <= 3; ++m) {
    for (size_t x = 0; x < (size_t(1) << m); ++x) {
      for (size_t b = 0; b < (size_t(1) << m); ++b) {
        Bytes bits(m, '0'), basis_str(m, '+');
        for (size_t i = 0; i < m; ++i) {
          if (x & (size_t(1) << (m - 1 - i))) bits[i] = '1';
          if (b & (size_t(1) << (m - 1 - i))) basis_str[i] = 'x';
        }
        SamplingCtx s(x * 31 + b);
        auto reg = s.pool.encode_bb84(bits, bases(basis_str));
        CHECK(s.pool.measure_in_bases(reg, bases(basis_str), s.ctx) == bits);
        CHECK(s.pool.max_norm_error() < 1e-12);
      }
    }
  }
}

TEST_CASE("wrong-basis measurement is exactly uniform") {
  SamplingCtx s(3);
  auto reg = s.pool.encode_bb84("0", bases("x"));
  auto dist = s.pool.exact_outcome_distribution(reg, bases("+"));
  CHECK(dist.at("0") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dist.at("1") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("exact distribution of (01, +x) measured in ++ (brute-force oracle)") {
  SamplingCtx s(4);
  auto reg = s.pool.encode_bb84("01", bases("+x"));
  auto dist = s.pool.exact_outcome_distribution(reg, bases("++"));
  auto want = oracle::measure_distribution(oracle::bb84_state("01", "+x"), "++");
  REQUIRE(want.size() == 2);
  CHECK(want.at("00") == doctest::Approx(0.5));
  CHECK(want.at("01") == doctest::Approx(0.5));
  for (const auto& [key, p] : want) CHECK(dist.at(key) == doctest::Approx(p).epsilon(1e-12));
  CHECK(dist.size() == want.size());
}

TEST_CASE("exact distributions agree with the dense oracle on random inputs") {
  Rng rng(99);
  for (int round = 0; round < 20; ++round) {
    size_t m = 1 + uniform_below(rng, 4);
    Bytes bits = random_bit_string(rng, m);
    Bytes prep(m, '+'), meas(m, '+');
    for (auto& c : prep) c = (rng() & 1) ? 'x' : '+';
    for (auto& c : meas) c = (rng() & 1) ? 'x' : '+';
    SamplingCtx s(round);
    auto reg = s.pool.encode_bb84(bits, bases(prep));
    auto dist = s.pool.exact_outcome_distribution(reg, bases(meas));
    auto want = oracle::measure_distribution(oracle::bb84_state(bits, prep), meas);
    double total = 0;
    for (const auto& [key, p] : want) {
      CHECK(dist[key] == doctest::Approx(p).epsilon(1e-10));
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("sampled frequencies match the exact distribution within 4 sigma") {
  const size_t trials = 100000;
  size_t count1 = 0;
  for (size_t t = 0; t < trials; ++t) {
    SamplingCtx s(t);
    auto reg = s.pool.encode_bb84("0", bases("x"));
    if (s.pool.measure_in_bases(reg, bases("+"), s.ctx) == "1") ++count1;
  }
  double freq = double(count1) / double(trials);
  CHECK(std::abs(freq - 0.5) < 2.0 / std::sqrt(double(trials)));
}

TEST_CASE("apply_unitary: identity, Hadamard, X, and the error paths") {
  SamplingCtx s(6);
  auto reg = s.pool.encode_bb84("0", bases("+"));
  size_t t0[1] = {0};

  s.pool.apply_unitary(reg, t0, std::span<const qcore::Amp>(qcore::kIdentity2, 4));
  auto dist = s.pool.exact_outcome_distribution(reg, bases("+"));
  CHECK(dist.at("0") == doctest::Approx(1.0));

  s.pool.apply_unitary(reg, t0, std::span<const qcore::Amp>(qcore::kHadamard, 4));
  dist = s.pool.exact_outcome_distribution(reg, bases("+"));
  CHECK(dist.at("0") == doctest::Approx(0.5));
  CHECK(dist.at("1") == doctest::Approx(0.5));
  s.pool.apply_unitary(reg, t0, std::span<const qcore::Amp>(qcore::kHadamard, 4));

  s.pool.apply_unitary(reg, t0, std::span<const qcore::Amp>(qcore::kPauliX, 4));
  dist = s.pool.exact_outcome_distribution(reg, bases("+"));
  CHECK(dist.at("1") == doctest::Approx(1.0));

  const qcore::Amp not_unitary[4] = {1, 1, 0, 1};
  CHECK_THROWS_AS(s.pool.apply_unitary(reg, t0, std::span<const qcore::Amp>(not_unitary, 4)),
                  NotUnitary);
  size_t bad[1] = {5};
  CHECK_THROWS_AS(
      s.pool.apply_unitary(reg, bad, std::span<const qcore::Amp>(qcore::kIdentity2, 4)),
      BadTargets);
}

TEST_CASE("entangling gate merges factors and keeps the norm") {
  SamplingCtx s(7);
  auto reg = s.pool.encode_bb84("00", bases("++"));
  size_t t0[1] = {0};
  s.pool.apply_unitary(reg, t0, std::span<const qcore::Amp>(qcore::kHadamard, 4));
  // controlled-X entangles the two qubits
  std::vector<qcore::Amp> cx = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};
  size_t both[2] = {0, 1};
  s.pool.apply_unitary(reg, both, cx);
  auto dist = s.pool.exact_outcome_distribution(reg, bases("++"));
  CHECK(dist.at("00") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dist.at("11") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.pool.max_norm_error() < 1e-12);
  // measuring one half collapses the other
  qcore::QubitRegister first{{reg.handles[0]}};
  Bytes outcome = s.pool.measure_in_bases(first, bases("+"), s.ctx);
  auto dist2 = s.pool.exact_outcome_distribution(reg, bases("++"));
  Bytes expect = outcome + outcome;
  CHECK(dist2.at(expect) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classicalize removes superposition and is idempotent") {
  SamplingCtx s(8);
  auto reg = s.pool.encode_bb84("0", bases("+"));
  s.pool.classicalize(reg, s.ctx);
  auto dist = s.pool.exact_outcome_distribution(reg, bases("+"));
  CHECK(dist.at("0") == doctest::Approx(1.0));

  size_t zeros = 0;
  const size_t trials = 2000;
  for (size_t t = 0; t < trials; ++t) {
    SamplingCtx s2(t + 1000);
    auto r2 = s2.pool.encode_bb84("0", bases("x"));
    s2.pool.classicalize(r2, s2.ctx);
    s2.pool.classicalize(r2, s2.ctx);  // second application changes nothing
    auto d2 = s2.pool.exact_outcome_distribution(r2, bases("+"));
    REQUIRE(d2.size() == 1);
    if (d2.count("0")) ++zeros;
  }
  CHECK(std::abs(double(zeros) / trials - 0.5) < 2.0 / std::sqrt(double(trials)));
}

TEST_CASE("length and capacity guards") {
  SamplingCtx s(9, 4);
  CHECK_THROWS_AS(s.pool.encode_bb84("01", bases("+")), LengthMismatch);
  CHECK_THROWS_AS(s.pool.encode_bb84("", std::vector<Basis>{}), LengthMismatch);
  CHECK_THROWS_AS(s.pool.encode_bb84("00000", bases("+++++")), CapExceeded);
  auto reg = s.pool.encode_bb84("00", bases("++"));
  CHECK_THROWS_AS(s.pool.measure_in_bases(reg, bases("+"), s.ctx), LengthMismatch);
  CHECK_THROWS_AS(s.pool.exact_outcome_distribution(reg, bases("+++")), LengthMismatch);
}

TEST_CASE("basis serialization round-trips as '+' and 'x'") {
  CHECK(qcore::bases_to_string(bases("+x+")) == "+x+");
  CHECK_THROWS(qcore::basis_from_char('z'));
}

TEST_CASE("released handles are gone until reinitialized") {
  SamplingCtx s(11);
  auto reg = s.pool.encode_bb84("01", bases("x+"));
  CHECK(s.pool.num_qubits() == 2);
  s.pool.release(reg, s.ctx);
  CHECK(s.pool.num_qubits() == 0);
  CHECK_THROWS_AS(s.pool.measure_in_bases(reg, bases("++"), s.ctx), BadTargets);
  auto fresh = s.pool.encode_bb84("0", bases("+"));
  CHECK(s.pool.measure_in_bases(fresh, bases("+"), s.ctx) == "0");
}
