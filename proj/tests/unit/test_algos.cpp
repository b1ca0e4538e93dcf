#include <cmath>
#include <numbers>

#include "qmlab/algos.hpp"
#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "support.hpp"

using namespace qmlab;
using qmlab::test::max_abs;
using qmlab::test::phase_distance;

namespace {

const double kS = 1.0 / std::sqrt(2.0);
constexpr double kTwoPi = 2.0 * std::numbers::pi;

CMatrix dft_matrix(int n) {
  const int d = 1 << n;
  CMatrix f(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) f(k, j) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), kTwoPi * j * k / d);
  return f;
}

CMatrix random_hermitian(int dim, Rng& rng) {
  CMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  return 0.5 * (g + g.adjoint());
}

CMatrix hermitian_with_spectrum(const std::vector<double>& ev, Rng& rng) {
  const int d = static_cast<int>(ev.size());
  const CMatrix v = haar_random_unitary(d, rng).matrix();
  CVector lam(d);
  for (int i = 0; i < d; ++i) lam(i) = ev[static_cast<std::size_t>(i)];
  return v * lam.asDiagonal() * v.adjoint();
}

CVector vec(std::initializer_list<Complex> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("Bell states") {
  CHECK(max_abs(bell_prepare(BellVariant::kPhiPlus).amplitudes() - vec({kS, 0, 0, kS})) < 1e-15);
  CHECK(max_abs(bell_prepare(BellVariant::kPhiMinus).amplitudes() - vec({kS, 0, 0, -kS})) < 1e-15);
  CHECK(max_abs(bell_prepare(BellVariant::kPsiPlus).amplitudes() - vec({0, kS, kS, 0})) < 1e-15);
  CHECK(max_abs(bell_prepare(BellVariant::kPsiMinus).amplitudes() - vec({0, kS, -kS, 0})) < 1e-15);
  const BellVariant all[] = {BellVariant::kPhiPlus, BellVariant::kPhiMinus, BellVariant::kPsiPlus, BellVariant::kPsiMinus};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs(std::abs(bell_prepare(all[i]).inner(bell_prepare(all[j]))) - (i == j ? 1.0 : 0.0)) < 1e-15);
}

TEST_CASE("teleportation") {
  for (int m1 = 0; m1 < 2; ++m1)
    for (int m2 = 0; m2 < 2; ++m2) {
      const auto r = teleport_branch(StateVector(1), m1, m2);
      CHECK(r.output.fidelity(StateVector(1)) == doctest::Approx(1.0).epsilon(1e-14));
    }
  Rng rng(77);
  const auto psi = StateVector::haar_random(1, rng);
  const Complex a = psi[0], b = psi[1];
  const CVector table[2][2] = {{vec({a, b}), vec({b, a})}, {vec({a, -b}), vec({-b, a})}};
  for (int m1 = 0; m1 < 2; ++m1)
    for (int m2 = 0; m2 < 2; ++m2) {
      const auto r = teleport_branch(psi, m1, m2);
      CHECK(phase_distance(r.before_correction.amplitudes(), table[m1][m2]) < 1e-12);
      CHECK(std::abs(r.output.fidelity(psi) - 1.0) < 1e-12);
    }
  int seen[4] = {0, 0, 0, 0};
  for (int t = 0; t < 1000; ++t) {
    Rng local = rng.split(static_cast<std::uint64_t>(t));
    const auto in = StateVector::haar_random(1, local);
    const auto r = teleport(in, local);
    ++seen[2 * r.m1 + r.m2];
    CHECK(std::abs(std::abs(r.output.inner(in)) - 1.0) < 1e-10);
  }
  for (int k = 0; k < 4; ++k) CHECK(seen[k] > 150);
}

TEST_CASE("oracle functions") {
  const auto f = OracleFunction::from_function(2, [](std::uint64_t x) { return static_cast<int>(x == 2); });
  CHECK(is_unitary(f.unitary()));
  const auto back = OracleFunction::from_json(f.to_json());
  CHECK(back.table() == f.table());
  CHECK_THROWS_AS(OracleFunction::from_table(2, {0, 1}), Error);
  CHECK_THROWS_AS(OracleFunction::from_json("{\"n\": 1}"), Error);
  Rng rng(3);
  const auto psi = StateVector::haar_random(3, rng);
  CVector via_apply = psi.amplitudes();
  f.apply(via_apply, 3);
  CHECK(max_abs(via_apply - f.unitary() * psi.amplitudes()) < 1e-15);
}

TEST_CASE("Deutsch-Jozsa") {
  CHECK(deutsch_jozsa(OracleFunction::from_function(3, [](std::uint64_t) { return 0; })).answer == DJAnswer::kConstant);
  const auto parity = OracleFunction::from_function(3, [](std::uint64_t x) { return std::popcount(x) & 1; });
  const auto r = deutsch_jozsa(parity);
  CHECK(r.answer == DJAnswer::kBalanced);
  CHECK(r.p_all_zero < 1e-15);
  CHECK(deutsch_jozsa(OracleFunction::from_table(1, {0, 1})).answer == DJAnswer::kBalanced);
  CHECK(deutsch_jozsa(OracleFunction::from_table(1, {1, 1})).answer == DJAnswer::kConstant);
}

TEST_CASE("Deutsch-Jozsa over every promised oracle") {
  for (int n = 2; n <= 3; ++n) {
    const int size = 1 << n;
    int constant = 0, balanced = 0;
    for (std::uint32_t mask = 0; mask < (1u << size); ++mask) {
      const int ones = std::popcount(mask);
      if (ones != 0 && ones != size && ones != size / 2) continue;
      std::vector<int> t(size);
      for (int x = 0; x < size; ++x) t[x] = (mask >> x) & 1;
      const auto r = deutsch_jozsa(OracleFunction::from_table(n, t));
      const bool is_const = ones == 0 || ones == size;
      CHECK((r.answer == DJAnswer::kConstant) == is_const);
      CHECK(std::abs(r.p_all_zero - (is_const ? 1.0 : 0.0)) < 1e-12);
      (is_const ? constant : balanced)++;
    }
    CHECK(constant == 2);
    CHECK(balanced == (n == 2 ? 6 : 70));
  }
}

TEST_CASE("quantum Fourier transform") {
  CHECK(max_abs(qft_circuit(1).unitary() - gates::H().matrix()) < 1e-15);
  for (int n = 1; n <= 8; ++n) {
    const auto c = qft_circuit(n);
    const CMatrix u = c.unitary();
    CHECK(max_abs(u - dft_matrix(n)) < 1e-10);
    CHECK(c.gate_count() == static_cast<std::size_t>(n + n * (n - 1) / 2 + n / 2));
    CHECK(max_abs(inverse_qft_circuit(n).unitary() * u - CMatrix::Identity(u.rows(), u.cols())) < 1e-10);
  }
  const auto out = run_unitary(qft_circuit(3), StateVector::basis(3, 5));
  for (int k = 0; k < 8; ++k) CHECK(std::abs(out[k] - std::polar(1.0 / std::sqrt(8.0), kTwoPi * 5 * k / 8)) < 1e-12);
}

TEST_CASE("phase estimation") {
  Rng rng(5);
  CMatrix d = CMatrix::Identity(2, 2);
  d(1, 1) = std::polar(1.0, kTwoPi * 3.0 / 8.0);
  const auto u = Gate::from_matrix(d);
  const auto one = StateVector::basis(1, 1);
  // Exact three-bit phase with a three-qubit register.
  const auto dist = qpe_distribution(u, one, 3);
  CHECK(std::abs(dist[3] - 1.0) < 1e-12);
  const auto zero = qpe_distribution(u, StateVector::basis(1, 0), 4);
  CHECK(std::abs(zero[0] - 1.0) < 1e-12);

  const auto r = phase_estimate(u, one, 3, 0.25, rng);
  CHECK(r.ancilla_qubits == 3 + 2);
  CHECK(r.success_probability == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.register_bits.substr(0, 3) == "011");
  CHECK(r.phase_estimate == doctest::Approx(3.0 / 8.0));

  CHECK_THROWS_AS(phase_estimate(u, StateVector::from_amplitudes(vec({kS, kS})), 3, 0.1, rng), Error);
  CHECK(qpe_ancilla_count(4, 0.1) == 4 + 3);
  CHECK(qpe_ancilla_count(1, 0.25) == 1 + 2);
}

TEST_CASE("phase estimation for an inexact phase") {
  Rng rng(6);
  const double phi = 1.0 / 3.0;
  CMatrix d = CMatrix::Identity(2, 2);
  d(1, 1) = std::polar(1.0, kTwoPi * phi);
  const auto u = Gate::from_matrix(d);
  const auto r = phase_estimate(u, StateVector::basis(1, 1), 4, 0.1, rng);
  const double tol = 1.0 / 16.0;
  int ok = 0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const double est = static_cast<double>(sample_index(r.distribution, rng)) / std::ldexp(1.0, r.ancilla_qubits);
    double e = std::abs(est - phi);
    e = std::min(e, 1.0 - e);
    ok += e <= tol;
  }
  CHECK(ok / static_cast<double>(draws) >= 0.9);

  for (double p : {0.0, 0.1, 0.2371, 1.0 / 3, 0.5, 0.77, 0.999}) {
    CMatrix dp = CMatrix::Identity(2, 2);
    dp(1, 1) = std::polar(1.0, kTwoPi * p);
    const int anc = 6;
    const auto dist = qpe_distribution(Gate::from_matrix(dp), StateVector::basis(1, 1), anc);
    const long size = 1L << anc;
    const long b = static_cast<long>(std::floor(size * p));
    for (long l = -size / 2 + 1; l <= size / 2; ++l) {
      const long m = ((b + l) % size + size) % size;
      CHECK(std::abs(dist[static_cast<std::size_t>(m)] - std::norm(qpe_amplitude_closed_form(p, anc, l))) < 1e-10);
    }
    // Tail bound P(|m - b| > e) <= 1 / (2(e - 1)).
    for (long e = 2; e < size / 2; ++e) {
      double tail = 0;
      for (long l = -size / 2 + 1; l <= size / 2; ++l)
        if (std::abs(l) > e) tail += dist[static_cast<std::size_t>(((b + l) % size + size) % size)];
      CHECK(tail <= 1.0 / (2.0 * (e - 1)) + 1e-12);
    }
  }
}

TEST_CASE("Grover search") {
  Rng rng(8);
  const auto f4 = OracleFunction::from_table(2, {0, 0, 1, 0});
  const auto r4 = grover(f4, rng);
  CHECK(r4.iterations == 1);
  CHECK(r4.success_closed_form == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r4.success_simulated == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r4.sample == 2);

  const auto f16 = OracleFunction::from_function(4, [](std::uint64_t x) { return static_cast<int>(x == 11); });
  const auto r16 = grover(f16, rng);
  CHECK(r16.iterations == 3);
  CHECK(std::abs(r16.success_closed_form - r16.success_simulated) < 1e-10);

  const auto half = OracleFunction::from_function(3, [](std::uint64_t x) { return static_cast<int>(x < 4); });
  const auto rh = grover(half, rng);
  CHECK(rh.iterations == 1);
  CHECK(rh.success_closed_form == doctest::Approx(0.5));
  CHECK(std::abs(rh.success_simulated - 0.5) < 1e-10);

  CHECK_THROWS_AS(grover(OracleFunction::from_table(1, {0, 0}), rng), Error);
  CHECK_THROWS_AS(grover(OracleFunction::from_table(1, {1, 1}), rng), Error);

  for (int n = 1; n <= 6; ++n) {
    const std::uint64_t size = std::uint64_t{1} << n;
    for (std::uint64_t m = 1; m < size; ++m) {
      // Scattered solution set of size m.
      std::vector<int> t(size, 0);
      for (std::uint64_t i = 0; i < m; ++i) t[(i * 5 + 3) % size] = 1;
      if (OracleFunction::from_table(n, t).count_ones() != m) {
        t.assign(size, 0);
        for (std::uint64_t i = 0; i < m; ++i) t[i] = 1;
      }
      const auto r = grover(OracleFunction::from_table(n, t), rng);
      CHECK(std::abs(r.success_closed_form - r.success_simulated) < 1e-10);
    }
  }
}

TEST_CASE("DQC1 trace estimation") {
  Rng rng(10);
  const auto id = dqc1_trace(Gate::from_matrix(CMatrix::Identity(4, 4)), 2000, rng);
  CHECK(id.estimate.real() == doctest::Approx(1.0));
  CHECK(std::abs(id.estimate.imag()) < 0.1);
  const auto xx = dqc1_trace(Gate::from_matrix(pauli_matrix("XX")), 20000, rng);
  CHECK(std::abs(xx.estimate) < 0.05);
  const auto u = haar_random_unitary(8, rng);
  const auto r = dqc1_trace(u, 100000, rng);
  CHECK(std::abs(r.estimate.real() - r.exact.real()) < 5 * r.stderr_re);
  CHECK(std::abs(r.estimate.imag() - r.exact.imag()) < 5 * r.stderr_im);

  // Averaging over seeds approaches the exact value.
  const auto small = haar_random_unitary(4, rng);
  Complex mean = 0;
  const int reps = 200;
  for (int s = 0; s < reps; ++s) {
    Rng local = rng.split(static_cast<std::uint64_t>(s));
    mean += dqc1_trace(small, 500, local).estimate;
  }
  mean /= reps;
  const Complex exact = small.matrix().trace() / 4.0;
  CHECK(std::abs(mean.real() - exact.real()) < 5.0 / std::sqrt(500.0 * reps));
  CHECK(std::abs(mean.imag() - exact.imag()) < 5.0 / std::sqrt(500.0 * reps));
}

TEST_CASE("overlap test") {
  Rng rng(12);
  const auto x = StateVector::haar_random(2, rng);
  CHECK(overlap_test(x, x, 1000, rng).estimate == doctest::Approx(1.0));
  CHECK(std::abs(overlap_test(StateVector::basis(2, 0), StateVector::basis(2, 3), 20000, rng).estimate) < 0.05);
  const auto y = StateVector::haar_random(2, rng);
  const auto r = overlap_test(x, y, 100000, rng);
  CHECK(std::abs(r.exact - std::norm(x.inner(y))) < 1e-15);
  CHECK(std::abs(r.estimate - r.exact) < 5 * r.stderr);
  CHECK_THROWS_AS(overlap_test(x, StateVector(1), 10, rng), Error);
}

TEST_CASE("matrix multiplication by phase estimation") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 0.5;
  a(1, 1) = 0.25;
  const auto r = qpe_matrix_multiply(a, StateVector::basis(1, 0), 2);
  CHECK(r.output.fidelity(StateVector::basis(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.p_acc - 0.25) < 1e-10);
  CHECK(std::abs(r.register_residual) < 1e-10);

  Rng rng(14);
  const auto x = StateVector::haar_random(2, rng);
  const auto half = qpe_matrix_multiply(0.5 * CMatrix::Identity(4, 4), x);
  CHECK(half.output.fidelity(x) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(half.p_acc - 0.25) < 1e-10);

  // Exactly representable spectrum: p_acc closed form to 1e-10.
  const CMatrix ex = hermitian_with_spectrum({17 / 256.0, 64 / 256.0, 101 / 256.0, 230 / 256.0}, rng);
  const auto re = qpe_matrix_multiply(ex, x, 8);
  const CVector ax = ex * x.amplitudes();
  CHECK(std::abs(re.p_acc - ax.squaredNorm()) < 1e-10);
  CHECK(re.output.fidelity(StateVector::normalized(ax)) > 1 - 1e-10);

  const CMatrix rnd = hermitian_with_spectrum({0.13, 0.37, 0.58, 0.81}, rng);
  const auto rr = qpe_matrix_multiply(rnd, x, 8);
  CHECK(rr.output.fidelity(StateVector::normalized(rnd * x.amplitudes())) > 0.999);

  CHECK_THROWS_AS(qpe_matrix_multiply(CMatrix::Zero(2, 2), StateVector(1)), Error);
  CHECK_THROWS_AS(qpe_matrix_multiply(CMatrix::Identity(2, 2), StateVector(1)), Error);
}

TEST_CASE("matrix inversion by phase estimation") {
  Rng rng(15);
  const auto x = StateVector::haar_random(2, rng);
  const auto id = qpe_matrix_invert(CMatrix::Identity(4, 4), x, 0.3);
  CHECK(id.output.fidelity(x) == doctest::Approx(1.0).epsilon(1e-10));

  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 0.5;
  a(1, 1) = 0.25;
  const double c = 0.25;
  const auto plus = StateVector::from_amplitudes(vec({kS, kS}));
  const auto r = qpe_matrix_invert(a, plus, c, 2);
  CHECK(r.output.fidelity(StateVector::normalized(vec({2, 4}))) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(r.p_acc - 0.5 * (c * c / 0.25 + c * c / 0.0625)) < 1e-10);

  const CMatrix ex = hermitian_with_spectrum({40 / 256.0, 64 / 256.0, 101 / 256.0, 200 / 256.0}, rng);
  const double cc = 40 / 256.0;
  const auto re = qpe_matrix_invert(ex, x, cc, 8);
  const CVector sol = ex.inverse() * x.amplitudes();
  CHECK(std::abs(re.p_acc - cc * cc * sol.squaredNorm()) < 1e-10);
  CHECK(re.p_acc <= 1.0 + 1e-12);
  CHECK(re.output.fidelity(StateVector::normalized(sol)) > 1 - 1e-10);
  // p_acc is at least κ^-2 for C = λ_min.
  const double kappa = 200.0 / 40.0;
  CHECK(re.p_acc >= 1.0 / (kappa * kappa) - 1e-12);

  const CMatrix rnd = hermitian_with_spectrum({0.31, 0.47, 0.66, 0.93}, rng);
  const auto rr = qpe_matrix_invert(rnd, x, 0.3, 8);
  CHECK(rr.output.fidelity(StateVector::normalized(rnd.inverse() * x.amplitudes())) > 0.999);

  CMatrix sing = CMatrix::Zero(2, 2);
  sing(0, 0) = 0.5;
  CHECK_THROWS_AS(qpe_matrix_invert(sing, StateVector(1), 0.1), Error);
}

TEST_CASE("LCU block encoding") {
  Rng rng(20);
  const CMatrix u = haar_random_unitary(4, rng).matrix();
  const auto single = lcu_block_encode({{1.0}, {u}});
  CHECK(single.ancilla_qubits == 0);
  CHECK(max_abs(single.block() - u) < 1e-12);

  const CMatrix v = haar_random_unitary(4, rng).matrix();
  const auto pair = lcu_block_encode({{1.0, 1.0}, {u, v}});
  CHECK(pair.ancilla_qubits == 1);
  CHECK(max_abs(pair.prep - gates::H().matrix()) < 1e-12);
  CHECK(max_abs(pair.block() - 0.5 * (u + v)) < 1e-12);
  CHECK(is_unitary(pair.unitary, 1e-10));

  for (int trial = 0; trial < 100; ++trial) {
    const int s = 2 + trial % 2;
    const CMatrix h = random_hermitian(1 << s, rng);
    const auto terms = pauli_decompose(h);
    const auto spec = lcu_from_pauli(terms);
    const auto be = lcu_block_encode(spec);
    double l1 = 0;
    for (const auto& t : terms) l1 += std::abs(t.coeff);
    CHECK(be.ancilla_qubits == 2 * s);
    CHECK(std::abs(be.alpha - l1) < 1e-12);
    CHECK(max_abs(be.block() - h / l1) < 1e-10);
    if (trial < 4) CHECK(is_unitary(be.unitary, 1e-10));
  }

  // Prep sends |0> to the amplitude column for uneven, non-power-of-two sets.
  const auto odd = lcu_block_encode({{0.2, 1.3, 0.5}, {u, v, CMatrix::Identity(4, 4)}});
  const double total = 2.0;
  CHECK(std::abs(odd.prep(0, 0) - std::sqrt(0.2 / total)) < 1e-12);
  CHECK(std::abs(odd.prep(1, 0) - std::sqrt(1.3 / total)) < 1e-12);
  CHECK(std::abs(odd.prep(3, 0)) < 1e-12);
  CHECK(is_unitary(odd.prep, 1e-12));
  CHECK(max_abs(odd.block() - (0.2 * u + 1.3 * v + 0.5 * CMatrix::Identity(4, 4)) / total) < 1e-12);

  CVector tgt(3);
  tgt << Complex(0, 0.6), 0.8, 0;
  const CMatrix hc = householder_completion(tgt);
  CHECK(max_abs(hc.col(0) - tgt) < 1e-12);
  CHECK(is_unitary(hc, 1e-12));
  CHECK_THROWS_AS(lcu_block_encode({{1.0}, {u, v}}), Error);
}
