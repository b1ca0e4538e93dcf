#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "qmlab/error.hpp"
#include "qmlab/qprob.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/varqml.hpp"
#include "support.hpp"

using namespace qmlab;
using qmlab::test::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

// exp(-i G) by Padé scaling-and-squaring.
CMatrix dense_exp(const CMatrix& g) { return CMatrix((-kI * g).exp()); }

CMatrix dense_circuit_unitary(const ParamCircuit& c, std::span<const double> theta, std::span<const double> data) {
  const Eigen::Index d = Eigen::Index{1} << c.num_qubits();
  CMatrix u = CMatrix::Identity(d, d);
  for (std::size_t t = 0; t < c.size(); ++t) {
    const Layer& l = c.layers()[t];
    if (l.is_fixed()) {
      for (Eigen::Index j = 0; j < d; ++j) {
        CVector col = u.col(j);
        apply_matrix(col, c.num_qubits(), *l.fixed, l.targets);
        u.col(j) = col;
      }
    } else {
      u = dense_exp(c.layer_generator(t, theta, data)) * u;
    }
  }
  return u;
}

std::string random_pauli(int n, Rng& rng) {
  static const char kL[4] = {'I', 'X', 'Y', 'Z'};
  std::string s(static_cast<std::size_t>(n), 'I');
  while (s == std::string(static_cast<std::size_t>(n), 'I'))
    for (auto& ch : s) ch = kL[rng.below(4)];
  return s;
}

CMatrix random_hermitian(int dim, Rng& rng) {
  CMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  return 0.5 * (a + a.adjoint());
}

// Single-Pauli rotations on random strings plus fixed CNOTs.
ParamCircuit random_commuting_circuit(int n, int params, Rng& rng) {
  ParamCircuit c(n);
  for (int p = 0; p < params; ++p) {
    c.rotation(random_pauli(n, rng), p, 0.5 + rng.uniform());
    if (n > 1 && rng.bernoulli(0.5)) {
      const int q = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
      c.gate(gates::CNOT(), {q, q + 1});
    }
  }
  return c;
}

// Layers mixing several non-commuting terms with shared parameters.
ParamCircuit random_general_circuit(int n, int params, Rng& rng) {
  ParamCircuit c(n);
  for (int layer = 0; layer < 3; ++layer) {
    std::vector<GeneratorTerm> terms;
    for (int k = 0; k < 3; ++k) {
      GeneratorTerm t{random_pauli(n, rng), {}};
      t.coeff.offset = rng.normal() * 0.3;
      t.coeff.params.push_back({static_cast<int>(rng.below(static_cast<std::uint64_t>(params))), rng.normal()});
      terms.push_back(std::move(t));
    }
    c.generator(std::move(terms));
    if (n > 1) c.gate(gates::CNOT(), {0, 1});
  }
  return c;
}

std::vector<double> random_theta(int p, Rng& rng) {
  std::vector<double> th(static_cast<std::size_t>(p));
  for (auto& v : th) v = rng.uniform(-kPi, kPi);
  return th;
}

// d/dx of exp(-i (X + xV)) via divided differences of the spectrum of X.
CMatrix exp_derivative(const CMatrix& x, const CMatrix& v) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
  const auto& lam = es.eigenvalues();
  const CMatrix& w = es.eigenvectors();
  CMatrix vt = w.adjoint() * (-kI * v) * w;
  for (Eigen::Index a = 0; a < lam.size(); ++a)
    for (Eigen::Index b = 0; b < lam.size(); ++b) {
      const double da = lam(a) - lam(b);
      const Complex f = std::abs(da) < 1e-12
                            ? std::polar(1.0, -lam(a))
                            : (std::polar(1.0, -lam(a)) - std::polar(1.0, -lam(b))) / (-kI * da);
      vt(a, b) *= f;
    }
  return w * vt * w.adjoint();
}

}  // namespace

TEST_CASE("cost expectation against dense unitaries") {
  const StateVector zero(1);
  ParamCircuit one(1);
  one.rotation("Z", 0);
  const Hamiltonian ident(1, {{"I", 1.0}});
  CHECK(cost_expectation(one, std::vector<double>{0.4}, ident, zero) == doctest::Approx(1.0));

  // RZ(θ) on |+> measured in X.
  ParamCircuit rz(1);
  rz.gate(gates::H(), {0}).rotation("Z", 0);
  const Hamiltonian x(1, {{"X", 1.0}});
  for (double th : {0.0, 0.3, 1.7, -2.2})
    CHECK(std::abs(cost_expectation(rz, std::vector<double>{th}, x, zero) - std::cos(th)) < 1e-12);

  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const auto c = random_general_circuit(n, 4, rng);
    const auto th = random_theta(4, rng);
    const CMatrix o = random_hermitian(1 << n, rng);
    const auto terms = pauli_decompose(o);
    const Hamiltonian h(n, terms);
    const StateVector psi0 = StateVector::haar_random(n, rng);
    const CVector out = dense_circuit_unitary(c, th, {}) * psi0.amplitudes();
    CHECK(std::abs(cost_expectation(c, th, h, psi0) - out.dot(o * out).real()) < 1e-10);
    CHECK(max_abs(c.unitary(th) - dense_circuit_unitary(c, th, {})) < 1e-10);
  }
  CHECK_THROWS_AS(cost_expectation(rz, std::vector<double>{0.1}, Hamiltonian(2, {{"ZZ", 1.0}}), zero), Error);
}

TEST_CASE("exact parameter shift") {
  ParamCircuit rz(1);
  rz.gate(gates::H(), {0}).rotation("Z", 0);
  const Hamiltonian x(1, {{"X", 1.0}});
  const StateVector zero(1);
  for (double th : {0.3, 1.1, -2.5}) {
    const auto g = parameter_shift_gradient(rz, std::vector<double>{th}, x, zero);
    CHECK(std::abs(g.value[0] + std::sin(th)) < 1e-12);
  }
  CHECK(std::abs(parameter_shift_gradient(rz, std::vector<double>{0.0}, x, zero).value[0]) < 1e-14);

  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4;
    const auto c = random_commuting_circuit(n, 6, rng);
    const auto th = random_theta(6, rng);
    const Hamiltonian h(n, pauli_decompose(random_hermitian(16, rng)));
    const StateVector psi0(n);
    const auto ps = parameter_shift_gradient(c, th, h, psi0);
    const auto fd = finite_difference_gradient([&](std::span<const double> t) { return cost_expectation(c, t, h, psi0); }, th);
    for (int j = 0; j < 6; ++j) CHECK(std::abs(ps.value[j] - fd[j]) < 1e-6);
  }

  ParamCircuit bad(1);
  bad.generator({{"X", {0, {{0, 1.0}}, {}}}, {"Z", {0, {{0, 1.0}}, {}}}});
  try {
    parameter_shift_gradient(bad, std::vector<double>{0.2}, x, zero);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedGenerator);
  }
}

TEST_CASE("stochastic parameter shift") {
  Rng rng(31);
  const StateVector zero(2);
  const Hamiltonian h(2, {{"XI", 0.7}, {"ZY", -0.4}, {"IZ", 0.2}});
  const auto obs = observable(h);

  // Commuting multi-term layer: stochastic mean equals the exact shift.
  ParamCircuit comm(2);
  comm.gate(gates::H(), {0});
  comm.generator({{"ZZ", {0.1, {{0, 1.0}}, {}}}, {"ZI", {0, {{1, 0.8}}, {}}}, {"IZ", {0.3, {}, {}}}});
  comm.rotation("XY", 2);
  const std::vector<double> th{0.4, -0.9, 1.3};
  const auto exact = parameter_shift_gradient(comm, th, obs, zero.amplitudes());
  const auto est = gradient(comm, th, obs, zero.amplitudes(), 4000, rng);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(est.value[j] - exact.value[j]) < 1e-12);
  const auto single = stochastic_parameter_shift(comm, 1, "ZZ", th, obs, zero.amplitudes(), 4000, rng);
  const double dx = exact.value[0];  // weight 1 on θ₀
  CHECK(std::abs(single.value[0] - dx) <= 5 * single.std_error[0] + 1e-12);

  // V absent from a non-commuting generator.
  ParamCircuit gen(2);
  gen.gate(gates::H(), {1});
  gen.generator({{"XI", {0.8, {}, {}}}, {"ZZ", {-0.5, {}, {}}}, {"IY", {0.4, {}, {}}}});
  gen.rotation("YX", 0);
  const std::vector<double> th1{0.6};
  const auto sps = stochastic_parameter_shift(gen, 1, "YZ", th1, obs, zero.amplitudes(), 20000, rng);
  CVector pre = zero.amplitudes();
  gen.apply_range(pre, 0, 1, th1, {});
  const CMatrix xg = gen.layer_generator(1, th1, {});
  CVector dpsi = exp_derivative(xg, pauli_matrix("YZ")) * pre;
  CVector out = pre;
  gen.apply_range(out, 1, gen.size(), th1, {});
  gen.apply_range(dpsi, 2, gen.size(), th1, {});
  const double oracle = 2 * out.dot(h.apply(dpsi)).real();
  CHECK(std::isfinite(sps.std_error[0]));
  CHECK(std::abs(sps.value[0] - oracle) <= 5 * sps.std_error[0]);

  // No parameterized layers.
  ParamCircuit fixed(2);
  fixed.gate(gates::CNOT(), {0, 1});
  const auto z = gradient(fixed, std::vector<double>{0.0, 0.0}, obs, zero.amplitudes(), 100, rng);
  CHECK(z.value == std::vector<double>{0.0, 0.0});
}

TEST_CASE("stochastic gradient matches finite differences on random circuits") {
  Rng rng(123);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(trial % 4);
    const auto c = random_general_circuit(n, 3, rng);
    const auto th = random_theta(3, rng);
    const Hamiltonian h(n, pauli_decompose(random_hermitian(1 << n, rng)));
    const StateVector psi0(n);
    const auto obs = observable(h);
    const auto est = gradient(c, th, obs, psi0.amplitudes(), 2000, rng);
    const auto fd =
        finite_difference_gradient([&](std::span<const double> t) { return cost_expectation(c, t, h, psi0); }, th);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(est.value[j] - fd[j]) <= 5 * est.std_error[j] + 1e-6);
      ++checked;
    }
  }
  CHECK(checked == 60);
}

TEST_CASE("gradient descent never accepts an uphill step") {
  const auto f = [](std::span<const double> x) { return std::pow(x[0] - 1, 2) + 10 * std::pow(x[1] + 2, 2); };
  const auto g = [](std::span<const double> x) { return std::vector<double>{2 * (x[0] - 1), 20 * (x[1] + 2)}; };
  GDConfig cfg;
  cfg.step = 0.5;  // unstable without backtracking
  cfg.momentum = 0.3;
  const auto r = gradient_descent(f, g, {0.0, 0.0}, cfg);
  for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
  CHECK(std::abs(r.theta[0] - 1) < 1e-6);
  CHECK(std::abs(r.theta[1] + 2) < 1e-6);
}

TEST_CASE("VQE") {
  Rng rng(5);
  ParamCircuit ry(1);
  ry.rotation("Y", 0);
  const auto z = vqe(Hamiltonian(1, {{"Z", 1.0}}), ry, {}, rng);
  CHECK(z.energy == doctest::Approx(-1.0).epsilon(1e-9));
  const auto id = vqe(Hamiltonian(1, {{"I", 1.0}}), ry, {}, rng);
  CHECK(id.energy == doctest::Approx(1.0));

  IsingModel tfim(4);
  for (int i = 0; i < 3; ++i) tfim.add_coupling(i, i + 1, -1.0);
  for (int i = 0; i < 4; ++i) tfim.c[i] = -1.0;
  const auto h = tfim.hamiltonian();
  const auto r = vqe(h, hardware_efficient_ansatz(4, 4), {}, rng);
  CHECK(r.energy >= r.exact_ground - 1e-9);
  CHECK(r.energy - r.exact_ground < 1e-3);
}

TEST_CASE("max-cut and QUBO mappings") {
  const std::vector<Edge> tri{{0, 1}, {1, 2}, {0, 2}};
  const auto m = maxcut_to_ising(3, tri);
  const auto bf = brute_force(m);
  CHECK(bf.min_energy == doctest::Approx(-2.0));
  CHECK(bf.ground_states.size() == 6);
  for (std::uint64_t i = 0; i < 8; ++i) {
    const auto z = spins_of_index(i, 3);
    CHECK(m.energy(z) == doctest::Approx(-cut_value(tri, z)));
    CHECK(index_of_spins(z) == i);
  }
  const auto empty = maxcut_to_ising(4, {});
  const RVector ed = empty.diagonal();
  CHECK(ed.maxCoeff() == ed.minCoeff());
  const std::vector<Edge> path{{0, 1}, {1, 2}};
  CHECK(brute_force(maxcut_to_ising(3, path)).min_energy == doctest::Approx(-2.0));

  // Diagonal of the Pauli Hamiltonian equals the classical energies.
  const CMatrix hm = m.hamiltonian().matrix();
  CHECK(max_abs(RVector(hm.diagonal().real()) - m.diagonal()) < 1e-12);

  Rng rng(77);
  for (int n : {1, 2, 3, 5, 8, 12, 16}) {
    Qubo q;
    q.q = RMatrix::Random(n, n);
    q.b = RVector::Random(n);
    q.constant = rng.normal();
    const auto ising = qubo_to_ising(q);
    double worst = 0;
    std::vector<int> bits(static_cast<std::size_t>(n));
    for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
      for (int i = 0; i < n; ++i) bits[i] = bit_of(idx, i, n);
      worst = std::max(worst, std::abs(ising.energy_of_index(idx) - q.value(bits)));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("simulated annealing reaches the brute-force ground energy") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    IsingModel m(8);
    for (int i = 0; i < 8; ++i) {
      m.h[i] = rng.normal();
      for (int j = i + 1; j < 8; ++j)
        if (rng.bernoulli(0.5)) m.add_coupling(i, j, rng.normal());
    }
    const auto sa = simulated_annealing(m, {}, rng);
    CHECK(sa.energy == doctest::Approx(brute_force(m).min_energy).epsilon(1e-9));
  }
}

TEST_CASE("QAOA") {
  Rng rng(3);
  const std::vector<Edge> tri{{0, 1}, {1, 2}, {0, 2}};
  const auto m = maxcut_to_ising(3, tri);
  QAOAConfig cfg;
  cfg.p = 0;
  CHECK(qaoa(m, cfg, rng).approx_ratio == doctest::Approx(0.75));
  cfg.p = 2;
  const auto r = qaoa(m, cfg, rng);
  CHECK(r.approx_ratio >= 0.99);
  CHECK(r.gammas.size() == 2);

  const auto c = qaoa_circuit(m, 2);
  const CVector plus = CVector::Constant(8, 1 / std::sqrt(8.0));
  std::vector<double> th{r.gammas[0], r.betas[0], r.gammas[1], r.betas[1]};
  CHECK(std::abs(c.apply(th, plus).norm() - 1) < 1e-12);

  // Prism graph, 3-regular on six vertices.
  const std::vector<Edge> prism{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}, {1, 4}, {2, 5}};
  const auto mp = maxcut_to_ising(6, prism);
  cfg.p = 0;
  const double base = qaoa(mp, cfg, rng).approx_ratio;
  cfg.p = 3;
  cfg.restarts = 2;
  CHECK(qaoa(mp, cfg, rng).approx_ratio > base);
}

TEST_CASE("QBoost objective") {
  // One perfect learner.
  RMatrix h1(1, 4);
  h1 << 1, -1, 1, -1;
  const std::vector<double> y1{1, -1, 1, -1};
  const auto p1 = qboost_objective(h1, y1, 0.0, 3);
  const auto bf = brute_force(p1.ising);
  REQUIRE(bf.ground_states.size() == 1);
  const auto z = spins_of_index(bf.ground_states[0], 3);
  std::vector<int> bits;
  for (int s : z) bits.push_back(s < 0 ? 1 : 0);
  CHECK(p1.weights(bits)[0] == doctest::Approx(0.875));

  const auto huge = qboost_objective(h1, y1, 1e6, 3);
  const auto bh = brute_force(huge.ising);
  CHECK(bh.ground_states == std::vector<std::uint64_t>{0});

  Rng rng(12);
  RMatrix h(3, 8);
  std::vector<double> y(8);
  for (int i = 0; i < 8; ++i) {
    y[i] = rng.bernoulli(0.5) ? 1 : -1;
    for (int k = 0; k < 3; ++k) h(k, i) = rng.bernoulli(0.7) ? y[i] : -y[i];
  }
  const double lambda = 0.05;
  const auto p = qboost_objective(h, y, lambda, 2);
  std::vector<int> b(6);
  double worst = 0;
  for (std::uint64_t idx = 0; idx < 64; ++idx) {
    for (int i = 0; i < 6; ++i) b[i] = bit_of(idx, i, 6);
    const auto w = p.weights(b);
    const double direct = qboost_direct_loss(h, y, lambda, w);
    worst = std::max(worst, std::abs(p.loss(b) - direct));
    worst = std::max(worst, std::abs(p.ising.energy_of_index(idx) - direct));
  }
  CHECK(worst < 1e-12);
  const auto sa = simulated_annealing(p.ising, {}, rng);
  CHECK(sa.energy == doctest::Approx(brute_force(p.ising).min_energy).epsilon(1e-12));
}

TEST_CASE("Gibbs states from the pair construction") {
  const auto hot = gibbs_pair_prepare(1e6, 2);
  CHECK(max_abs(hot.matrix() - CMatrix::Identity(4, 4) / 4.0) < 1e-5);

  const auto one = gibbs_pair_prepare(1.0, 1);
  const double e = std::exp(1.0), ie = std::exp(-1.0);
  CMatrix expect(2, 2);
  // e^{-σx}/Z = (cosh 1 I - sinh 1 σx) / (2 cosh 1).
  expect << 0.5, -0.5 * (e - ie) / (e + ie), -0.5 * (e - ie) / (e + ie), 0.5;
  CHECK(max_abs(one.matrix() - expect) < 1e-12);

  for (int n = 1; n <= 4; ++n)
    for (double t : {0.3, 1.0, 4.0}) {
      std::vector<PauliTerm> terms;
      for (int q = 0; q < n; ++q) terms.push_back({pauli_string(n, {{q, 'X'}}), 1.0});
      const CMatrix h0 = Hamiltonian(n, terms).matrix();
      CMatrix g = CMatrix((-h0 / t).exp());
      g /= g.trace();
      CHECK(max_abs(gibbs_pair_prepare(t, n).matrix() - g) < 1e-10);
    }
}

TEST_CASE("TFIM Gibbs distribution") {
  Rng rng(8);
  IsingModel m(3);
  m.add_coupling(0, 1, 0.7);
  m.add_coupling(1, 2, -1.2);
  m.h = {0.2, -0.5, 0.9};
  const double t = 0.8;
  const auto g = tfim_gibbs(m, t);
  const RVector e = m.diagonal();
  double z = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) z += std::exp(-e(i) / t);
  double sum = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    CHECK(std::abs(g.p[i] - std::exp(-e(i) / t) / z) < 1e-12);
    sum += g.p[i];
  }
  CHECK(sum == doctest::Approx(1.0));

  const auto inf = tfim_gibbs(m, 1e9);
  for (double v : inf.p) CHECK(std::abs(v - 0.125) < 1e-8);

  IsingModel two(2);
  two.add_coupling(0, 1, 1.0);
  two.h = {1.0, 1.0};
  two.c = {1.0, 1.0};
  const auto g2 = tfim_gibbs(two, 1.0);
  CMatrix rho = CMatrix((-two.hamiltonian().matrix()).exp());
  rho /= rho.trace();
  for (int i = 0; i < 4; ++i) CHECK(std::abs(g2.p[i] - rho(i, i).real()) < 1e-12);
  CHECK(max_abs(g2.rho.matrix() - rho) < 1e-12);
}

TEST_CASE("barren plateau statistics") {
  Rng rng(2);
  BarrenConfig cfg;
  cfg.qubits = {2, 3};
  cfg.samples = 4000;
  for (const auto& row : barren_experiment(cfg, rng)) {
    CHECK(std::abs(row.mean) < 5 * row.mean_std_error);
    CHECK(std::abs(row.variance - row.haar_exact) < 5 * row.variance_std_error);
  }
  cfg.identity_generator = true;
  cfg.ensemble = BarrenEnsemble::kBrickwork;
  for (const auto& row : barren_experiment(cfg, rng)) {
    CHECK(std::abs(row.mean) < 1e-14);
    CHECK(row.variance < 1e-28);
    CHECK(std::abs(row.haar_exact) < 1e-14);
  }

  // The leading-order form is the large-dimension limit of the exact one.
  for (int n = 2; n <= 20; n += 6) {
    const double d = std::ldexp(1.0, n);
    const double exact = barren_haar_variance(0, d, 0, d, 1, d);
    const double lead = barren_case3_closed_form(d, 1, d, 0, d);
    CHECK(exact < lead);
    CHECK(lead / exact - 1 < 2.0 / d);
  }

  const auto u = brickwork_unitary(3, 9, rng);
  CHECK(is_unitary(u));
}

TEST_CASE("Landau-Zener transition probability") {
  CHECK(landau_zener(1.0, 0.0, 50) == doctest::Approx(1.0).epsilon(1e-9));
  for (double r : {0.5, 0.1}) {
    const double p = landau_zener(1.0, std::sqrt(r));
    CHECK(std::abs(p - std::exp(-2 * kPi * r)) < 0.05 * std::exp(-2 * kPi * r));
  }
  CHECK(landau_zener_closed_form(1.0, std::sqrt(0.5)) == doctest::Approx(0.0432139).epsilon(1e-5));
}

TEST_CASE("adiabatic following") {
  const int n = 3;
  std::vector<PauliTerm> mix;
  for (int q = 0; q < n; ++q) mix.push_back({pauli_string(n, {{q, 'X'}}), -1.0});
  IsingModel ising(n);
  ising.add_coupling(0, 1, 1.0);
  ising.add_coupling(1, 2, 0.7);
  ising.add_coupling(0, 2, -0.4);
  ising.h = {0.3, -0.2, 0.5};
  const CMatrix h0 = Hamiltonian(n, mix).matrix();
  const CMatrix h1 = ising.hamiltonian().matrix();

  const auto same = adiabatic_follow(h0, h0, AnnealSchedule::linear(10));
  CHECK(1 - same.min_fidelity() < 1e-10);

  const auto t50 = adiabatic_follow(h0, h1, AnnealSchedule::linear(50));
  const auto t100 = adiabatic_follow(h0, h1, AnnealSchedule::linear(100));
  CHECK(!t50.gap_warning);
  const double ratio = std::sqrt(1 - t50.min_fidelity()) / std::sqrt(1 - t100.min_fidelity());
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
  CHECK(adiabatic_follow(h0, h1, AnnealSchedule::linear(400)).fidelity.back() > 0.999);

  AnnealSchedule bad{[](double s) { return 1 - s; }, 1.0};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("variational adiabatic descent and loss spread") {
  Rng rng(6);
  const int n = 2;
  const auto c = hardware_efficient_ansatz(n, 2);
  const auto h_of_s = [n](double s) {
    std::vector<PauliTerm> t;
    for (int q = 0; q < n; ++q) t.push_back({pauli_string(n, {{q, 'Z'}}), -(1 - s)});
    t.push_back({pauli_string(n, {{0, 'X'}, {1, 'X'}}), -s});
    t.push_back({pauli_string(n, {{0, 'Z'}, {1, 'Z'}}), -s * 0.5});
    return Hamiltonian(n, t);
  };
  const std::vector<double> deltas{1e-3, 2e-3, 2 * kPi};
  const std::vector<double> probe{1.0};
  const auto r = variational_adiabatic_descent(c, h_of_s, 11, 0.1, 300, deltas, probe, 4000, rng);
  REQUIRE(r.spreads.size() == 3);
  CHECK(r.losses.back() - ground_energy(h_of_s(1.0)) < 1e-4);
  // Near a minimum the spread grows quadratically in Δθ.
  const double q = r.spreads[1].loss_std / r.spreads[0].loss_std;
  CHECK(q > 3.0);
  CHECK(q < 5.0);
  CHECK(r.spreads[2].loss_std > 100 * r.spreads[1].loss_std);

  // Random-point spread of a global projector shrinks with width.
  std::vector<double> wide;
  for (int m : {2, 4, 6}) {
    const auto cm = hardware_efficient_ansatz(m, m);
    std::vector<double> th(static_cast<std::size_t>(cm.num_params()), 0.0);
    std::vector<PauliTerm> proj;
    // |0...0><0...0| = Π (I + Z)/2 expanded over subsets.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      std::string s(static_cast<std::size_t>(m), 'I');
      for (int qb = 0; qb < m; ++qb)
        if ((mask >> qb) & 1U) s[qb] = 'Z';
      proj.push_back({s, std::ldexp(1.0, -m)});
    }
    wide.push_back(loss_spread(cm, th, Hamiltonian(m, proj), kPi, 2000, rng));
  }
  CHECK(wide[0] > wide[1]);
  CHECK(wide[1] > wide[2]);
}

TEST_CASE("DQC1 model values and gradients") {
  ParamCircuit empty(2);
  auto v = dqc1_model(empty, {}, {});
  CHECK(v.value == doctest::Approx(1.0));

  ParamCircuit z(1);
  z.rotation("Z", 0, 1.0);
  for (double th : {0.2, 1.4}) {
    const auto r = dqc1_model(z, {}, std::vector<double>{th});
    CHECK(std::abs(r.value - std::cos(th)) < 1e-12);
    CHECK(std::abs(r.gradient[0] + std::sin(th)) < 1e-12);
  }

  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    ParamCircuit c(3);
    c.encode("XII", 0, 1.0).encode("IYI", 1, 0.5);
    auto rnd = random_commuting_circuit(3, 5, rng);
    c.append(rnd);
    c.encode("ZZZ", 0, 0.3);
    const std::vector<double> x{0.4, -1.1};
    const auto th = random_theta(5, rng);
    const auto r = dqc1_model(c, x, th);
    CHECK(std::abs(r.value - dense_circuit_unitary(c, th, x).trace().real() / 8) < 1e-10);
    const auto fd = finite_difference_gradient(
        [&](std::span<const double> t) { return dqc1_model(c, x, t).value; }, th);
    for (int j = 0; j < 5; ++j) CHECK(std::abs(r.gradient[j] - fd[j]) < 1e-6);
  }

  ParamCircuit bad(1);
  bad.generator({{"X", {0, {{0, 1.0}}, {}}}, {"Y", {0, {{0, 1.0}}, {}}}});
  CHECK_THROWS_AS(dqc1_model(bad, {}, std::vector<double>{0.1}), Error);
}

TEST_CASE("variational classifier") {
  CMatrix p0 = CMatrix::Zero(2, 2), p1 = CMatrix::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  const std::vector<CMatrix> proj{p0, p1};

  // Data already at the poles.
  ParamCircuit pole(1);
  pole.encode("Y", 0, 0.5).rotation("Y", 0);
  Dataset poles{{{0.0}, {kPi}, {0.0}, {kPi}}, {0, 1, 0, 1}};
  CHECK(classifier_accuracy(pole, proj, poles, std::vector<double>{0.0}) == 1.0);

  Rng rng(4);
  const auto l = classifier_probabilities(pole, proj, std::vector<double>{rng.uniform(0, 6)},
                                          std::vector<double>{rng.uniform(0, 6)});
  CHECK(l[0] >= 0);
  CHECK(l[1] >= 0);
  CHECK(std::abs(l[0] + l[1] - 1) < 1e-10);

  const std::vector<CMatrix> incomplete{p0};
  try {
    classifier_probabilities(pole, incomplete, std::vector<double>{0.0}, std::vector<double>{0.0});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIncompleteProjectors);
  }

  // Two interleaved half circles, angle-encoded with re-uploading.
  Dataset moons;
  for (int i = 0; i < 60; ++i) {
    const double t = kPi * rng.uniform();
    const int cls = i % 2;
    double x0 = cls ? 1 - std::cos(t) : std::cos(t);
    double x1 = cls ? 0.5 - std::sin(t) : std::sin(t);
    x0 += 0.1 * rng.normal();
    x1 += 0.1 * rng.normal();
    moons.x.push_back({x0, x1});
    moons.y.push_back(cls);
  }
  ParamCircuit c(2);
  int p = 0;
  for (int layer = 0; layer < 4; ++layer) {
    c.encode("YI", 0, 1.5).encode("IY", 1, 1.5);
    c.rotation("YI", p++).rotation("IY", p++).rotation("ZI", p++).rotation("IZ", p++);
    c.gate(gates::CZ(), {0, 1});
  }
  const CMatrix q0 = kron(p0, CMatrix::Identity(2, 2));
  const CMatrix q1 = kron(p1, CMatrix::Identity(2, 2));
  const std::vector<CMatrix> proj2{q0, q1};
  ClassifierConfig cfg;
  cfg.gd.max_iters = 300;
  const auto res = variational_classifier(c, proj2, moons, random_theta(c.num_params(), rng), cfg);
  for (std::size_t k = 1; k < res.loss_history.size(); ++k) CHECK(res.loss_history[k] <= res.loss_history[k - 1]);
  CHECK(res.accuracy > 0.9);
}
