#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "experiments_internal.hpp"
#include "qmlab/algos.hpp"
#include "qmlab/error.hpp"
#include "qmlab/qprob.hpp"
#include "qmlab/simcore.hpp"

namespace qmlab::detail {

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

CMatrix random_hermitian(int dim, Rng& rng) {
  CMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  return 0.5 * (a + a.adjoint());
}

CMatrix hermitian_with_spectrum(const std::vector<double>& lambdas, Rng& rng) {
  const int dim = static_cast<int>(lambdas.size());
  const CMatrix v = haar_random_unitary(dim, rng).matrix();
  RVector d(dim);
  for (int i = 0; i < dim; ++i) d(i) = lambdas[static_cast<std::size_t>(i)];
  return v * d.cast<Complex>().asDiagonal() * v.adjoint();
}

std::string bits_of(const std::vector<int>& t) {
  std::string s;
  for (int b : t) s += static_cast<char>('0' + b);
  return s;
}

ResultTable entropy(RunContext&) {
  ResultTable t;
  t.columns = {"quantity", "value", "reference", "abs_error"};
  const auto p = ProbVector::from({0.5, 0.25, 0.125, 0.125});
  const double s = shannon_entropy(p);
  const double d = relative_entropy(p, ProbVector::uniform(4));
  t.add_row(row("shannon_bits", s, 1.75, std::abs(s - 1.75)));
  t.add_row(row("relative_to_uniform_bits", d, 0.25, std::abs(d - 0.25)));
  return t;
}

ResultTable teleport_runs(RunContext& ctx) {
  const int runs = ctx.params.positive("runs");
  ResultTable t;
  t.columns = {"check", "index", "m1", "m2", "fidelity"};
  const double h = 1 / std::sqrt(2.0);
  const std::array<std::array<double, 4>, 4> expect{{{h, 0, 0, h}, {h, 0, 0, -h}, {0, h, h, 0}, {0, h, -h, 0}}};
  const std::array<BellVariant, 4> variants{BellVariant::kPhiPlus, BellVariant::kPhiMinus, BellVariant::kPsiPlus,
                                            BellVariant::kPsiMinus};
  for (int v = 0; v < 4; ++v) {
    CVector e(4);
    for (int i = 0; i < 4; ++i) e(i) = expect[v][i];
    const StateVector b = bell_prepare(variants[v]);
    // Exact preparation: the amplitudes themselves, not just the overlap.
    const double dist = (b.amplitudes() - e).cwiseAbs().maxCoeff();
    t.add_row(row("bell", v, 0, 0, 1.0 - dist));
  }
  for (int r = 0; r < runs; ++r) {
    const StateVector psi = StateVector::haar_random(1, ctx.rng);
    const auto out = teleport(psi, ctx.rng);
    t.add_row(row("teleport", r, out.m1, out.m2, out.output.fidelity(psi)));
  }
  return t;
}

ResultTable deutsch_jozsa_all(RunContext& ctx) {
  ResultTable t;
  t.columns = {"n", "table", "promise", "answer", "p_all_zero", "correct"};
  for (int n : ctx.params.integers("qubits")) {
    require(n >= 1 && n <= 4, ErrorCode::kBadConfig, "qubits must lie in [1, 4]");
    const int size = 1 << n;
    for (std::uint32_t mask = 0; mask < (1u << size); ++mask) {
      const int ones = std::popcount(mask);
      if (ones != 0 && ones != size && ones != size / 2) continue;
      std::vector<int> table(static_cast<std::size_t>(size));
      for (int x = 0; x < size; ++x) table[static_cast<std::size_t>(x)] = (mask >> x) & 1;
      const bool constant = ones == 0 || ones == size;
      const auto r = deutsch_jozsa(OracleFunction::from_table(n, table));
      const bool said_constant = r.answer == DJAnswer::kConstant;
      t.add_row(row(n, bits_of(table), constant ? "constant" : "balanced", said_constant ? "constant" : "balanced",
                    r.p_all_zero, said_constant == constant ? 1 : 0));
    }
  }
  return t;
}

ResultTable qft_check(RunContext& ctx) {
  const int max_n = ctx.params.positive("max_qubits");
  require(max_n <= 10, ErrorCode::kBadConfig, "max_qubits must be <= 10");
  ResultTable t;
  t.columns = {"n", "max_abs_diff", "gate_count", "expected_gate_count", "gates_per_n2"};
  for (int n = 1; n <= max_n; ++n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    CMatrix dft(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index k = 0; k < dim; ++k)
        dft(k, j) = std::polar(1 / std::sqrt(static_cast<double>(dim)), 2 * kPi * static_cast<double>(j * k % dim) / dim);
    const Circuit c = qft_circuit(n);
    const auto gates = static_cast<std::int64_t>(c.gate_count());
    // H per qubit, one controlled phase per pair, swaps for the bit reversal.
    const std::int64_t expected = n + n * (n - 1) / 2 + n / 2;
    t.add_row(row(n, max_abs(c.unitary() - dft), gates, expected, static_cast<double>(gates) / (n * n)));
  }
  return t;
}

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1 - d);
}

ResultTable qpe_bound(RunContext& ctx) {
  const int t_bits = ctx.params.positive("t_bits");
  const double eps = ctx.params.real("epsilon");
  const int grid = ctx.params.positive("grid");
  const int draws = ctx.params.positive("draws");
  require(eps > 0 && eps < 1, ErrorCode::kBadConfig, "epsilon must lie in (0, 1)");
  const int n = qpe_ancilla_count(t_bits, eps);
  require(n <= 12, ErrorCode::kBadConfig, "too many ancillas for dense simulation");
  const std::uint64_t size = std::uint64_t{1} << n;
  const StateVector one = StateVector::basis(1, 1);
  const double tol = std::ldexp(1.0, -t_bits);

  ResultTable t;
  t.columns = {"kind", "phi", "ancillas", "p_exact", "p_empirical", "bound"};
  // Offsets by the golden ratio keep grid phases off the 2^-n lattice.
  for (int k = 0; k < grid; ++k) {
    const double phi = (k + 0.6180339887498949) / grid;
    const auto dist = qpe_distribution(gates::Phase(2 * kPi * phi), one, n);
    double exact = 0;
    for (std::uint64_t m = 0; m < size; ++m)
      if (circular_distance(static_cast<double>(m) / size, phi) <= tol) exact += dist[m];
    long hits = 0;
    for (int s = 0; s < draws; ++s) {
      const std::uint64_t m = sample_index(dist, ctx.rng);
      hits += circular_distance(static_cast<double>(m) / size, phi) <= tol;
    }
    t.add_row(row("grid", phi, n, exact, static_cast<double>(hits) / draws, 1 - eps));
  }
  for (std::uint64_t j = 0; j < size; ++j) {
    const double phi = static_cast<double>(j) / size;
    const auto dist = qpe_distribution(gates::Phase(2 * kPi * phi), one, n);
    long hits = 0;
    for (int s = 0; s < draws / 100 + 1; ++s) hits += sample_index(dist, ctx.rng) == j;
    t.add_row(row("exact", phi, n, dist[j], static_cast<double>(hits) / (draws / 100 + 1), 1.0));
  }
  return t;
}

ResultTable grover_sweep(RunContext& ctx) {
  const int lo = ctx.params.positive("min_qubits");
  const int hi = ctx.params.positive("max_qubits");
  const std::vector<int> solutions = ctx.params.integers("solutions");
  require(lo <= hi && hi <= 10, ErrorCode::kBadConfig, "need min_qubits <= max_qubits <= 10");
  ResultTable t;
  t.columns = {"qubits",     "items", "solutions",           "iterations", "iterations_formula",
               "marked",     "success_closed_form", "success_simulated", "abs_diff"};
  for (int n = lo; n <= hi; ++n) {
    const std::uint64_t items = std::uint64_t{1} << n;
    std::vector<std::uint64_t> ms;
    if (solutions.empty())
      for (std::uint64_t m = 1; m < items; ++m) ms.push_back(m);
    else
      for (int m : solutions)
        if (m >= 1 && static_cast<std::uint64_t>(m) < items) ms.push_back(static_cast<std::uint64_t>(m));
    for (std::uint64_t m : ms) {
      // Random marked subset by a partial shuffle.
      std::vector<std::uint64_t> perm(items);
      for (std::uint64_t i = 0; i < items; ++i) perm[i] = i;
      for (std::uint64_t i = 0; i < m; ++i) std::swap(perm[i], perm[i + ctx.rng.below(items - i)]);
      std::vector<int> table(items, 0);
      std::vector<std::uint64_t> marked(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
      std::sort(marked.begin(), marked.end());
      std::string marked_s;
      for (auto v : marked) {
        table[v] = 1;
        marked_s += (marked_s.empty() ? "" : " ") + std::to_string(v);
      }
      const auto r = grover(OracleFunction::from_table(n, table), ctx.rng);
      const int formula = static_cast<int>(std::floor(kPi / 4 * std::sqrt(static_cast<double>(items) / m)));
      t.add_row(row(n, items, m, r.iterations, formula, marked_s, r.success_closed_form, r.success_simulated,
                    std::abs(r.success_closed_form - r.success_simulated)));
    }
  }
  return t;
}

ResultTable dqc1_sweep(RunContext& ctx) {
  const int max_m = ctx.params.positive("max_qubits");
  const int instances = ctx.params.positive("instances");
  const int shots = ctx.params.positive("shots");
  require(max_m <= 8, ErrorCode::kBadConfig, "max_qubits must be <= 8");
  ResultTable t;
  t.columns = {"qubits", "instance", "estimate_re", "estimate_im", "exact_re", "exact_im",
               "stderr_re", "stderr_im", "z_re", "z_im"};
  for (int m = 1; m <= max_m; ++m)
    for (int i = 0; i < instances; ++i) {
      const Gate u = haar_random_unitary(1 << m, ctx.rng);
      const auto e = dqc1_trace(u, shots, ctx.rng);
      const Complex d = e.estimate - e.exact;
      t.add_row(row(m, i, e.estimate.real(), e.estimate.imag(), e.exact.real(), e.exact.imag(), e.stderr_re,
                    e.stderr_im, std::abs(d.real()) / e.stderr_re, std::abs(d.imag()) / e.stderr_im));
    }
  return t;
}

ResultTable lcu_sweep(RunContext& ctx) {
  const int instances = ctx.params.positive("instances");
  ResultTable t;
  t.columns = {"qubits", "instance", "terms", "alpha", "ancillas", "max_abs_error"};
  for (int n : ctx.params.integers("qubits")) {
    require(n >= 1 && n <= 3, ErrorCode::kBadConfig, "qubits must lie in [1, 3]");
    for (int i = 0; i < instances; ++i) {
      const CMatrix a = random_hermitian(1 << n, ctx.rng);
      const auto terms = pauli_decompose(a);
      const auto be = lcu_block_encode(lcu_from_pauli(terms));
      t.add_row(row(n, i, terms.size(), be.alpha, be.ancilla_qubits, max_abs(be.block() - a / be.alpha)));
    }
  }
  return t;
}

ResultTable linear_protocols(RunContext& ctx) {
  const int bits = ctx.params.positive("phase_bits");
  const int instances = ctx.params.positive("instances");
  const int qubits = ctx.params.positive("qubits");
  require(bits <= 10 && qubits <= 3, ErrorCode::kBadConfig, "phase_bits <= 10 and qubits <= 3");
  const int dim = 1 << qubits;
  const std::uint64_t levels = std::uint64_t{1} << bits;
  ResultTable t;
  t.columns = {"protocol", "instance", "c", "fidelity", "p_acc", "p_acc_expected", "abs_diff"};
  for (int i = 0; i < instances; ++i) {
    const StateVector x = StateVector::haar_random(qubits, ctx.rng);
    std::vector<double> mul(static_cast<std::size_t>(dim)), inv(static_cast<std::size_t>(dim));
    for (auto& l : mul) l = static_cast<double>(ctx.rng.below(levels)) / levels;
    for (auto& l : inv) l = static_cast<double>(1 + ctx.rng.below(levels - 1)) / levels;
    const CMatrix a = hermitian_with_spectrum(mul, ctx.rng);
    const auto rm = qpe_matrix_multiply(a, x, bits);
    const CVector ax = a * x.amplitudes();
    const double pm = ax.squaredNorm();
    const double fm = pm > 0 ? rm.output.fidelity(StateVector::normalized(ax)) : 1.0;
    t.add_row(row("multiply", i, 0.0, fm, rm.p_acc, pm, std::abs(rm.p_acc - pm)));

    const CMatrix b = hermitian_with_spectrum(inv, ctx.rng);
    const double c = *std::min_element(inv.begin(), inv.end());
    const auto ri = qpe_matrix_invert(b, x, c, bits);
    const CVector sol = b.inverse() * x.amplitudes();
    const double pi = c * c * sol.squaredNorm();
    t.add_row(row("invert", i, c, ri.output.fidelity(StateVector::normalized(sol)), ri.p_acc, pi,
                  std::abs(ri.p_acc - pi)));
  }
  return t;
}

}  // namespace

void add_quantum_experiments(std::vector<ExperimentDef>& out) {
  out.push_back({"entropy", "Shannon and relative entropy of the (1/2,1/4,1/8,1/8) example", Json::object(), entropy});
  out.push_back({"teleport", "Bell state preparation and teleportation fidelity over random inputs",
                 {{"runs", 1000}}, teleport_runs});
  out.push_back({"deutsch-jozsa", "Deutsch-Jozsa on every constant or balanced oracle", {{"qubits", {2, 3}}},
                 deutsch_jozsa_all});
  out.push_back({"qft", "QFT circuit against the DFT matrix and its gate count", {{"max_qubits", 6}}, qft_check});
  out.push_back({"qpe-bound", "phase estimation success probability against 1 - epsilon",
                 {{"t_bits", 3}, {"epsilon", 0.1}, {"grid", 20}, {"draws", 10000}}, qpe_bound});
  out.push_back({"grover", "Grover iteration count and success probability, simulated and closed form",
                 {{"min_qubits", 1}, {"max_qubits", 6}, {"solutions", Json::array()}}, grover_sweep});
  out.push_back({"dqc1", "one-clean-qubit normalized trace estimates of Haar unitaries",
                 {{"max_qubits", 5}, {"instances", 2}, {"shots", 100000}}, dqc1_sweep});
  out.push_back({"lcu", "LCU block encodings of Pauli decompositions of random Hermitian matrices",
                 {{"qubits", {2, 3}}, {"instances", 100}}, lcu_sweep});
  out.push_back({"linear-protocols", "phase-estimation matrix multiply and invert on representable spectra",
                 {{"phase_bits", 8}, {"instances", 10}, {"qubits", 2}}, linear_protocols});
}

}  // namespace qmlab::detail
