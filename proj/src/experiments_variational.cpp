#include <algorithm>
#include <cmath>
#include <numbers>

#include "experiments_internal.hpp"
#include "qmlab/encode.hpp"
#include "qmlab/error.hpp"
#include "qmlab/varqml.hpp"

namespace qmlab::detail {

namespace {

constexpr double kPi = std::numbers::pi;

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

std::vector<double> random_theta(int p, Rng& rng) {
  std::vector<double> th(static_cast<std::size_t>(p));
  for (auto& v : th) v = rng.uniform(-kPi, kPi);
  return th;
}

// ---------------------------------------------------------------------------

struct SpectrumCase {
  std::string label;
  EncodingSpec spec;
  int size = 0;
  int layers = 1;
  long max = 0;  // expected Ω = {-max, ..., max} in steps of `step`
  long step = 1;
};

ResultTable fourier_spectrum(RunContext& ctx) {
  const int max_r = ctx.params.positive("max_repeats");
  const int max_n = ctx.params.positive("max_exponential");
  const int fits = ctx.params.integer("fit_models");
  const std::vector<int> layer_list = ctx.params.integers("layers");
  require(max_n <= 6 && max_r <= 6, ErrorCode::kBadConfig, "max_exponential and max_repeats must be <= 6");

  std::vector<SpectrumCase> cases;
  for (int l : layer_list) {
    require(l >= 1 && l <= 4, ErrorCode::kBadConfig, "layers must lie in [1, 4]");
    cases.push_back({"hamiltonian", EncodingSpec::hamiltonian(CMatrix()), 1, l, 2L * l, 2});
    for (int r = 1; r <= max_r; ++r) {
      cases.push_back({"pauli-parallel", EncodingSpec::pauli_parallel(r), r, l, static_cast<long>(r) * l, 1});
      cases.push_back({"pauli-sequential", EncodingSpec::pauli_sequential(r), r, l, static_cast<long>(r) * l, 1});
    }
  }
  for (int n = 1; n <= max_n; ++n) {
    long m = 1;
    for (int k = 0; k < n; ++k) m *= 3;
    cases.push_back({"exponential", EncodingSpec::exponential(n), n, 1, (m - 1) / 2, 1});
  }

  ResultTable t;
  t.columns = {"encoding",     "size",      "layers",         "omega_count",   "expected_count", "omega_max",
               "expected_max", "matches",   "fitted_models",  "max_off_spectrum_power", "max_residual"};
  for (const auto& c : cases) {
    const auto omega = frequency_spectrum(c.spec, c.layers);
    std::vector<double> expected;
    for (long w = -c.max; w <= c.max; w += c.step) expected.push_back(static_cast<double>(w));
    bool matches = omega.omegas.size() == expected.size();
    for (std::size_t i = 0; matches && i < expected.size(); ++i)
      matches = std::abs(omega.omegas[i] - expected[i]) < 1e-9;
    double off = 0, resid = 0;
    for (int f = 0; f < fits; ++f) {
      const auto model = EncodedModel::random(c.spec, c.layers, ctx.rng);
      const auto fit = fit_fourier_coefficients([&](double x) { return model(x); }, omega);
      off = std::max(off, fit.off_spectrum_power);
      resid = std::max(resid, fit.max_residual);
    }
    t.add_row(row(c.label, c.size, c.layers, omega.omegas.size(), expected.size(), omega.max(),
                  static_cast<double>(c.max), matches ? 1 : 0, fits, off, resid));
  }
  return t;
}

// ---------------------------------------------------------------------------

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

// Layers of three random, generally non-commuting terms with shared parameters.
ParamCircuit random_general_circuit(int n, int params, Rng& rng) {
  ParamCircuit c(n);
  for (int layer = 0; layer < 3; ++layer) {
    std::vector<GeneratorTerm> terms;
    for (int k = 0; k < 3; ++k) {
      GeneratorTerm term{random_pauli(n, rng), {}};
      term.coeff.offset = rng.normal() * 0.3;
      term.coeff.params.push_back({static_cast<int>(rng.below(static_cast<std::uint64_t>(params))), rng.normal()});
      terms.push_back(std::move(term));
    }
    c.generator(std::move(terms));
    if (n > 1) c.gate(gates::CNOT(), {0, 1});
  }
  return c;
}

ResultTable gradients(RunContext& ctx) {
  const int circuits = ctx.params.positive("circuits");
  const int params = ctx.params.positive("params");
  const int samples = ctx.params.positive("samples");
  const int max_n = ctx.params.positive("max_qubits");
  require(max_n <= 6, ErrorCode::kBadConfig, "max_qubits must be <= 6");
  ResultTable t;
  t.columns = {"kind", "circuit", "qubits", "param", "estimate", "reference", "abs_diff", "std_error"};
  for (int kind = 0; kind < 2; ++kind)
    for (int i = 0; i < circuits; ++i) {
      const int n = 1 + i % max_n;
      const ParamCircuit c = kind == 0 ? random_commuting_circuit(n, params, ctx.rng)
                                       : random_general_circuit(n, params, ctx.rng);
      const auto th = random_theta(params, ctx.rng);
      const Hamiltonian h(n, pauli_decompose(random_hermitian(1 << n, ctx.rng)));
      const StateVector psi0(n);
      const auto fd = finite_difference_gradient(
          [&](std::span<const double> x) { return cost_expectation(c, x, h, psi0); }, th);
      const GradientEstimate g = kind == 0 ? parameter_shift_gradient(c, th, h, psi0)
                                           : gradient(c, th, observable(h), psi0.amplitudes(), samples, ctx.rng);
      for (int j = 0; j < params; ++j) {
        const auto u = static_cast<std::size_t>(j);
        const double se = g.std_error.size() > u ? g.std_error[u] : 0.0;
        t.add_row(row(kind == 0 ? "exact-shift" : "stochastic-shift", i, n, j, g.value[u], fd[u],
                      std::abs(g.value[u] - fd[u]), se));
      }
    }
  return t;
}

// ---------------------------------------------------------------------------

ResultTable barren(RunContext& ctx) {
  BarrenConfig cfg;
  cfg.qubits = ctx.params.integers("qubits");
  cfg.samples = ctx.params.positive("samples");
  cfg.depth = ctx.params.integer("depth");
  cfg.identity_generator = ctx.params.flag("identity_generator");
  const std::string ens = ctx.params.text("ensemble");
  const std::string obs = ctx.params.text("observable");
  require(ens == "global-haar" || ens == "brickwork", ErrorCode::kBadConfig,
          "ensemble must be \"global-haar\" or \"brickwork\"");
  require(obs == "local-z" || obs == "global-projector", ErrorCode::kBadConfig,
          "observable must be \"local-z\" or \"global-projector\"");
  for (int n : cfg.qubits) require(n >= 1 && n <= 8, ErrorCode::kBadConfig, "qubits must lie in [1, 8]");
  cfg.ensemble = ens == "brickwork" ? BarrenEnsemble::kBrickwork : BarrenEnsemble::kGlobalHaar;
  cfg.observable = obs == "local-z" ? BarrenObservable::kLocalZ : BarrenObservable::kGlobalProjector;

  ResultTable t;
  t.columns = {"n",        "depth", "samples",           "mean",          "mean_std_error",
               "variance", "variance_std_error",          "case3_closed_form", "haar_exact"};
  std::vector<double> ns, logs;
  for (const auto& r : barren_experiment(cfg, ctx.rng)) {
    t.add_row(row(r.n, r.depth, r.samples, r.mean, r.mean_std_error, r.variance, r.variance_std_error,
                  r.case3_closed_form, r.haar_exact));
    if (r.variance > 0) {
      ns.push_back(r.n);
      logs.push_back(std::log(r.variance));
    }
  }
  if (ns.size() >= 2) t.set_meta("log_variance_slope", format_double(fit_line(ns, logs).slope));
  t.set_meta("reference_slope", format_double(-2 * std::log(2.0)));
  return t;
}

ResultTable landau_zener_grid(RunContext& ctx) {
  const double alpha = ctx.params.real("alpha");
  require(alpha > 0, ErrorCode::kBadConfig, "alpha must be positive");
  ResultTable t;
  t.columns = {"alpha", "delta", "ratio", "p_numeric", "p_closed_form", "rel_error"};
  for (double r : ctx.params.reals("ratios")) {
    require(r > 0, ErrorCode::kBadConfig, "ratios must be positive");
    const double delta = std::sqrt(r * alpha);
    const double p = landau_zener(alpha, delta);
    const double ref = landau_zener_closed_form(alpha, delta);
    t.add_row(row(alpha, delta, r, p, ref, std::abs(p - ref) / ref));
  }
  return t;
}

ResultTable adiabatic(RunContext& ctx) {
  const std::vector<double> times = ctx.params.reals("times");
  const int grid = ctx.params.positive("grid_points");
  // Transverse mixer into a frustrated three-spin Ising cost.
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

  ResultTable t;
  t.columns = {"total_time", "min_fidelity", "deviation", "deviation_ratio", "terminal_fidelity", "min_gap",
               "gap_warning"};
  double prev = std::nan("");
  for (double tt : times) {
    require(tt > 0, ErrorCode::kBadConfig, "times must be positive");
    const auto tr = adiabatic_follow(h0, h1, AnnealSchedule::linear(tt), grid);
    const double dev = std::sqrt(std::max(0.0, 1 - tr.min_fidelity()));
    t.add_row(row(tt, tr.min_fidelity(), dev, prev / dev, tr.fidelity.back(), tr.min_gap, tr.gap_warning ? 1 : 0));
    prev = dev;
  }
  return t;
}

// ---------------------------------------------------------------------------

std::pair<int, std::vector<Edge>> named_graph(const std::string& name) {
  if (name == "triangle") return {3, {{0, 1}, {1, 2}, {0, 2}}};
  if (name == "square") return {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
  if (name == "prism") return {6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}, {1, 4}, {2, 5}}};
  fail(ErrorCode::kBadConfig, "graph must be \"triangle\", \"square\" or \"prism\"");
}

ResultTable qaoa_sweep(RunContext& ctx) {
  const auto [n, edges] = named_graph(ctx.params.text("graph"));
  QAOAConfig cfg;
  cfg.restarts = ctx.params.positive("restarts");
  const auto model = maxcut_to_ising(n, edges);
  const auto bf = brute_force(model);
  ResultTable t;
  t.columns = {"p", "approx_ratio", "expected_energy", "min_energy", "best_bits", "best_probability",
               "ground_probability"};
  for (int p : ctx.params.integers("depths")) {
    require(p >= 0 && p <= 8, ErrorCode::kBadConfig, "depths must lie in [0, 8]");
    cfg.p = p;
    const auto r = qaoa(model, cfg, ctx.rng);
    std::string bits;
    for (int b : r.best_bits) bits += static_cast<char>('0' + b);
    t.add_row(row(p, r.approx_ratio, r.expected_energy, bf.min_energy, bits, r.best_probability,
                  r.ground_probability));
  }
  return t;
}

ResultTable ising_qubo(RunContext& ctx) {
  const int max_vars = ctx.params.positive("max_vars");
  const int instances = ctx.params.positive("instances");
  require(max_vars <= 20, ErrorCode::kBadConfig, "max_vars must be <= 20");
  ResultTable t;
  t.columns = {"mapping", "vars", "instance", "assignments", "max_abs_diff"};
  for (int n = 1; n <= max_vars; ++n)
    for (int i = 0; i < instances; ++i) {
      Qubo q;
      q.q = RMatrix::Zero(n, n);
      q.b = RVector::Zero(n);
      for (int a = 0; a < n; ++a) {
        q.b(a) = ctx.rng.normal();
        for (int b = a; b < n; ++b) q.q(a, b) = ctx.rng.normal();
      }
      q.constant = ctx.rng.normal();
      std::vector<Edge> edges;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          if (ctx.rng.bernoulli(0.5)) edges.push_back({a, b});
      const IsingModel qi = qubo_to_ising(q);
      const IsingModel mi = maxcut_to_ising(n, edges);
      const std::uint64_t count = std::uint64_t{1} << n;
      double dq = 0, dm = 0;
      std::vector<int> bits(static_cast<std::size_t>(n));
      for (std::uint64_t idx = 0; idx < count; ++idx) {
        for (int k = 0; k < n; ++k) bits[static_cast<std::size_t>(k)] = bit_of(idx, k, n);
        dq = std::max(dq, std::abs(qi.energy_of_index(idx) - q.value(bits)));
        const auto spins = spins_of_index(idx, n);
        dm = std::max(dm, std::abs(mi.energy_of_index(idx) + cut_value(edges, spins)));
      }
      t.add_row(row("qubo", n, i, count, dq));
      t.add_row(row("maxcut", n, i, count, dm));
    }
  return t;
}

ResultTable qboost(RunContext& ctx) {
  const int learners = ctx.params.positive("learners");
  const int bits = ctx.params.positive("bits");
  const int samples = ctx.params.positive("samples");
  const double lambda = ctx.params.real("lambda");
  require(learners * bits <= 16, ErrorCode::kBadConfig, "learners * bits must be <= 16");
  RMatrix h(learners, samples);
  std::vector<double> y(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    y[static_cast<std::size_t>(i)] = ctx.rng.bernoulli(0.5) ? 1 : -1;
    for (int k = 0; k < learners; ++k) h(k, i) = ctx.rng.bernoulli(0.7) ? y[static_cast<std::size_t>(i)] : -y[static_cast<std::size_t>(i)];
  }
  const auto p = qboost_objective(h, y, lambda, bits);
  const int vars = learners * bits;
  ResultTable t;
  t.columns = {"assignment", "bits", "qubo_loss", "ising_energy", "direct_loss", "max_abs_diff"};
  std::vector<int> b(static_cast<std::size_t>(vars));
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << vars); ++idx) {
    std::string s;
    for (int i = 0; i < vars; ++i) {
      b[static_cast<std::size_t>(i)] = bit_of(idx, i, vars);
      s += static_cast<char>('0' + b[static_cast<std::size_t>(i)]);
    }
    const double direct = qboost_direct_loss(h, y, lambda, p.weights(b));
    const double ql = p.loss(b), ie = p.ising.energy_of_index(idx);
    t.add_row(row(idx, s, ql, ie, direct, std::max(std::abs(ql - direct), std::abs(ie - direct))));
  }
  return t;
}

CMatrix thermal(const CMatrix& h, double temperature) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const double emin = es.eigenvalues().minCoeff();
  RVector w = ((es.eigenvalues().array() - emin) * (-1 / temperature)).exp();
  w /= w.sum();
  return es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

ResultTable gibbs(RunContext& ctx) {
  const int max_n = ctx.params.positive("max_qubits");
  const std::vector<double> temps = ctx.params.reals("temperatures");
  require(max_n <= 6, ErrorCode::kBadConfig, "max_qubits must be <= 6");
  ResultTable t;
  t.columns = {"construction", "n", "temperature", "max_abs_error"};
  for (int n = 1; n <= max_n; ++n)
    for (double temp : temps) {
      require(temp > 0, ErrorCode::kBadConfig, "temperatures must be positive");
      std::vector<PauliTerm> terms;
      for (int q = 0; q < n; ++q) terms.push_back({pauli_string(n, {{q, 'X'}}), 1.0});
      const CMatrix ref = thermal(Hamiltonian(n, terms).matrix(), temp);
      const CMatrix got = gibbs_pair_prepare(temp, n).matrix();
      t.add_row(row("pair", n, temp, (got - ref).cwiseAbs().maxCoeff()));

      // Zero transverse field: the diagonal is the classical Boltzmann law.
      IsingModel m(n);
      for (int a = 0; a < n; ++a) {
        m.h[static_cast<std::size_t>(a)] = ctx.rng.normal();
        for (int b = a + 1; b < n; ++b) m.add_coupling(a, b, ctx.rng.normal());
      }
      const auto g = tfim_gibbs(m, temp);
      const RVector e = m.diagonal();
      const double emin = e.minCoeff();
      double z = 0;
      for (Eigen::Index i = 0; i < e.size(); ++i) z += std::exp(-(e(i) - emin) / temp);
      double err = 0;
      for (Eigen::Index i = 0; i < e.size(); ++i) {
        err = std::max(err, std::abs(g.p[static_cast<std::size_t>(i)] - std::exp(-(e(i) - emin) / temp) / z));
        for (Eigen::Index j = 0; j < e.size(); ++j)
          if (i != j) err = std::max(err, std::abs(g.rho.matrix()(i, j)));
      }
      t.add_row(row("tfim", n, temp, err));
    }
  return t;
}

}  // namespace

void add_variational_experiments(std::vector<ExperimentDef>& out) {
  out.push_back({"fourier-spectrum", "frequency spectra of encodings and Fourier fits of random encoded models",
                 {{"max_repeats", 3}, {"max_exponential", 5}, {"layers", {1, 2}}, {"fit_models", 3}},
                 fourier_spectrum});
  out.push_back({"gradients", "parameter-shift gradients against finite differences on random circuits",
                 {{"circuits", 20}, {"params", 3}, {"samples", 2000}, {"max_qubits", 4}}, gradients});
  out.push_back({"barren", "gradient mean and variance of random circuits against qubit count",
                 {{"ensemble", "global-haar"},
                  {"observable", "local-z"},
                  {"qubits", {2, 3, 4}},
                  {"samples", 10000},
                  {"depth", 0},
                  {"identity_generator", false}},
                 barren});
  out.push_back({"landau-zener", "two-level sweep transition probability against exp(-2 pi delta^2 / alpha)",
                 {{"alpha", 1.0}, {"ratios", {0.05, 0.3, 0.6, 0.9, 1.2, 1.5}}}, landau_zener_grid});
  out.push_back({"adiabatic", "ground-state following of a linear anneal against total time",
                 {{"times", {50.0, 100.0, 200.0}}, {"grid_points", 101}}, adiabatic});
  out.push_back({"qaoa", "QAOA max-cut approximation ratio against depth",
                 {{"graph", "triangle"}, {"depths", {1, 2, 3}}, {"restarts", 4}}, qaoa_sweep});
  out.push_back({"ising-qubo", "exhaustive Ising energy equivalence of QUBO and max-cut mappings",
                 {{"max_vars", 16}, {"instances", 1}}, ising_qubo});
  out.push_back({"qboost", "QBoost QUBO against the direct regularized loss on every assignment",
                 {{"learners", 3}, {"bits", 2}, {"samples", 8}, {"lambda", 0.05}}, qboost});
  out.push_back({"gibbs", "Gibbs states from the pair construction and the TFIM at zero field",
                 {{"max_qubits", 4}, {"temperatures", {0.3, 1.0, 4.0}}}, gibbs});
}

}  // namespace qmlab::detail
