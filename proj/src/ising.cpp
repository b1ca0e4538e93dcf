#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qmlab/error.hpp"
#include "qmlab/qprob.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/varqml.hpp"

namespace qmlab {

IsingModel::IsingModel(int num_spins)
    : n(num_spins), h(static_cast<std::size_t>(num_spins), 0.0), c(static_cast<std::size_t>(num_spins), 0.0) {
  require(num_spins >= 0, ErrorCode::kInvalidArgument, "negative spin count");
}

void IsingModel::add_coupling(int i, int j, double value) {
  require(i >= 0 && j >= 0 && i < n && j < n && i != j, ErrorCode::kInvalidArgument, "bad coupling sites");
  require(std::isfinite(value), ErrorCode::kInvalidArgument, "coupling must be finite");
  if (i > j) std::swap(i, j);
  for (auto& cp : couplings)
    if (cp.i == i && cp.j == j) {
      cp.value += value;
      return;
    }
  couplings.push_back({i, j, value});
}

double IsingModel::energy(std::span<const int> spins) const {
  require(static_cast<int>(spins.size()) == n, ErrorCode::kLengthMismatch, "spin count mismatch");
  double e = offset;
  for (const auto& cp : couplings) e += cp.value * spins[cp.i] * spins[cp.j];
  for (int i = 0; i < n; ++i) e += h[i] * spins[i];
  return e;
}

std::vector<int> spins_of_index(std::uint64_t index, int n) {
  std::vector<int> z(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) z[q] = bit_of(index, q, n) ? -1 : 1;
  return z;
}

std::uint64_t index_of_spins(std::span<const int> spins) {
  std::uint64_t idx = 0;
  for (int z : spins) idx = (idx << 1) | (z < 0 ? 1U : 0U);
  return idx;
}

double IsingModel::energy_of_index(std::uint64_t index) const {
  const auto z = spins_of_index(index, n);
  return energy(z);
}

RVector IsingModel::diagonal() const {
  require(n <= 26, ErrorCode::kInvalidArgument, "too many spins for a dense diagonal");
  const Eigen::Index d = Eigen::Index{1} << n;
  RVector e(d);
  for (Eigen::Index i = 0; i < d; ++i) e(i) = energy_of_index(static_cast<std::uint64_t>(i));
  return e;
}

bool IsingModel::has_transverse() const {
  return std::any_of(c.begin(), c.end(), [](double v) { return v != 0.0; });
}

Hamiltonian IsingModel::hamiltonian() const {
  std::vector<PauliTerm> terms;
  if (offset != 0) terms.push_back({std::string(static_cast<std::size_t>(n), 'I'), offset});
  for (const auto& cp : couplings)
    terms.push_back({pauli_string(n, {{cp.i, 'Z'}, {cp.j, 'Z'}}), cp.value});
  for (int i = 0; i < n; ++i) {
    if (h[i] != 0) terms.push_back({pauli_string(n, {{i, 'Z'}}), h[i]});
    if (c[i] != 0) terms.push_back({pauli_string(n, {{i, 'X'}}), c[i]});
  }
  return Hamiltonian(n, std::move(terms));
}

IsingModel maxcut_to_ising(int num_vertices, std::span<const Edge> edges) {
  IsingModel m(num_vertices);
  for (const auto& e : edges) {
    require(e.u != e.v, ErrorCode::kInvalidArgument, "self-loop in max-cut graph");
    m.add_coupling(e.u, e.v, 0.5);
    m.offset -= 0.5;
  }
  return m;
}

int cut_value(std::span<const Edge> edges, std::span<const int> spins) {
  int cut = 0;
  for (const auto& e : edges) cut += spins[e.u] != spins[e.v] ? 1 : 0;
  return cut;
}

double Qubo::value(std::span<const int> bits) const {
  require(static_cast<Eigen::Index>(bits.size()) == q.rows(), ErrorCode::kLengthMismatch, "bit count mismatch");
  double v = constant;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    if (!bits[i]) continue;
    v += b(i);
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      if (bits[j]) v += q(i, j);
  }
  return v;
}

IsingModel qubo_to_ising(const Qubo& qubo) {
  require(qubo.q.rows() == qubo.q.cols() && qubo.b.size() == qubo.q.rows(), ErrorCode::kDimensionMismatch,
          "QUBO matrix must be square and match the linear term");
  const int n = static_cast<int>(qubo.q.rows());
  const RMatrix s = 0.5 * (qubo.q + qubo.q.transpose());
  IsingModel m(n);
  m.offset = qubo.constant;
  for (int i = 0; i < n; ++i) {
    const double lin = s(i, i) + qubo.b(i);
    m.h[i] -= lin / 2;
    m.offset += lin / 2;
    for (int j = i + 1; j < n; ++j) {
      if (s(i, j) == 0) continue;
      m.add_coupling(i, j, s(i, j) / 2);
      m.h[i] -= s(i, j) / 2;
      m.h[j] -= s(i, j) / 2;
      m.offset += s(i, j) / 2;
    }
  }
  return m;
}

BruteForceResult brute_force(const IsingModel& model, double tol) {
  require(model.n <= 26, ErrorCode::kInvalidArgument, "too many spins for brute force");
  BruteForceResult r;
  r.min_energy = std::numeric_limits<double>::infinity();
  r.max_energy = -std::numeric_limits<double>::infinity();
  const RVector e = model.diagonal();
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    r.max_energy = std::max(r.max_energy, e(i));
    if (e(i) < r.min_energy - tol) {
      r.min_energy = e(i);
      r.ground_states.clear();
    }
    if (std::abs(e(i) - r.min_energy) <= tol) r.ground_states.push_back(static_cast<std::uint64_t>(i));
  }
  return r;
}

AnnealResult simulated_annealing(const IsingModel& model, const AnnealConfig& cfg, Rng& rng) {
  require(cfg.sweeps >= 1 && cfg.t_start > 0 && cfg.t_end > 0, ErrorCode::kInvalidArgument, "bad anneal config");
  const int n = model.n;
  std::vector<std::vector<std::pair<int, double>>> nbr(static_cast<std::size_t>(n));
  for (const auto& cp : model.couplings) {
    nbr[cp.i].push_back({cp.j, cp.value});
    nbr[cp.j].push_back({cp.i, cp.value});
  }
  AnnealResult best;
  best.energy = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    std::vector<int> z(static_cast<std::size_t>(n));
    for (auto& v : z) v = rng.bernoulli(0.5) ? 1 : -1;
    double e = model.energy(z);
    std::vector<int> local_best = z;
    double local_e = e;
    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
      const double frac = cfg.sweeps > 1 ? static_cast<double>(sweep) / (cfg.sweeps - 1) : 1.0;
      const double temp = cfg.t_start * std::pow(cfg.t_end / cfg.t_start, frac);
      for (int i = 0; i < n; ++i) {
        double field = model.h[i];
        for (const auto& [j, jv] : nbr[i]) field += jv * z[j];
        const double de = -2.0 * z[i] * field;
        if (de <= 0 || rng.uniform() < std::exp(-de / temp)) {
          z[i] = -z[i];
          e += de;
          if (e < local_e - 1e-12) {
            local_e = e;
            local_best = z;
          }
        }
      }
    }
    local_e = model.energy(local_best);
    if (local_e < best.energy) {
      best.energy = local_e;
      best.spins = local_best;
    }
  }
  return best;
}

ParamCircuit qaoa_circuit(const IsingModel& model, int p) {
  require(p >= 0, ErrorCode::kInvalidArgument, "QAOA depth must be >= 0");
  const int n = model.n;
  ParamCircuit c(n);
  for (int j = 0; j < p; ++j) {
    std::vector<GeneratorTerm> cost;
    for (const auto& cp : model.couplings) {
      GeneratorTerm t{pauli_string(n, {{cp.i, 'Z'}, {cp.j, 'Z'}}), {}};
      t.coeff.params.push_back({2 * j, cp.value});
      cost.push_back(std::move(t));
    }
    for (int i = 0; i < n; ++i)
      if (model.h[i] != 0) {
        GeneratorTerm t{pauli_string(n, {{i, 'Z'}}), {}};
        t.coeff.params.push_back({2 * j, model.h[i]});
        cost.push_back(std::move(t));
      }
    if (!cost.empty()) c.generator(std::move(cost));
    std::vector<GeneratorTerm> mixer;
    for (int i = 0; i < n; ++i) {
      GeneratorTerm t{pauli_string(n, {{i, 'X'}}), {}};
      t.coeff.params.push_back({2 * j + 1, 1.0});
      mixer.push_back(std::move(t));
    }
    c.generator(std::move(mixer));
  }
  return c;
}

QAOAResult qaoa(const IsingModel& model, const QAOAConfig& cfg, Rng& rng) {
  require(!model.has_transverse(), ErrorCode::kInvalidArgument, "QAOA cost must be diagonal");
  const int n = model.n;
  const RVector energies = model.diagonal();
  const auto bf = brute_force(model);
  const ParamCircuit circ = qaoa_circuit(model, cfg.p);
  const Eigen::Index d = energies.size();
  const CVector plus = CVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  const Expectation obs = [&](const CVector& psi) { return psi.cwiseAbs2().dot(energies); };
  // Circuits ignore the offset; only the gradient uses obs directly.
  const auto f = [&](std::span<const double> th) { return obs(circ.apply(th, plus)); };
  const auto grad = [&](std::span<const double> th) { return parameter_shift_gradient(circ, th, obs, plus).value; };

  std::vector<double> best_theta(static_cast<std::size_t>(2 * cfg.p));
  double best = f(best_theta);
  bool have = cfg.p == 0;
  for (int r = 0; r < std::max(1, cfg.restarts) && cfg.p > 0; ++r) {
    std::vector<double> th(static_cast<std::size_t>(2 * cfg.p));
    for (int j = 0; j < cfg.p; ++j) {
      if (r == 0) {
        const double frac = (j + 0.5) / cfg.p;
        th[2 * j] = frac * cfg.ramp_time;
        th[2 * j + 1] = (1 - frac) * cfg.ramp_time;
      } else {
        th[2 * j] = rng.uniform(0, std::numbers::pi);
        th[2 * j + 1] = rng.uniform(0, std::numbers::pi / 2);
      }
    }
    const auto res = gradient_descent(f, grad, th, cfg.gd);
    if (!have || res.value < best) {
      best = res.value;
      best_theta = res.theta;
      have = true;
    }
  }

  QAOAResult out;
  for (int j = 0; j < cfg.p; ++j) {
    out.gammas.push_back(best_theta[2 * j]);
    out.betas.push_back(best_theta[2 * j + 1]);
  }
  const CVector psi = circ.apply(best_theta, plus);
  const RVector probs = psi.cwiseAbs2();
  out.expected_energy = probs.dot(energies);
  const double span = bf.max_energy - bf.min_energy;
  out.approx_ratio = span > 0 ? (bf.max_energy - out.expected_energy) / span : 1.0;
  Eigen::Index arg = 0;
  probs.maxCoeff(&arg);
  out.best_index = static_cast<std::uint64_t>(arg);
  out.best_probability = probs(arg);
  out.best_bits.resize(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) out.best_bits[q] = bit_of(out.best_index, q, n);
  for (auto g : bf.ground_states) out.ground_probability += probs(static_cast<Eigen::Index>(g));
  return out;
}

std::vector<double> QBoostProblem::weights(std::span<const int> bits_assignment) const {
  require(static_cast<int>(bits_assignment.size()) == learners * bits, ErrorCode::kLengthMismatch,
          "bit assignment length mismatch");
  std::vector<double> w(static_cast<std::size_t>(learners), 0.0);
  for (int k = 0; k < learners; ++k)
    for (int j = 0; j < bits; ++j)
      if (bits_assignment[k * bits + j]) w[k] += std::ldexp(1.0, -(j + 1));
  return w;
}

double qboost_direct_loss(const RMatrix& predictions, std::span<const double> labels, double lambda,
                          std::span<const double> weights) {
  const auto k = predictions.rows();
  const auto n = predictions.cols();
  require(static_cast<Eigen::Index>(labels.size()) == n && static_cast<Eigen::Index>(weights.size()) == k,
          ErrorCode::kLengthMismatch, "label or weight count mismatch");
  double loss = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double pred = 0;
    for (Eigen::Index l = 0; l < k; ++l) pred += weights[l] * predictions(l, i);
    loss += (pred - labels[i]) * (pred - labels[i]);
  }
  loss /= static_cast<double>(n);
  for (double w : weights) loss += lambda * w;
  return loss;
}

QBoostProblem qboost_objective(const RMatrix& predictions, std::span<const double> labels, double lambda,
                               int bits_per_weight) {
  require(bits_per_weight >= 1, ErrorCode::kInvalidArgument, "bits per weight must be >= 1");
  require(lambda >= 0, ErrorCode::kInvalidArgument, "lambda must be >= 0");
  const auto k = predictions.rows();
  const auto n = predictions.cols();
  require(k >= 1 && n >= 1, ErrorCode::kInvalidArgument, "empty prediction matrix");
  require(static_cast<Eigen::Index>(labels.size()) == n, ErrorCode::kLengthMismatch, "label count mismatch");
  const Eigen::Index vars = k * bits_per_weight;
  RMatrix a = RMatrix::Zero(k, vars);
  for (Eigen::Index l = 0; l < k; ++l)
    for (int j = 0; j < bits_per_weight; ++j) a(l, l * bits_per_weight + j) = std::ldexp(1.0, -(j + 1));
  const Eigen::Map<const RVector> y(labels.data(), n);
  const RMatrix m = predictions.transpose() * a;  // N × vars
  const double inv_n = 1.0 / static_cast<double>(n);

  QBoostProblem p;
  p.learners = static_cast<int>(k);
  p.bits = bits_per_weight;
  p.lambda = lambda;
  p.qubo.q = inv_n * m.transpose() * m;
  p.qubo.b = -2.0 * inv_n * m.transpose() * y + lambda * a.transpose() * RVector::Ones(k);
  p.qubo.constant = inv_n * y.squaredNorm();
  p.ising = qubo_to_ising(p.qubo);
  return p;
}

StateVector gibbs_pair_state(double temperature, int n) {
  require(temperature > 0, ErrorCode::kInvalidArgument, "temperature must be positive");
  require(n >= 1 && n <= 12, ErrorCode::kInvalidArgument, "pair construction supports 1..12 qubits");
  // Per pair a|++> + b|-->, a/b = e^{-1/T}.
  const double r = std::exp(-1.0 / temperature);
  const double a = r / std::sqrt(1 + r * r);
  const double b = 1 / std::sqrt(1 + r * r);
  const int total = 2 * n;
  const Eigen::Index dim = Eigen::Index{1} << total;
  CVector amps(dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    double v = 1;
    for (int i = 0; i < n; ++i) {
      const int m = bit_of(static_cast<std::uint64_t>(idx), i, total);
      const int anc = bit_of(static_cast<std::uint64_t>(idx), n + i, total);
      v *= 0.5 * (a + ((m + anc) % 2 ? -b : b));
    }
    amps(idx) = v;
  }
  return StateVector::normalized(amps);
}

DensityMatrix gibbs_pair_prepare(double temperature, int n) {
  const auto psi = gibbs_pair_state(temperature, n);
  std::vector<int> keep(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) keep[i] = i;
  return partial_trace_qubits(DensityMatrix::from_pure(psi), keep);
}

DensityMatrix gibbs_state(const CMatrix& h, double temperature) {
  require(temperature > 0, ErrorCode::kInvalidArgument, "temperature must be positive");
  require(is_hermitian(h), ErrorCode::kNotHermitian, "Hamiltonian must be Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  const RVector& e = es.eigenvalues();
  const double e0 = e.minCoeff();
  RVector w(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) w(i) = std::exp(-(e(i) - e0) / temperature);
  w /= w.sum();
  CMatrix rho = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return DensityMatrix::from_matrix(0.5 * (rho + rho.adjoint()));
}

TfimGibbs tfim_gibbs(const IsingModel& model, double temperature) {
  require(model.n >= 1 && model.n <= 12, ErrorCode::kInvalidArgument, "TFIM Gibbs state supports 1..12 spins");
  TfimGibbs out;
  out.rho = gibbs_state(model.hamiltonian().matrix(), temperature);
  const CMatrix& m = out.rho.matrix();
  out.p.resize(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.p[i] = m(i, i).real();
  return out;
}

}  // namespace qmlab
