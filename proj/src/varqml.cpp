#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/varqml.hpp"

namespace qmlab {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4;

// exp(-i x P) psi = cos x psi - i sin x P psi.
void apply_pauli_rotation(CVector& amps, const std::string& labels, double x) {
  if (x == 0.0) return;
  const CVector p = apply_pauli(amps, labels);
  amps = std::cos(x) * amps - kI * std::sin(x) * p;
}

void check_labels(const std::string& labels, int n) {
  require(static_cast<int>(labels.size()) == n, ErrorCode::kDimensionMismatch,
          "Pauli string length does not match the qubit count");
  for (char ch : labels)
    require(ch == 'I' || ch == 'X' || ch == 'Y' || ch == 'Z', ErrorCode::kInvalidArgument,
            std::string("invalid Pauli label '") + ch + "'");
}

}  // namespace

double Binding::eval(std::span<const double> theta, std::span<const double> data) const {
  double v = offset;
  for (const auto& [j, w] : params) {
    require(j >= 0 && static_cast<std::size_t>(j) < theta.size(), ErrorCode::kDimensionMismatch,
            "parameter index out of range");
    v += w * theta[static_cast<std::size_t>(j)];
  }
  for (const auto& [f, w] : features) {
    require(f >= 0 && static_cast<std::size_t>(f) < data.size(), ErrorCode::kDimensionMismatch,
            "feature index out of range");
    v += w * data[static_cast<std::size_t>(f)];
  }
  return v;
}

double Binding::param_weight(int j) const {
  double w = 0;
  for (const auto& [k, v] : params)
    if (k == j) w += v;
  return w;
}

bool paulis_commute(const std::string& a, const std::string& b) {
  int anti = 0;
  for (std::size_t q = 0; q < a.size() && q < b.size(); ++q)
    if (a[q] != 'I' && b[q] != 'I' && a[q] != b[q]) ++anti;
  return anti % 2 == 0;
}

std::string pauli_string(int n, std::initializer_list<std::pair<int, char>> sites) {
  std::string s(static_cast<std::size_t>(n), 'I');
  for (const auto& [q, ch] : sites) {
    require(q >= 0 && q < n, ErrorCode::kTargetOutOfRange, "qubit out of range");
    s[static_cast<std::size_t>(q)] = ch;
  }
  return s;
}

bool Layer::commuting() const {
  for (std::size_t a = 0; a < terms.size(); ++a)
    for (std::size_t b = a + 1; b < terms.size(); ++b)
      if (!paulis_commute(terms[a].labels, terms[b].labels)) return false;
  return true;
}

bool Layer::depends_on_params() const {
  return std::any_of(terms.begin(), terms.end(), [](const GeneratorTerm& t) { return !t.coeff.params.empty(); });
}

void ParamCircuit::track(const Binding& b) {
  for (const auto& [j, w] : b.params) {
    require(j >= 0, ErrorCode::kInvalidArgument, "negative parameter index");
    num_params_ = std::max(num_params_, j + 1);
  }
  for (const auto& [f, w] : b.features) {
    require(f >= 0, ErrorCode::kInvalidArgument, "negative feature index");
    num_features_ = std::max(num_features_, f + 1);
  }
}

ParamCircuit& ParamCircuit::rotation(const std::string& labels, int param, double weight) {
  GeneratorTerm t{labels, {}};
  t.coeff.params.push_back({param, weight});
  return generator({std::move(t)});
}

ParamCircuit& ParamCircuit::encode(const std::string& labels, int feature, double weight) {
  GeneratorTerm t{labels, {}};
  t.coeff.features.push_back({feature, weight});
  return generator({std::move(t)});
}

ParamCircuit& ParamCircuit::generator(std::vector<GeneratorTerm> terms) {
  for (const auto& t : terms) {
    check_labels(t.labels, n_);
    track(t.coeff);
  }
  Layer l;
  l.terms = std::move(terms);
  layers_.push_back(std::move(l));
  return *this;
}

ParamCircuit& ParamCircuit::fixed(const CMatrix& u, std::vector<int> targets) {
  require(u.rows() == (Eigen::Index{1} << targets.size()), ErrorCode::kDimensionMismatch,
          "fixed unitary size does not match target count");
  require(is_unitary(u), ErrorCode::kNotUnitary, "fixed layer must be unitary");
  for (int q : targets) require(q >= 0 && q < n_, ErrorCode::kTargetOutOfRange, "target out of range");
  Layer l;
  l.fixed = u;
  l.targets = std::move(targets);
  layers_.push_back(std::move(l));
  return *this;
}

ParamCircuit& ParamCircuit::append(const ParamCircuit& other) {
  require(other.n_ == n_, ErrorCode::kDimensionMismatch, "circuit widths differ");
  for (const auto& l : other.layers_) {
    for (const auto& t : l.terms) track(t.coeff);
    layers_.push_back(l);
  }
  return *this;
}

CMatrix ParamCircuit::layer_generator(std::size_t t, std::span<const double> theta,
                                      std::span<const double> data) const {
  const Layer& l = layers_.at(t);
  require(!l.is_fixed(), ErrorCode::kInvalidArgument, "fixed layer has no generator");
  const Eigen::Index d = Eigen::Index{1} << n_;
  CMatrix g = CMatrix::Zero(d, d);
  for (const auto& term : l.terms) g += term.coeff.eval(theta, data) * pauli_matrix(term.labels);
  return g;
}

void ParamCircuit::apply_layer(CVector& amps, std::size_t t, std::span<const double> theta,
                               std::span<const double> data, int term, double extra) const {
  const Layer& l = layers_[t];
  if (l.is_fixed()) {
    apply_matrix(amps, n_, *l.fixed, l.targets);
    return;
  }
  if (l.commuting()) {
    for (std::size_t k = 0; k < l.terms.size(); ++k) {
      double x = l.terms[k].coeff.eval(theta, data);
      if (static_cast<int>(k) == term) x += extra;
      apply_pauli_rotation(amps, l.terms[k].labels, x);
    }
    return;
  }
  CMatrix g = layer_generator(t, theta, data);
  if (term >= 0) g += extra * pauli_matrix(l.terms[static_cast<std::size_t>(term)].labels);
  amps = exp_hermitian(g, 1.0) * amps;
}

void ParamCircuit::apply_range(CVector& amps, std::size_t begin, std::size_t end, std::span<const double> theta,
                               std::span<const double> data) const {
  for (std::size_t t = begin; t < end; ++t) apply_layer(amps, t, theta, data);
}

CVector ParamCircuit::apply(std::span<const double> theta, const CVector& psi0, std::span<const double> data) const {
  require(psi0.size() == (Eigen::Index{1} << n_), ErrorCode::kDimensionMismatch, "state width differs from circuit");
  require(static_cast<int>(theta.size()) >= num_params_, ErrorCode::kDimensionMismatch, "too few parameters");
  require(static_cast<int>(data.size()) >= num_features_, ErrorCode::kDimensionMismatch, "too few features");
  CVector amps = psi0;
  apply_range(amps, 0, layers_.size(), theta, data);
  return amps;
}

CMatrix ParamCircuit::unitary(std::span<const double> theta, std::span<const double> data) const {
  const Eigen::Index d = Eigen::Index{1} << n_;
  CMatrix u(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    CVector e = CVector::Zero(d);
    e(j) = 1;
    u.col(j) = apply(theta, e, data);
  }
  return u;
}

ParamCircuit hardware_efficient_ansatz(int n, int depth) {
  require(n >= 1 && depth >= 0, ErrorCode::kInvalidArgument, "bad ansatz shape");
  ParamCircuit c(n);
  int p = 0;
  for (int l = 0; l < depth; ++l) {
    for (int q = 0; q < n; ++q) {
      c.rotation(pauli_string(n, {{q, 'Y'}}), p++);
      c.rotation(pauli_string(n, {{q, 'Z'}}), p++);
    }
    for (int q = 0; q + 1 < n; ++q) c.gate(gates::CNOT(), {q, q + 1});
  }
  for (int q = 0; q < n; ++q) c.rotation(pauli_string(n, {{q, 'Y'}}), p++);
  return c;
}

Expectation observable(const Hamiltonian& h) {
  return [h](const CVector& psi) { return h.expectation(psi); };
}

Expectation observable(const CMatrix& o) {
  require(is_hermitian(o), ErrorCode::kNotHermitian, "observable must be Hermitian");
  return [o](const CVector& psi) { return psi.dot(o * psi).real(); };
}

double cost_expectation(const ParamCircuit& c, std::span<const double> theta, const Hamiltonian& o,
                        const StateVector& psi0, std::span<const double> data) {
  require(o.num_qubits() == c.num_qubits() && psi0.num_qubits() == c.num_qubits(), ErrorCode::kDimensionMismatch,
          "observable, state and circuit widths must agree");
  return o.expectation(c.apply(theta, psi0.amplitudes(), data));
}

GradientEstimate parameter_shift_gradient(const ParamCircuit& c, std::span<const double> theta,
                                          const Expectation& o, const CVector& psi0,
                                          std::span<const double> data) {
  GradientEstimate g;
  g.value.assign(theta.size(), 0.0);
  g.std_error.assign(theta.size(), 0.0);
  const auto& layers = c.layers();
  CVector prefix = psi0;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const Layer& l = layers[t];
    if (!l.is_fixed() && l.depends_on_params()) {
      require(l.commuting(), ErrorCode::kUnsupportedGenerator,
              "exact shift rule needs commuting Pauli terms in layer " + std::to_string(t));
      for (std::size_t k = 0; k < l.terms.size(); ++k) {
        if (l.terms[k].coeff.params.empty()) continue;
        double diff = 0;
        for (double sgn : {1.0, -1.0}) {
          CVector psi = prefix;
          c.apply_layer(psi, t, theta, data, static_cast<int>(k), sgn * kQuarterPi);
          c.apply_range(psi, t + 1, layers.size(), theta, data);
          diff += sgn * o(psi);
        }
        for (const auto& [j, w] : l.terms[k].coeff.params) g.value[static_cast<std::size_t>(j)] += w * diff;
      }
    }
    c.apply_layer(prefix, t, theta, data);
  }
  return g;
}

GradientEstimate parameter_shift_gradient(const ParamCircuit& c, std::span<const double> theta,
                                          const Hamiltonian& o, const StateVector& psi0) {
  return parameter_shift_gradient(c, theta, observable(o), psi0.amplitudes());
}

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                               std::span<const double> theta, double step) {
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double x0 = x[j];
    x[j] = x0 + step;
    const double fp = f(x);
    x[j] = x0 - step;
    const double fm = f(x);
    x[j] = x0;
    g[j] = (fp - fm) / (2 * step);
  }
  return g;
}

GradientEstimate stochastic_parameter_shift(const ParamCircuit& c, std::size_t t, const std::string& v,
                                            std::span<const double> theta, const Expectation& o,
                                            const CVector& psi0, int samples, Rng& rng,
                                            std::span<const double> data) {
  require(samples >= 2, ErrorCode::kInvalidArgument, "need at least two samples");
  require(t < c.size() && !c.layers()[t].is_fixed(), ErrorCode::kInvalidArgument, "layer is not a generator layer");
  const CMatrix x = c.layer_generator(t, theta, data);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
  const CMatrix& w = es.eigenvectors();
  const RVector& lam = es.eigenvalues();
  // exp(-i τ X) v evaluated in the eigenbasis of X.
  const auto evolve = [&](const CVector& v_eig, double tau) {
    CVector out(v_eig.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = std::polar(1.0, -lam(i) * tau) * v_eig(i);
    return CVector(w * out);
  };

  CVector prefix = psi0;
  c.apply_range(prefix, 0, t, theta, data);

  const CVector prefix_eig = w.adjoint() * prefix;
  const Eigen::Index d = prefix.size();
  CMatrix suffix = CMatrix::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    CVector col = suffix.col(j);
    c.apply_range(col, t + 1, c.size(), theta, data);
    suffix.col(j) = col;
  }
  double sum = 0, sum2 = 0;
  for (int k = 0; k < samples; ++k) {
    const double s = rng.uniform();
    const CVector mid = evolve(prefix_eig, 1 - s);
    double g = 0;
    for (double sgn : {1.0, -1.0}) {
      CVector psi = mid;
      apply_pauli_rotation(psi, v, sgn * kQuarterPi);
      psi = suffix * evolve(w.adjoint() * psi, s);
      g += sgn * o(psi);
    }
    sum += g;
    sum2 += g * g;
  }
  GradientEstimate out;
  const double m = sum / samples;
  const double var = std::max(0.0, (sum2 - samples * m * m) / (samples - 1));
  out.value = {m};
  out.std_error = {std::sqrt(var / samples)};
  out.samples = samples;
  return out;
}

GradientEstimate gradient(const ParamCircuit& c, std::span<const double> theta, const Expectation& o,
                          const CVector& psi0, int samples, Rng& rng, std::span<const double> data) {
  GradientEstimate g;
  g.value.assign(theta.size(), 0.0);
  std::vector<double> var(theta.size(), 0.0);
  const auto& layers = c.layers();
  CVector prefix = psi0;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const Layer& l = layers[t];
    if (!l.is_fixed() && l.depends_on_params()) {
      for (std::size_t k = 0; k < l.terms.size(); ++k) {
        const auto& params = l.terms[k].coeff.params;
        if (params.empty()) continue;
        double d = 0, se = 0;
        if (l.commuting()) {
          for (double sgn : {1.0, -1.0}) {
            CVector psi = prefix;
            c.apply_layer(psi, t, theta, data, static_cast<int>(k), sgn * kQuarterPi);
            c.apply_range(psi, t + 1, layers.size(), theta, data);
            d += sgn * o(psi);
          }
        } else {
          const auto est = stochastic_parameter_shift(c, t, l.terms[k].labels, theta, o, psi0, samples, rng, data);
          d = est.value[0];
          se = est.std_error[0];
          g.samples = samples;
        }
        for (const auto& [j, w] : params) {
          g.value[static_cast<std::size_t>(j)] += w * d;
          var[static_cast<std::size_t>(j)] += w * w * se * se;
        }
      }
    }
    c.apply_layer(prefix, t, theta, data);
  }
  g.std_error.resize(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) g.std_error[j] = std::sqrt(var[j]);
  return g;
}

OptimizeResult gradient_descent(const std::function<double(std::span<const double>)>& f,
                                const std::function<std::vector<double>(std::span<const double>)>& grad,
                                std::vector<double> theta0, const GDConfig& cfg) {
  require(cfg.step > 0 && cfg.momentum >= 0 && cfg.momentum < 1, ErrorCode::kInvalidArgument,
          "bad optimizer configuration");
  OptimizeResult r;
  r.theta = std::move(theta0);
  r.value = f(r.theta);
  r.history.push_back(r.value);
  std::vector<double> velocity(r.theta.size(), 0.0);
  double step = cfg.step;
  for (int it = 0; it < cfg.max_iters; ++it) {
    r.iterations = it + 1;
    const auto g = grad(r.theta);
    double gn = 0;
    for (double v : g) gn += v * v;
    if (std::sqrt(gn) < cfg.grad_tol) {
      r.converged = true;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      std::vector<double> vel(velocity.size());
      std::vector<double> trial(r.theta.size());
      for (std::size_t j = 0; j < trial.size(); ++j) {
        vel[j] = cfg.momentum * velocity[j] - step * g[j];
        trial[j] = r.theta[j] + vel[j];
      }
      const double fv = f(trial);
      if (!cfg.backtrack || fv <= r.value) {
        r.theta = std::move(trial);
        r.value = fv;
        velocity = std::move(vel);
        accepted = true;
        step = std::min(step * 1.1, cfg.step * 10);
        break;
      }
      std::fill(velocity.begin(), velocity.end(), 0.0);
      step *= 0.5;
    }
    r.history.push_back(r.value);
    if (!accepted) {
      // No descent direction found at machine precision.
      r.converged = true;
      break;
    }
  }
  return r;
}

double ground_energy(const Hamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

VQEResult vqe(const Hamiltonian& h, const ParamCircuit& ansatz, const VQEConfig& cfg, Rng& rng) {
  require(h.num_qubits() == ansatz.num_qubits(), ErrorCode::kDimensionMismatch, "ansatz width differs");
  const StateVector psi0(ansatz.num_qubits());
  const auto obs = observable(h);
  const auto f = [&](std::span<const double> th) { return obs(ansatz.apply(th, psi0.amplitudes())); };
  const auto grad = [&](std::span<const double> th) {
    return parameter_shift_gradient(ansatz, th, obs, psi0.amplitudes()).value;
  };
  VQEResult best;
  best.energy = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    std::vector<double> th(static_cast<std::size_t>(ansatz.num_params()));
    for (auto& v : th) v = rng.uniform(-cfg.init_scale, cfg.init_scale);
    const auto res = gradient_descent(f, grad, th, cfg.gd);
    if (res.value < best.energy) {
      best.energy = res.value;
      best.theta = res.theta;
      best.converged = res.converged;
      best.iterations = res.iterations;
    }
  }
  best.exact_ground = ground_energy(h);
  return best;
}

}  // namespace qmlab
