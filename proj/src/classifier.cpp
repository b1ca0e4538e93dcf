#include <algorithm>
#include <cmath>

#include "qmlab/error.hpp"
#include "qmlab/varqml.hpp"

namespace qmlab {

namespace {

void apply_layer_to_columns(const ParamCircuit& c, CMatrix& m, std::size_t t, std::span<const double> theta,
                            std::span<const double> data) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    CVector col = m.col(j);
    c.apply_layer(col, t, theta, data);
    m.col(j) = col;
  }
}

void check_projectors(std::span<const CMatrix> projectors, int n) {
  require(!projectors.empty(), ErrorCode::kIncompleteProjectors, "no projectors");
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& p : projectors) {
    require(p.rows() == d && p.cols() == d, ErrorCode::kDimensionMismatch, "projector size differs from circuit");
    require(is_hermitian(p), ErrorCode::kNotHermitian, "projector must be Hermitian");
    sum += p;
  }
  require((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10, ErrorCode::kIncompleteProjectors,
          "projectors do not sum to the identity");
}

}  // namespace

Dqc1Value dqc1_model(const ParamCircuit& c, std::span<const double> x, std::span<const double> theta) {
  const int n = c.num_qubits();
  const Eigen::Index d = Eigen::Index{1} << n;
  const double scale = 1.0 / static_cast<double>(d);
  const CMatrix u = c.unitary(theta, x);
  Dqc1Value out;
  out.value = u.trace().real() * scale;
  out.gradient.assign(theta.size(), 0.0);

  CMatrix prefix = CMatrix::Identity(d, d);
  for (std::size_t t = 0; t < c.size(); ++t) {
    const Layer& l = c.layers()[t];
    apply_layer_to_columns(c, prefix, t, theta, x);
    if (l.is_fixed() || !l.depends_on_params()) continue;
    require(l.commuting(), ErrorCode::kUnsupportedGenerator,
            "trace derivative needs commuting Pauli terms in layer " + std::to_string(t));
    // ∂U/∂x = U_after (-iP) U_upto with U = U_after U_upto.
    const CMatrix after_prefix = u * prefix.adjoint();
    for (const auto& term : l.terms) {
      if (term.coeff.params.empty()) continue;
      CMatrix pm = prefix;
      for (Eigen::Index j = 0; j < d; ++j) pm.col(j) = apply_pauli(prefix.col(j), term.labels);
      const double dv = (-kI * (after_prefix * pm).trace()).real() * scale;
      for (const auto& [j, w] : term.coeff.params) out.gradient[static_cast<std::size_t>(j)] += w * dv;
    }
  }
  return out;
}

std::vector<double> classifier_probabilities(const ParamCircuit& c, std::span<const CMatrix> projectors,
                                             std::span<const double> x, std::span<const double> theta) {
  check_projectors(projectors, c.num_qubits());
  const StateVector psi0(c.num_qubits());
  const CVector psi = c.apply(theta, psi0.amplitudes(), x);
  std::vector<double> l;
  l.reserve(projectors.size());
  for (const auto& p : projectors) l.push_back(std::max(0.0, psi.dot(p * psi).real()));
  return l;
}

double classifier_accuracy(const ParamCircuit& c, std::span<const CMatrix> projectors, const Dataset& data,
                           std::span<const double> theta) {
  require(data.x.size() == data.y.size() && !data.x.empty(), ErrorCode::kLengthMismatch, "bad dataset");
  int correct = 0;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const auto l = classifier_probabilities(c, projectors, data.x[i], theta);
    const auto arg = std::max_element(l.begin(), l.end()) - l.begin();
    correct += arg == data.y[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.x.size());
}

ClassifierResult variational_classifier(const ParamCircuit& c, std::span<const CMatrix> projectors,
                                        const Dataset& data, std::vector<double> theta0,
                                        const ClassifierConfig& cfg) {
  check_projectors(projectors, c.num_qubits());
  require(data.x.size() == data.y.size() && !data.x.empty(), ErrorCode::kLengthMismatch, "bad dataset");
  for (int y : data.y)
    require(y >= 0 && static_cast<std::size_t>(y) < projectors.size(), ErrorCode::kInvalidArgument,
            "label outside the projector range");
  theta0.resize(static_cast<std::size_t>(c.num_params()), 0.0);
  const StateVector psi0(c.num_qubits());
  std::vector<Expectation> obs;
  for (const auto& p : projectors) obs.push_back(observable(p));
  const double inv_n = 1.0 / static_cast<double>(data.x.size());

  const auto loss = [&](std::span<const double> th) {
    double l = 0;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      const CVector psi = c.apply(th, psi0.amplitudes(), data.x[i]);
      l -= std::log(std::max(cfg.prob_floor, obs[static_cast<std::size_t>(data.y[i])](psi)));
    }
    return l * inv_n;
  };
  const auto grad = [&](std::span<const double> th) {
    std::vector<double> g(th.size(), 0.0);
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      const auto& o = obs[static_cast<std::size_t>(data.y[i])];
      const double p = std::max(cfg.prob_floor, o(c.apply(th, psi0.amplitudes(), data.x[i])));
      const auto dp = parameter_shift_gradient(c, th, o, psi0.amplitudes(), data.x[i]).value;
      for (std::size_t j = 0; j < g.size(); ++j) g[j] -= inv_n * dp[j] / p;
    }
    return g;
  };
  const auto res = gradient_descent(loss, grad, std::move(theta0), cfg.gd);
  ClassifierResult out;
  out.theta = res.theta;
  out.loss_history = res.history;
  out.accuracy = classifier_accuracy(c, projectors, data, out.theta);
  return out;
}

}  // namespace qmlab
