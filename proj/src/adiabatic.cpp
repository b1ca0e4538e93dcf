#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/varqml.hpp"

namespace qmlab {

namespace {

namespace odeint = boost::numeric::odeint;
using OdeState = std::vector<Complex>;

CVector to_eigen(const OdeState& x) {
  CVector v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
  return v;
}

void check_norm(const OdeState& x) {
  double nrm = 0;
  for (const auto& v : x) nrm += std::norm(v);
  require(std::isfinite(nrm) && std::abs(nrm - 1) < 1e-4, ErrorCode::kIntegratorDiverged,
          "state norm drifted to " + std::to_string(nrm));
}

}  // namespace

double landau_zener(double alpha, double delta, double t_span, const IntegratorConfig& cfg) {
  require(alpha > 0, ErrorCode::kInvalidArgument, "sweep rate must be positive");
  require(delta >= 0, ErrorCode::kInvalidArgument, "coupling must be non-negative");
  if (t_span <= 0) {
    const double tau = std::max(delta / alpha, delta > 0 ? 1 / delta : 0.0);
    t_span = std::max(200.0, 20 * tau);
  }
  const auto ham = [&](double t) {
    Eigen::Matrix2d h;
    h << alpha * t / 2, delta, delta, -alpha * t / 2;
    return h;
  };
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> start(ham(-t_span));
  OdeState x{start.eigenvectors()(0, 0), start.eigenvectors()(1, 0)};

  const auto rhs = [&](const OdeState& psi, OdeState& dpsi, double t) {
    const double d = alpha * t / 2;
    dpsi[0] = -kI * (d * psi[0] + delta * psi[1]);
    dpsi[1] = -kI * (delta * psi[0] - d * psi[1]);
  };
  try {
    odeint::integrate_adaptive(
        odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<OdeState>()), rhs, x,
        -t_span, t_span, cfg.initial_step);
  } catch (const std::exception& e) {
    fail(ErrorCode::kIntegratorDiverged, std::string("Landau-Zener integration failed: ") + e.what());
  }
  check_norm(x);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> end(ham(t_span));
  const Complex amp = end.eigenvectors()(0, 1) * x[0] + end.eigenvectors()(1, 1) * x[1];
  return std::norm(amp) / (std::norm(x[0]) + std::norm(x[1]));
}

void AnnealSchedule::validate(int grid) const {
  require(total_time > 0, ErrorCode::kInvalidArgument, "total time must be positive");
  require(std::abs(lambda(0.0)) < 1e-12 && std::abs(lambda(1.0) - 1) < 1e-12, ErrorCode::kInvalidArgument,
          "schedule must satisfy λ(0) = 0 and λ(1) = 1");
  double prev = lambda(0.0);
  for (int k = 1; k < grid; ++k) {
    const double v = lambda(static_cast<double>(k) / (grid - 1));
    require(v >= prev - 1e-12, ErrorCode::kInvalidArgument, "schedule must be monotone");
    prev = v;
  }
}

double AdiabaticTrace::min_fidelity() const { return *std::min_element(fidelity.begin(), fidelity.end()); }

AdiabaticTrace adiabatic_follow(const CMatrix& h0, const CMatrix& h1, const AnnealSchedule& schedule,
                                int grid_points, const IntegratorConfig& cfg) {
  require(h0.rows() == h1.rows() && h0.cols() == h1.cols() && h0.rows() == h0.cols(), ErrorCode::kDimensionMismatch,
          "Hamiltonians must be square and of equal size");
  require(is_hermitian(h0) && is_hermitian(h1), ErrorCode::kNotHermitian, "Hamiltonians must be Hermitian");
  require(grid_points >= 2, ErrorCode::kInvalidArgument, "need at least two grid points");
  schedule.validate();
  const double big_t = schedule.total_time;
  const auto ham = [&](double s) {
    const double l = schedule.lambda(s);
    return CMatrix((1 - l) * h0 + l * h1);
  };

  AdiabaticTrace trace;
  trace.min_gap = std::numeric_limits<double>::infinity();
  const auto ground = [&](double s, double& gap) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ham(s));
    const RVector& e = es.eigenvalues();
    gap = e.size() > 1 ? e(1) - e(0) : std::numeric_limits<double>::infinity();
    return CVector(es.eigenvectors().col(0));
  };

  double gap0 = 0;
  const CVector g0 = ground(0.0, gap0);
  OdeState x(static_cast<std::size_t>(g0.size()));
  for (Eigen::Index i = 0; i < g0.size(); ++i) x[static_cast<std::size_t>(i)] = g0(i);

  std::vector<double> times(static_cast<std::size_t>(grid_points));
  for (int k = 0; k < grid_points; ++k) times[k] = static_cast<double>(k) / (grid_points - 1);

  const auto rhs = [&](const OdeState& psi, OdeState& dpsi, double s) {
    const double l = schedule.lambda(s);
    const Eigen::Map<const CVector> p(psi.data(), static_cast<Eigen::Index>(psi.size()));
    Eigen::Map<CVector> dp(dpsi.data(), static_cast<Eigen::Index>(dpsi.size()));
    dp.noalias() = (-kI * big_t * (1 - l)) * (h0 * p);
    dp.noalias() += (-kI * big_t * l) * (h1 * p);
  };
  const auto observer = [&](const OdeState& psi, double s) {
    double gap = 0;
    const CVector g = ground(s, gap);
    trace.min_gap = std::min(trace.min_gap, gap);
    trace.s.push_back(s);
    const CVector p = to_eigen(psi);
    trace.fidelity.push_back(std::norm(g.dot(p)) / p.squaredNorm());
  };
  try {
    odeint::integrate_times(odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<OdeState>()),
                            rhs, x, times.begin(), times.end(), cfg.initial_step / big_t, observer);
  } catch (const std::exception& e) {
    fail(ErrorCode::kIntegratorDiverged, std::string("adiabatic integration failed: ") + e.what());
  }
  check_norm(x);
  trace.gap_warning = trace.min_gap < 1e-6;
  return trace;
}

double loss_spread(const ParamCircuit& c, std::span<const double> theta0, const Hamiltonian& h, double delta,
                   int probes, Rng& rng) {
  require(probes >= 2, ErrorCode::kInvalidArgument, "need at least two probes");
  const StateVector psi0(c.num_qubits());
  std::vector<double> th(theta0.begin(), theta0.end());
  double sum = 0, sum2 = 0;
  for (int k = 0; k < probes; ++k) {
    for (std::size_t j = 0; j < th.size(); ++j) th[j] = theta0[j] + rng.uniform(-delta, delta);
    const double v = h.expectation(c.apply(th, psi0.amplitudes()));
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / probes;
  return std::sqrt(std::max(0.0, (sum2 - probes * m * m) / (probes - 1)));
}

AdiabaticDescentResult variational_adiabatic_descent(const ParamCircuit& c,
                                                     const std::function<Hamiltonian(double)>& h_of_s,
                                                     int steps, double lr, int inner_iters,
                                                     std::span<const double> delta_thetas,
                                                     std::span<const double> probe_s, int probes, Rng& rng) {
  require(steps >= 2 && inner_iters >= 1 && lr > 0, ErrorCode::kInvalidArgument, "bad descent configuration");
  const StateVector psi0(c.num_qubits());
  AdiabaticDescentResult out;
  std::vector<double> theta(static_cast<std::size_t>(c.num_params()), 0.0);
  std::vector<bool> probed(probe_s.size(), false);
  GDConfig gd;
  gd.step = lr;
  gd.max_iters = inner_iters;
  gd.grad_tol = 0;
  for (int k = 0; k < steps; ++k) {
    const double s = static_cast<double>(k) / (steps - 1);
    const Hamiltonian h = h_of_s(s);
    const auto obs = observable(h);
    const auto f = [&](std::span<const double> th) { return obs(c.apply(th, psi0.amplitudes())); };
    const auto grad = [&](std::span<const double> th) {
      return parameter_shift_gradient(c, th, obs, psi0.amplitudes()).value;
    };
    const auto res = gradient_descent(f, grad, theta, gd);
    theta = res.theta;
    out.theta_path.push_back(theta);
    out.losses.push_back(res.value);
    for (std::size_t p = 0; p < probe_s.size(); ++p) {
      if (probed[p] || s + 0.5 / (steps - 1) < probe_s[p]) continue;
      probed[p] = true;
      for (double d : delta_thetas) out.spreads.push_back({s, d, loss_spread(c, theta, h, d, probes, rng)});
    }
  }
  return out;
}

}  // namespace qmlab
