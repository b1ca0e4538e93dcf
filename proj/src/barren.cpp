#include <algorithm>
#include <cmath>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/varqml.hpp"

namespace qmlab {

namespace {

struct Brick {
  int q;
  CMatrix u;
};

std::vector<Brick> sample_bricks(int n, int rows, Rng& rng) {
  std::vector<Brick> bricks;
  for (int r = 0; r < rows; ++r)
    for (int q = r % 2; q + 1 < n; q += 2) bricks.push_back({q, haar_random_unitary(4, rng).matrix()});
  // A two-qubit register has a single pair; odd rows would be empty.
  if (n == 2)
    for (int r = 1; r < rows; r += 2) bricks.push_back({0, haar_random_unitary(4, rng).matrix()});
  return bricks;
}

void apply_bricks(CVector& amps, int n, const std::vector<Brick>& bricks) {
  for (const auto& b : bricks) {
    const int t[2] = {b.q, b.q + 1};
    apply_matrix(amps, n, b.u, t);
  }
}

struct Moments {
  double mean = 0, mean_se = 0, var = 0, var_se = 0;
};

Moments moments(const std::vector<double>& g) {
  const double m = static_cast<double>(g.size());
  Moments out;
  for (double v : g) out.mean += v;
  out.mean /= m;
  double m2 = 0, m4 = 0;
  for (double v : g) {
    const double d = v - out.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  out.var = m2 / (m - 1);
  m4 /= m;
  out.mean_se = std::sqrt(out.var / m);
  const double s4 = out.var * out.var;
  out.var_se = std::sqrt(std::max(0.0, (m4 - s4 * (m - 3) / (m - 1)) / m));
  return out;
}

}  // namespace

CMatrix brickwork_unitary(int n, int rows, Rng& rng) {
  require(n >= 2, ErrorCode::kInvalidArgument, "brickwork needs at least two qubits");
  const auto bricks = sample_bricks(n, rows, rng);
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix u = CMatrix::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    CVector col = u.col(j);
    apply_bricks(col, n, bricks);
    u.col(j) = col;
  }
  return u;
}

double barren_case3_closed_form(double tr_h2, double tr_rho2, double tr_v2, double tr_v, double dim) {
  return 2 * tr_h2 * tr_rho2 * (tr_v2 / std::pow(dim, 3) - tr_v * tr_v / std::pow(dim, 4));
}

double barren_haar_variance(double tr_h, double tr_h2, double tr_v, double tr_v2, double tr_rho2, double dim) {
  const double n = dim;
  const double d2 = n * n - 1;
  // E tr(A²) for A = i[V, U†HU] over Haar U.
  const double e_tr_a2 = 2 * tr_v2 * tr_h2 / n -
                         2 * ((tr_v2 * tr_h * tr_h + tr_v * tr_v * tr_h2) / d2 -
                              (tr_v2 * tr_h2 + tr_v * tr_v * tr_h * tr_h) / (n * d2));
  return e_tr_a2 * (tr_rho2 - 1 / n) / d2;
}

std::vector<BarrenRow> barren_experiment(const BarrenConfig& cfg, Rng& rng) {
  require(cfg.samples >= 4, ErrorCode::kInvalidArgument, "need at least four samples");
  std::vector<BarrenRow> rows;
  for (std::size_t idx = 0; idx < cfg.qubits.size(); ++idx) {
    const int n = cfg.qubits[idx];
    require(n >= 2 && n <= 12, ErrorCode::kInvalidArgument, "barren experiment supports 2..12 qubits");
    Rng stream = rng.split(static_cast<std::uint64_t>(n));
    const Eigen::Index dim = Eigen::Index{1} << n;
    const int depth = cfg.ensemble == BarrenEnsemble::kBrickwork ? (cfg.depth > 0 ? cfg.depth : 3 * n) : 0;
    const bool local = cfg.observable == BarrenObservable::kLocalZ;
    const auto z0 = [&](Eigen::Index i) { return bit_of(static_cast<std::uint64_t>(i), 0, n) ? -1.0 : 1.0; };

    std::vector<double> grads(static_cast<std::size_t>(cfg.samples));
    for (int s = 0; s < cfg.samples; ++s) {
      CVector psi = CVector::Zero(dim);
      psi(0) = 1;
      CVector a, b;
      if (cfg.ensemble == BarrenEnsemble::kGlobalHaar) {
        psi = haar_random_unitary(static_cast<int>(dim), stream).matrix().col(0);
        CVector vpsi = psi;
        if (!cfg.identity_generator)
          for (Eigen::Index i = 0; i < dim; ++i) vpsi(i) *= z0(i);
        const CMatrix up = haar_random_unitary(static_cast<int>(dim), stream).matrix();
        a = up * psi;
        b = up * vpsi;
      } else {
        apply_bricks(psi, n, sample_bricks(n, depth, stream));
        CVector vpsi = psi;
        if (!cfg.identity_generator)
          for (Eigen::Index i = 0; i < dim; ++i) vpsi(i) *= z0(i);
        const auto up = sample_bricks(n, depth, stream);
        a = psi;
        b = vpsi;
        apply_bricks(a, n, up);
        apply_bricks(b, n, up);
      }
      Complex hab = 0;
      if (local) {
        for (Eigen::Index i = 0; i < dim; ++i) hab += z0(i) * std::conj(a(i)) * b(i);
      } else {
        hab = std::conj(a(0)) * b(0);
      }
      grads[static_cast<std::size_t>(s)] = 2 * hab.imag();
    }

    const auto mo = moments(grads);
    BarrenRow row;
    row.n = n;
    row.depth = depth;
    row.samples = cfg.samples;
    row.mean = mo.mean;
    row.mean_std_error = mo.mean_se;
    row.variance = mo.var;
    row.variance_std_error = mo.var_se;
    const double nd = static_cast<double>(dim);
    const double tr_h = local ? 0.0 : 1.0;
    const double tr_h2 = local ? nd : 1.0;
    const double tr_v = cfg.identity_generator ? nd : 0.0;
    const double tr_v2 = nd;
    row.case3_closed_form = barren_case3_closed_form(tr_h2, 1.0, tr_v2, tr_v, nd);
    row.haar_exact = barren_haar_variance(tr_h, tr_h2, tr_v, tr_v2, 1.0, nd);
    rows.push_back(row);
  }
  return rows;
}

SlopeFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::kLengthMismatch, "need matching samples, at least two");
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = m * sxx - sx * sx;
  require(den != 0, ErrorCode::kSingularSystem, "degenerate abscissae");
  SlopeFit f;
  f.slope = (m * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / m;
  return f;
}

}  // namespace qmlab
