#include "qmlab/qprob.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/simcore.hpp"

namespace qmlab {

namespace {

void check_base(double base) {
  require(base > 0.0 && base != 1.0, ErrorCode::kInvalidArgument, "log base must be positive and != 1");
}

std::vector<double> sorted_desc(std::span<const double> v, std::size_t len) {
  std::vector<double> s(v.begin(), v.end());
  s.resize(std::max(len, s.size()), 0.0);
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

}  // namespace

ProbVector ProbVector::from(std::vector<double> p, double tol) {
  require(!p.empty(), ErrorCode::kBadLength, "probability vector must be non-empty");
  double total = 0;
  for (double v : p) {
    require(std::isfinite(v) && v >= -tol, ErrorCode::kInvalidArgument, "probabilities must be non-negative");
    total += v;
  }
  require(std::abs(total - 1.0) <= tol, ErrorCode::kNotNormalized, "probabilities must sum to 1");
  for (double& v : p) v = std::max(v, 0.0);
  return ProbVector(std::move(p));
}

ProbVector ProbVector::uniform(std::size_t n) {
  require(n > 0, ErrorCode::kBadLength, "probability vector must be non-empty");
  return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double shannon_entropy(const ProbVector& p, double base) {
  check_base(base);
  double s = 0;
  for (double v : p.values())
    if (v > 0) s -= v * std::log(v);
  return s / std::log(base);
}

double relative_entropy(const ProbVector& p, const ProbVector& q, double base) {
  check_base(base);
  require(p.size() == q.size(), ErrorCode::kLengthMismatch, "distributions have different lengths");
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    require(q[i] > 0.0, ErrorCode::kInfiniteDivergence, "q vanishes where p does not");
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s / std::log(base);
}

bool majorizes(std::span<const double> x, std::span<const double> y, double tol) {
  require(x.size() == y.size(), ErrorCode::kLengthMismatch, "majorization needs equal lengths");
  const std::size_t len = x.size();
  const auto xs = sorted_desc(x, len);
  const auto ys = sorted_desc(y, len);
  double px = 0, py = 0;
  for (std::size_t k = 0; k < len; ++k) {
    px += xs[k];
    py += ys[k];
    if (px < py - tol) return false;
  }
  return true;
}

Majorization compare_majorization(std::span<const double> x, std::span<const double> y, double tol) {
  const bool xy = majorizes(x, y, tol);
  const bool yx = majorizes(y, x, tol);
  if (xy && yx) return Majorization::kEquivalent;
  if (xy) return Majorization::kMajorizes;
  if (yx) return Majorization::kMajorizedBy;
  return Majorization::kIncomparable;
}

double bhattacharyya_angle(const ProbVector& p, const ProbVector& q) {
  require(p.size() == q.size(), ErrorCode::kLengthMismatch, "distributions have different lengths");
  double c = 0;
  for (std::size_t i = 0; i < p.size(); ++i) c += std::sqrt(p[i] * q[i]);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

RMatrix fisher_rao_metric(const ProbVector& p) {
  RMatrix g = RMatrix::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    require(p[i] > 0.0, ErrorCode::kZeroProbabilityComponent, "Fisher metric undefined at p_i = 0");
    g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.25 / p[i];
  }
  return g;
}

double von_neumann_entropy(const DensityMatrix& rho, double base) {
  check_base(base);
  double s = 0;
  const RVector ev = rho.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > kEigenClip) s -= ev(i) * std::log(ev(i));
  return s / std::log(base);
}

double quantum_relative_entropy(const DensityMatrix& rho, const DensityMatrix& eta, double base) {
  check_base(base);
  require(rho.dim() == eta.dim(), ErrorCode::kDimensionMismatch, "density matrices differ in dimension");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(eta.matrix());
  const RVector& lam = es.eigenvalues();
  const CMatrix& vecs = es.eigenvectors();
  double cross = 0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    const double w = (vecs.col(k).adjoint() * rho.matrix() * vecs.col(k))(0).real();
    if (lam(k) > kEigenClip) {
      cross += w * std::log(lam(k));
    } else {
      require(w <= 1e-12, ErrorCode::kInfiniteDivergence, "support of rho is not contained in support of eta");
    }
  }
  double self = 0;
  const RVector ev = rho.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > kEigenClip) self += ev(i) * std::log(ev(i));
  return (self - cross) / std::log(base);
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector BlochVector::from(double x, double y, double z) {
  BlochVector b{x, y, z};
  require(b.norm() <= 1.0 + 1e-12, ErrorCode::kOutsideBlochBall, "Bloch vector norm exceeds 1");
  return b;
}

BlochVector BlochVector::from_angles(double theta, double phi, double radius) {
  return from(radius * std::sin(theta) * std::cos(phi), radius * std::sin(theta) * std::sin(phi),
              radius * std::cos(theta));
}

DensityMatrix to_density(const BlochVector& b) {
  require(b.norm() <= 1.0 + 1e-12, ErrorCode::kOutsideBlochBall, "Bloch vector norm exceeds 1");
  CMatrix m(2, 2);
  m << 1.0 + b.z, Complex(b.x, -b.y), Complex(b.x, b.y), 1.0 - b.z;
  m *= 0.5;
  return DensityMatrix::from_matrix(m, 1e-10);
}

BlochVector bloch_vector(const DensityMatrix& rho) {
  require(rho.dim() == 2, ErrorCode::kBadDimension, "Bloch vector needs a single-qubit state");
  const CMatrix& m = rho.matrix();
  return BlochVector{2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real()};
}

double qubit_relative_entropy_closed_form(const BlochVector& a, const BlochVector& b) {
  const double ta = a.norm();
  const double tb = b.norm();
  require(tb < 1.0, ErrorCode::kInfiniteDivergence, "closed form needs a mixed second argument");
  // x ln x terms of the first state's eigenvalues (1 ± |a|)/2.
  auto xlogx = [](double v) { return v > 0 ? v * std::log(v) : 0.0; };
  const double self = xlogx(0.5 * (1 + ta)) + xlogx(0.5 * (1 - ta));
  const double proj = tb > 0 ? (a.x * b.x + a.y * b.y + a.z * b.z) / tb : 0.0;
  const double cross = 0.5 * std::log(0.25 * (1 - tb * tb)) + 0.5 * proj * std::log((1 + tb) / (1 - tb));
  return self - cross;
}

CVector SchmidtForm::reconstruct() const {
  if (lambdas.empty()) return CVector();
  CVector out = CVector::Zero(left.front().size() * right.front().size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) out += std::sqrt(lambdas[k]) * kron(left[k], right[k]);
  return out;
}

SchmidtForm schmidt_decompose(const StateVector& psi, int left_qubits, double cutoff) {
  require(left_qubits >= 0 && left_qubits <= psi.num_qubits(), ErrorCode::kBadDimension,
          "split point outside the register");
  const int left_dim = 1 << left_qubits;
  return schmidt_decompose(psi.amplitudes(), left_dim, static_cast<int>(psi.dim()) / left_dim, cutoff);
}

SchmidtForm schmidt_decompose(const CVector& psi, int left_dim, int right_dim, double cutoff) {
  require(static_cast<Eigen::Index>(left_dim) * right_dim == psi.size(), ErrorCode::kBadDimension,
          "factor dimensions do not match the state");
  CMatrix m(left_dim, right_dim);
  for (int a = 0; a < left_dim; ++a)
    for (int b = 0; b < right_dim; ++b) m(a, b) = psi(static_cast<Eigen::Index>(a) * right_dim + b);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtForm out;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double s = svd.singularValues()(k);
    if (s <= cutoff) continue;
    CVector u = svd.matrixU().col(k);
    CVector v = svd.matrixV().col(k).conjugate();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (std::abs(u(i)) > 1e-12) {
        const Complex phase = u(i) / std::abs(u(i));
        u /= phase;
        v *= phase;
        break;
      }
    }
    out.lambdas.push_back(s * s);
    out.left.push_back(std::move(u));
    out.right.push_back(std::move(v));
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims, std::span<const int> keep) {
  long total = 1;
  for (int d : dims) {
    require(d > 0, ErrorCode::kBadDimension, "subsystem dimensions must be positive");
    total *= d;
  }
  require(total == rho.dim(), ErrorCode::kDimensionMismatch, "subsystem dimensions do not match");
  const int m = static_cast<int>(dims.size());
  std::vector<bool> kept(m, false);
  for (int k : keep) {
    require(k >= 0 && k < m, ErrorCode::kTargetOutOfRange, "kept subsystem index out of range");
    kept[k] = true;
  }
  long keep_dim = 1;
  for (int j = 0; j < m; ++j)
    if (kept[j]) keep_dim *= dims[j];
  // Split each full index into (kept index, traced index).
  std::vector<long> kidx(total), tidx(total);
  for (long i = 0; i < total; ++i) {
    long rem = i, kmul = 1, tmul = 1, ki = 0, ti = 0;
    for (int j = m - 1; j >= 0; --j) {
      const long digit = rem % dims[j];
      rem /= dims[j];
      if (kept[j]) {
        ki += digit * kmul;
        kmul *= dims[j];
      } else {
        ti += digit * tmul;
        tmul *= dims[j];
      }
    }
    kidx[i] = ki;
    tidx[i] = ti;
  }
  CMatrix out = CMatrix::Zero(keep_dim, keep_dim);
  const CMatrix& r = rho.matrix();
  for (long i = 0; i < total; ++i)
    for (long j = 0; j < total; ++j)
      if (tidx[i] == tidx[j]) out(kidx[i], kidx[j]) += r(i, j);
  return DensityMatrix::from_matrix(out, 1e-8);
}

DensityMatrix partial_trace_qubits(const DensityMatrix& rho, std::span<const int> keep) {
  require(is_power_of_two(static_cast<std::uint64_t>(rho.dim())), ErrorCode::kBadDimension,
          "qubit partial trace needs a power-of-two dimension");
  std::vector<int> dims(index_bits(static_cast<std::uint64_t>(rho.dim())), 2);
  return partial_trace(rho, dims, keep);
}

MeasurementOutcome measurement_update(const DensityMatrix& rho, const CMatrix& projector, double tol) {
  require(projector.rows() == rho.dim() && projector.cols() == rho.dim(), ErrorCode::kDimensionMismatch,
          "projector dimension does not match the state");
  require((projector * projector - projector).cwiseAbs().maxCoeff() <= 1e-10, ErrorCode::kInvalidArgument,
          "operator is not a projector");
  const CMatrix num = projector * rho.matrix() * projector.adjoint();
  const double p = num.trace().real();
  require(p > tol, ErrorCode::kZeroProbabilityBranch, "measurement branch has zero probability");
  return {p, DensityMatrix::from_matrix(num / p, 1e-8)};
}

std::array<CMatrix, 4> sic_qubit_povm() {
  std::array<CMatrix, 4> out;
  CVector v(2);
  v << 1.0, 0.0;
  out[0] = v * v.adjoint();
  for (int k = 0; k < 3; ++k) {
    const double ang = 2.0 * std::numbers::pi * k / 3.0;
    v << std::sqrt(1.0 / 3.0), std::sqrt(2.0 / 3.0) * std::polar(1.0, ang);
    out[k + 1] = v * v.adjoint();
  }
  return out;
}

std::vector<CMatrix> random_projective_measurement(int dim, Rng& rng) {
  const CMatrix u = haar_random_unitary(dim, rng).matrix();
  std::vector<CMatrix> out;
  for (int k = 0; k < dim; ++k) out.push_back(u.col(k) * u.col(k).adjoint());
  return out;
}

DensityMatrix random_density_matrix(int dim, Rng& rng, int rank) {
  if (rank <= 0) rank = dim;
  CMatrix g(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::from_matrix(rho, 1e-9);
}

}  // namespace qmlab
