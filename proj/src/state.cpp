#include <cmath>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/state.hpp"

namespace qmlab {

StateVector::StateVector(int num_qubits) : n_(num_qubits) {
  require(num_qubits >= 0 && num_qubits <= 30, ErrorCode::kBadDimension, "qubit count out of range");
  amps_ = CVector::Zero(Eigen::Index{1} << num_qubits);
  amps_(0) = 1.0;
}

StateVector StateVector::from_amplitudes(const CVector& amplitudes, double tol) {
  const auto size = static_cast<std::uint64_t>(amplitudes.size());
  require(is_power_of_two(size), ErrorCode::kBadDimension, "amplitude count must be a power of two");
  require(std::abs(amplitudes.norm() - 1.0) <= tol, ErrorCode::kNotNormalized,
          "state vector must have unit norm");
  return StateVector(index_bits(size), amplitudes);
}

StateVector StateVector::normalized(const CVector& amplitudes) {
  const double nrm = amplitudes.norm();
  require(nrm > 0.0, ErrorCode::kZeroVector, "cannot normalize a zero vector");
  return from_amplitudes(amplitudes / nrm);
}

StateVector StateVector::basis(int num_qubits, std::uint64_t index) {
  StateVector s(num_qubits);
  require(index < s.dim(), ErrorCode::kTargetOutOfRange, "basis index out of range");
  s.amps_(0) = 0.0;
  s.amps_(static_cast<Eigen::Index>(index)) = 1.0;
  return s;
}

StateVector StateVector::haar_random(int num_qubits, Rng& rng) {
  CVector v(Eigen::Index{1} << num_qubits);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(rng.normal(), rng.normal());
  return normalized(v);
}

Complex StateVector::inner(const StateVector& other) const {
  require(dim() == other.dim(), ErrorCode::kDimensionMismatch, "state dimensions differ");
  return amps_.dot(other.amps_);
}

double StateVector::fidelity(const StateVector& other) const { return std::norm(inner(other)); }

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(dim());
  for (std::uint64_t i = 0; i < dim(); ++i) p[i] = std::norm(amps_(static_cast<Eigen::Index>(i)));
  return p;
}

DensityMatrix DensityMatrix::from_matrix(const CMatrix& m, double tol) {
  require(m.rows() == m.cols() && m.rows() > 0, ErrorCode::kBadDimension, "density matrix must be square");
  require(is_hermitian(m, tol), ErrorCode::kNotHermitian, "density matrix must be Hermitian");
  require(std::abs(m.trace().real() - 1.0) <= tol, ErrorCode::kNotNormalized, "density matrix trace must be 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -tol, ErrorCode::kInvalidArgument,
          "density matrix must be positive semidefinite");
  return DensityMatrix(CMatrix(0.5 * (m + m.adjoint())));
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) { return from_pure(psi.amplitudes()); }

DensityMatrix DensityMatrix::from_pure(const CVector& psi) {
  const double nrm = psi.norm();
  require(std::abs(nrm - 1.0) <= 1e-10, ErrorCode::kNotNormalized, "pure state must have unit norm");
  return DensityMatrix(CMatrix(psi * psi.adjoint()));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  require(dim > 0, ErrorCode::kBadDimension, "dimension must be positive");
  return DensityMatrix(CMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim)));
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

RVector DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace qmlab
