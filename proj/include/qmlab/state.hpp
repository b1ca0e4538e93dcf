#pragma once

#include <vector>

#include "qmlab/types.hpp"

namespace qmlab {

class Rng;

// Normalized pure state of `n` qubits. Qubit 0 is the most significant bit
// of the basis index.
class StateVector {
 public:
  explicit StateVector(int num_qubits = 1);

  static StateVector from_amplitudes(const CVector& amplitudes, double tol = 1e-10);
  // Normalizes `amplitudes`; throws kZeroVector on a zero vector.
  static StateVector normalized(const CVector& amplitudes);
  static StateVector basis(int num_qubits, std::uint64_t index);
  static StateVector haar_random(int num_qubits, Rng& rng);

  int num_qubits() const { return n_; }
  std::uint64_t dim() const { return static_cast<std::uint64_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  Complex operator[](std::uint64_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  Complex inner(const StateVector& other) const;  // <this|other>
  double fidelity(const StateVector& other) const;
  std::vector<double> probabilities() const;

 private:
  StateVector(int n, CVector amps) : n_(n), amps_(std::move(amps)) {}
  int n_;
  CVector amps_;
};

class DensityMatrix {
 public:
  DensityMatrix() = default;

  // Validates Hermiticity, unit trace and positivity within `tol`.
  static DensityMatrix from_matrix(const CMatrix& m, double tol = 1e-10);
  static DensityMatrix from_pure(const StateVector& psi);
  static DensityMatrix from_pure(const CVector& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const CMatrix& matrix() const { return rho_; }
  double purity() const;
  RVector eigenvalues() const;

 private:
  explicit DensityMatrix(CMatrix m) : rho_(std::move(m)) {}
  CMatrix rho_;
};

}  // namespace qmlab
