#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace qmlab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Number of bits needed to index `count` items (0 for count <= 1).
inline int index_bits(std::uint64_t count) {
  int bits = 0;
  while ((std::uint64_t{1} << bits) < count) ++bits;
  return bits;
}

CMatrix kron(const CMatrix& a, const CMatrix& b);

bool is_hermitian(const CMatrix& m, double tol = 1e-10);
bool is_unitary(const CMatrix& m, double tol = 1e-10);

}  // namespace qmlab
