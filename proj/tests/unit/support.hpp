#pragma once

#include <doctest.h>

#include <cmath>
#include <complex>

#include "qmlab/types.hpp"

namespace qmlab::test {

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

// Distance between two vectors after removing a global phase.
inline double phase_distance(const CVector& a, const CVector& b) {
  const Complex ov = a.dot(b);
  const Complex ph = std::abs(ov) > 0 ? ov / std::abs(ov) : Complex(1.0);
  return (a * ph - b).norm();
}

}  // namespace qmlab::test
