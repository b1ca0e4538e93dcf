#include <cmath>
#include <numbers>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/types.hpp"

namespace qmlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInfiniteDivergence: return "InfiniteDivergence";
    case ErrorCode::kZeroProbabilityComponent: return "ZeroProbabilityComponent";
    case ErrorCode::kZeroProbabilityBranch: return "ZeroProbabilityBranch";
    case ErrorCode::kOutsideBlochBall: return "OutsideBlochBall";
    case ErrorCode::kNotTracePreserving: return "NotTracePreserving";
    case ErrorCode::kNotHermitian: return "NotHermitian";
    case ErrorCode::kNotUnitary: return "NotUnitary";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kBadDimension: return "BadDimension";
    case ErrorCode::kTargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::kNotAnEigenvector: return "NotAnEigenvector";
    case ErrorCode::kNoSolutions: return "NoSolutions";
    case ErrorCode::kAllSolutions: return "AllSolutions";
    case ErrorCode::kPostselectionImpossible: return "PostselectionImpossible";
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kDuplicateSample: return "DuplicateSample";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kBadLength: return "BadLength";
    case ErrorCode::kUnsupportedKind: return "UnsupportedKind";
    case ErrorCode::kAliasedSpectrum: return "AliasedSpectrum";
    case ErrorCode::kUnsupportedGenerator: return "UnsupportedGenerator";
    case ErrorCode::kIncompleteProjectors: return "IncompleteProjectors";
    case ErrorCode::kIntegratorDiverged: return "IntegratorDiverged";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kSingularK1: return "SingularK1";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kUnknownExperiment: return "UnknownExperiment";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kIoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_hermitian(const CMatrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  CMatrix d = m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632BE59BD9B4E019ull)));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0;
  do u1 = uniform(); while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v = 0;
  do v = engine_(); while (v >= limit);
  return v % n;
}

}  // namespace qmlab
