#pragma once

#include <array>
#include <numbers>
#include <span>
#include <vector>

#include "qmlab/state.hpp"
#include "qmlab/types.hpp"

namespace qmlab {

inline constexpr double kBits = 2.0;
inline constexpr double kNats = std::numbers::e;

// Entries non-negative and summing to one within 1e-12.
class ProbVector {
 public:
  ProbVector() = default;
  static ProbVector from(std::vector<double> p, double tol = 1e-12);
  static ProbVector uniform(std::size_t n);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& values() const { return p_; }

 private:
  explicit ProbVector(std::vector<double> p) : p_(std::move(p)) {}
  std::vector<double> p_;
};

double shannon_entropy(const ProbVector& p, double base = kBits);
// Throws kInfiniteDivergence when q_i = 0 < p_i.
double relative_entropy(const ProbVector& p, const ProbVector& q, double base = kBits);

enum class Majorization { kMajorizes, kMajorizedBy, kEquivalent, kIncomparable };

// x ≻ y: every prefix sum of the descending sort of x dominates that of y.
// Throws kLengthMismatch for vectors of different length.
bool majorizes(std::span<const double> x, std::span<const double> y, double tol = 1e-12);
Majorization compare_majorization(std::span<const double> x, std::span<const double> y,
                                  double tol = 1e-12);

double bhattacharyya_angle(const ProbVector& p, const ProbVector& q);
// Diagonal metric g_ij = δ_ij / (4 p_i); throws kZeroProbabilityComponent.
RMatrix fisher_rao_metric(const ProbVector& p);

inline constexpr double kEigenClip = 1e-14;

double von_neumann_entropy(const DensityMatrix& rho, double base = kBits);
// S(rho || eta); throws kInfiniteDivergence when supp(rho) is not inside supp(eta).
double quantum_relative_entropy(const DensityMatrix& rho, const DensityMatrix& eta,
                                double base = kNats);

struct BlochVector {
  double x = 0, y = 0, z = 0;
  double norm() const;
  static BlochVector from(double x, double y, double z);  // throws kOutsideBlochBall
  static BlochVector from_angles(double theta, double phi, double radius = 1.0);
};

DensityMatrix to_density(const BlochVector& b);
BlochVector bloch_vector(const DensityMatrix& rho);  // 2x2 only

// Closed form of S(rho_a || rho_b) in nats for single-qubit states with
// |b| < 1: ½ln((1-|a|²)/(1-|b|²)) + (|a|/2)ln((1+|a|)/(1-|a|))
//      - (a·b̂/2)ln((1+|b|)/(1-|b|)).
double qubit_relative_entropy_closed_form(const BlochVector& a, const BlochVector& b);

struct SchmidtForm {
  std::vector<double> lambdas;  // descending weights with Σ λ_i = 1
  std::vector<CVector> left;
  std::vector<CVector> right;
  int rank() const { return static_cast<int>(lambdas.size()); }
  CVector reconstruct() const;
};

// psi = Σ √λ_i |left_i>|right_i>, splitting the first `left_qubits` qubits
// from the rest. Weights with √λ below `cutoff` are dropped. Phases are fixed
// so the first component of each left vector above 1e-12 is real positive.
SchmidtForm schmidt_decompose(const StateVector& psi, int left_qubits, double cutoff = 1e-12);
SchmidtForm schmidt_decompose(const CVector& psi, int left_dim, int right_dim,
                              double cutoff = 1e-12);

// Traces out every subsystem not listed in `keep`. Subsystem 0 is the most
// significant factor of the basis index.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims,
                            std::span<const int> keep);
DensityMatrix partial_trace_qubits(const DensityMatrix& rho, std::span<const int> keep);

struct MeasurementOutcome {
  double probability = 0;
  DensityMatrix post_state;
};

// Projective update rho -> P rho P / tr(P rho); throws kInvalidArgument when
// P is not idempotent and kZeroProbabilityBranch below `tol`.
MeasurementOutcome measurement_update(const DensityMatrix& rho, const CMatrix& projector,
                                      double tol = 1e-14);

// Tetrahedral projectors Π_i = |ψ_i><ψ_i|; the POVM elements are Π_i / 2.
std::array<CMatrix, 4> sic_qubit_povm();

// Orthonormal projectors of a random basis (Haar unitary columns).
std::vector<CMatrix> random_projective_measurement(int dim, Rng& rng);
DensityMatrix random_density_matrix(int dim, Rng& rng, int rank = -1);

}  // namespace qmlab
