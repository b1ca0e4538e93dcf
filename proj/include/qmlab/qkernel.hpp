#pragma once

#include <span>
#include <string>
#include <vector>

#include "qmlab/encode.hpp"
#include "qmlab/types.hpp"

namespace qmlab {

using Points = std::vector<std::vector<double>>;

// tr(ρ(x) ρ(y)) for the pure-state embedding of `encoding`.
double quantum_kernel(std::span<const double> x, std::span<const double> y, const EncodingSpec& encoding);

struct GramMatrix {
  RMatrix k;
  EncodingSpec encoding;

  Eigen::Index size() const { return k.rows(); }
  double min_eigenvalue() const;
  bool is_symmetric(double tol = 1e-10) const;
  bool is_psd(double tol = -1e-8) const { return min_eigenvalue() >= tol; }
};

GramMatrix gram(const Points& data, const EncodingSpec& encoding, int threads = 1);
// Cross kernel K_ij = κ(a_i, b_j).
RMatrix cross_kernel(const Points& a, const Points& b, const EncodingSpec& encoding, int threads = 1);

// Moore-Penrose inverse with eigenvalue cutoff `rel_cutoff`·max eigenvalue.
RMatrix kernel_pinv(const RMatrix& k, double rel_cutoff = 1e-10);

enum class FitMode {
  kPseudoinverse,  // K⁻¹ read as the pseudoinverse when λ = 0
  kStrict,         // throw kSingularSystem for rank-deficient K at λ = 0
};

struct KernelModel {
  RVector alphas;
  Points train_x;
  EncodingSpec encoding;
  double lambda = 0;

  std::string to_json() const;
  static KernelModel from_json(const std::string& text);
};

// (1/M) ||Kα - y||² + λ αᵀKα.
double kernel_objective(const RMatrix& k, std::span<const double> y, const RVector& alpha, double lambda);

// α = (K + λ M I)⁻¹ y.
KernelModel kernel_fit(const GramMatrix& k, std::span<const double> y, double lambda,
                       FitMode mode = FitMode::kPseudoinverse, const Points& train_x = {});

enum class KernelLoss { kSquared, kHinge, kLogistic };

struct GradientFitConfig {
  int iterations = 2000;
  double step = 0.0;  // 0 picks 1 / (Lipschitz bound)
};

// Gradient descent on (1/M) Σ loss((Kα)_i, y_i) + λ αᵀKα; hinge uses a subgradient.
KernelModel kernel_fit_gradient(const GramMatrix& k, std::span<const double> y, double lambda, KernelLoss loss,
                                const GradientFitConfig& cfg = {}, const Points& train_x = {});
double kernel_loss_objective(const RMatrix& k, std::span<const double> y, const RVector& alpha, double lambda,
                             KernelLoss loss);

double predict(const KernelModel& model, std::span<const double> x);

// s_K = yᵀ K⁻¹ y (pseudoinverse).
double model_complexity(const RMatrix& k, std::span<const double> y, double rel_cutoff = 1e-10);
// g12 = sqrt(||√K2 K1⁻¹ √K2||_∞); throws kSingularK1.
double geometric_difference(const RMatrix& k1, const RMatrix& k2, double rel_cutoff = 1e-10);
// Number of eigenvalues above `tolerance`.
int effective_dimension(const RMatrix& k, double tolerance = 1e-10);

// Classical least squares on the features {x_i x_j : i ≤ j} ∪ {x_i} ∪ {1}.
struct QuadraticRegression {
  RVector weights;
  int dim = 0;
  double predict(std::span<const double> x) const;
};
QuadraticRegression fit_quadratic_features(const Points& x, std::span<const double> y);

}  // namespace qmlab
