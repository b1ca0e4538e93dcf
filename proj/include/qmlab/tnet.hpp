#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmlab/rng.hpp"
#include "qmlab/types.hpp"

namespace qmlab {

// Row-major complex multi-array; the first leg is the most significant.
struct DenseTensor {
  std::vector<int> shape;
  std::vector<Complex> data;

  static DenseTensor zeros(std::vector<int> shape);
  // A 2^n vector viewed as a tensor with n binary legs.
  static DenseTensor from_vector(const CVector& v, int legs, int leg_dim = 2);

  int rank() const { return static_cast<int>(shape.size()); }
  std::size_t size() const { return data.size(); }
  Complex& at(const std::vector<int>& index);
  Complex at(const std::vector<int>& index) const;
  double norm() const;
  CVector flat() const;
  void validate() const;
};

DenseTensor permute(const DenseTensor& t, const std::vector<int>& order);
// Contracts legs axes_a of `a` with axes_b of `b`; free legs of a come first.
DenseTensor tensordot(const DenseTensor& a, const std::vector<int>& axes_a, const DenseTensor& b,
                      const std::vector<int>& axes_b);

// Multiply-add counter for contraction telemetry.
struct ContractionStats {
  std::uint64_t multiply_adds = 0;
};

// sites[j][p] is the D_{j-1} x D_j matrix for physical index p; D_0 = D_N = 1.
struct MPS {
  std::vector<std::vector<CMatrix>> sites;

  int size() const { return static_cast<int>(sites.size()); }
  int phys_dim(int j) const { return static_cast<int>(sites[static_cast<std::size_t>(j)].size()); }
  // Bond dimensions D_0..D_N.
  std::vector<int> bonds() const;
  int max_bond() const;
  void validate() const;  // throws kDimensionMismatch on inconsistent bonds
  void scale(Complex c);

  std::string to_json() const;
  static MPS from_json(const std::string& text);
};

MPS product_mps(const std::vector<CVector>& factors);
// Bond j is min(bond, d^j, d^(n-j)) when `clip`, else `bond` for every inner bond.
MPS random_mps(int sites, int d, int bond, Rng& rng, bool clip = true);

// Successive SVD from the left. dmax <= 0 keeps every singular value above
// rel_cutoff·s_max. Each left singular vector is rotated so its largest
// entry is real positive. discarded[j] is the 2-norm of the singular values
// dropped at bond j+1.
MPS mps_from_tensor(const DenseTensor& t, int dmax = 0, std::vector<double>* discarded = nullptr,
                    double rel_cutoff = 1e-14);
DenseTensor contract(const MPS& mps, ContractionStats* stats = nullptr);

enum class NormScheme { kNaive, kParallel, kSequential };

// Returns ||psi||_2. kParallel builds the D²xD² transfer matrices and reduces
// them pairwise; `threads` only affects kParallel.
double mps_norm(const MPS& mps, NormScheme scheme, ContractionStats* stats = nullptr, int threads = 1);
Complex mps_inner(const MPS& a, const MPS& b, ContractionStats* stats = nullptr);

struct Graph {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;

  void validate() const;
  std::string to_json() const;
  static Graph from_json(const std::string& text);
};

// Contracts the vertex copy-tensor / edge η-tensor network by variable
// elimination (min-scope order).
std::uint64_t count_colorings(const Graph& g, int colors, ContractionStats* stats = nullptr);
std::uint64_t count_colorings_brute_force(const Graph& g, int colors);

// Canonical adjacency code for graphs with at most 11 vertices.
std::uint64_t canonical_code(const Graph& g);
// One representative per isomorphism class on n <= 9 vertices.
std::vector<Graph> nonisomorphic_graphs(int n);

// φ_s(x) = sqrt(C(d-1, s)) cos^{d-1-s}(πx/2) sin^s(πx/2); unit norm.
RVector site_embedding(double x, int d);
MPS embed_mps(const std::vector<double>& x, int d);

// Real projector MPS. Site j has an output leg of dimension d when
// j % stride == stride - 1, otherwise dimension 1. cores[j][o*d + s] is the
// D_{j-1} x D_j matrix for output o and input s.
struct ProjectorMPS {
  int d = 2;
  int stride = 2;
  std::vector<std::vector<RMatrix>> cores;

  int sites() const { return static_cast<int>(cores.size()); }
  int out_dim(int j) const { return j % stride == stride - 1 ? d : 1; }
  std::uint64_t output_dimension() const;
  // d^N - d^floor(N/S) by rank-nullity; at least d^(N - floor(N/S)) for S >= 2.
  std::uint64_t kernel_dimension_bound() const;
  double frobenius_norm() const;
  RMatrix dense() const;  // output x input, rows and columns big-endian
  void validate() const;

  static ProjectorMPS random(int sites, int d, int stride, int bond, Rng& rng);
};

// ||P phi|| by sequential contraction of the projected MPS.
double projected_norm(const ProjectorMPS& p, const MPS& phi, ContractionStats* stats = nullptr);
double anomaly_score(const ProjectorMPS& p, const std::vector<double>& x, ContractionStats* stats = nullptr);
std::vector<double> anomaly_scores(const ProjectorMPS& p, const std::vector<std::vector<double>>& xs,
                                   int threads = 1, ContractionStats* stats = nullptr);

// (1/M) Σ |ln D(x) - 1| + α ln ||P||_F with D(x) = ||P Φ(x)||².
double anomaly_loss(const ProjectorMPS& p, const std::vector<std::vector<double>>& train, double alpha);
// Gradient per core entry, same layout as `cores`.
std::vector<std::vector<RMatrix>> anomaly_loss_gradient(const ProjectorMPS& p,
                                                        const std::vector<std::vector<double>>& train,
                                                        double alpha);

struct AnomalyConfig {
  int d = 2;
  int stride = 2;
  int bond = 4;
  double alpha = 0.1;
  int iterations = 300;
  double step = 0.05;
  std::uint64_t seed = 1;
};

struct AnomalyFit {
  ProjectorMPS model;
  std::vector<double> history;  // loss after each accepted step
  double loss = 0;
  int accepted = 0;
};

AnomalyFit anomaly_fit(const std::vector<std::vector<double>>& train, const AnomalyConfig& cfg);

// Teleportation circuit contracted as a tensor network; one branch per
// measurement outcome (m0, m1) with Bob's corrected state.
struct TeleportBranch {
  int m0 = 0, m1 = 0;
  double probability = 0;
  CVector bob;
};
std::array<TeleportBranch, 4> teleport_network(const CVector& psi);

}  // namespace qmlab
