#pragma once

#include <cstdint>
#include <vector>

#include "qmlab/rng.hpp"
#include "qmlab/table.hpp"
#include "qmlab/types.hpp"

namespace qmlab {

// Sample-and-query access: entry and norm queries in O(1), index draws with
// probability |x_i|²/||x||² by binary search over prefix sums.
class SQVector {
 public:
  static SQVector build(const CVector& x);  // throws kZeroVector

  Eigen::Index size() const { return values_.size(); }
  Complex entry(Eigen::Index i) const { return values_(i); }
  double norm() const { return norm_; }
  const CVector& values() const { return values_; }
  // Sampling law as stored by the prefix sums.
  double probability(Eigen::Index i) const;
  Eigen::Index sample(Rng& rng) const;

 private:
  CVector values_;
  double norm_ = 0;
  std::vector<double> prefix_;  // prefix_[i] = Σ_{k<=i} |x_k|²
};

inline SQVector sq_build(const CVector& x) { return SQVector::build(x); }

struct EstimatorConfig {
  double epsilon = 0.1;
  double delta = 0.05;
  int buckets = 1;
  int bucket_size = 1;
  int samples = 1;  // s from the sample-count rule; buckets·bucket_size >= s

  // buckets = ceil(c_b ln(2/δ)), bucket_size = ceil(c_m/ε²), s = ceil(c_s/ε² ln(2/δ)).
  static EstimatorConfig from_accuracy(double epsilon, double delta, double c_buckets = 6, double c_bucket = 9,
                                       double c_samples = 54);
  // A fixed sample budget split into `buckets` equal buckets.
  static EstimatorConfig from_budget(int total_samples, int buckets = 1);
  int total() const { return buckets * bucket_size; }
  void validate() const;
};

// Per-sample estimator of x·y = Σ conj(x_i) y_i.
enum class ZReading {
  kCorrected,  // z = (y_i / x_i) ||x||²
  kPrinted,    // z = x_i y_i ||x||² / |x_i|
};
Complex z_value(const SQVector& x, const CVector& y, Eigen::Index i, ZReading reading = ZReading::kCorrected);

struct EstimatorMoments {
  Complex mean;
  double variance = 0;  // E|z - E z|²
};
// Exact moments of z under the sampling law, by enumeration of all indices.
EstimatorMoments enumerate_estimator_moments(const SQVector& x, const CVector& y,
                                             ZReading reading = ZReading::kCorrected);

struct DequantEstimate {
  Complex value;  // component-wise median of the bucket means
  std::vector<Complex> bucket_means;
  int samples = 0;
};

// Bucket b draws from rng.split(b), so results do not depend on `threads`.
DequantEstimate dequant_inner(const SQVector& x, const CVector& y, const EstimatorConfig& cfg, const Rng& rng,
                              int threads = 1);

struct CentroidConfig {
  bool exact = false;
  EstimatorConfig estimator = EstimatorConfig::from_accuracy(0.1, 0.05);
  int threads = 1;
};

// Classes are 0..K-1 with K = max label + 1 (or `classes` when > 0); any class
// without training vectors raises kEmptyClass.
class NearestCentroid {
 public:
  static NearestCentroid fit(const std::vector<CVector>& train, const std::vector<int>& labels, int classes = 0);

  int classes() const { return static_cast<int>(centroids_.size()); }
  const CVector& centroid(int c) const { return centroids_[static_cast<std::size_t>(c)]; }
  // Squared distances ||t - c||² = ||t||² - 2 Re(t·c) + ||c||², with t·c
  // estimated from SQ(t) and queries to c unless cfg.exact.
  std::vector<double> distances(const CVector& test, const CentroidConfig& cfg, const Rng& rng) const;
  int predict(const CVector& test, const CentroidConfig& cfg, const Rng& rng) const;

 private:
  std::vector<CVector> centroids_;
};

int nearest_centroid(const std::vector<CVector>& train, const std::vector<int>& labels, const CVector& test,
                     const CentroidConfig& cfg, const Rng& rng);

struct HarnessConfig {
  std::vector<int> budgets{100, 400, 1600, 6400, 25600};
  int repeats = 200;
  int buckets = 1;  // median-of-means buckets for the classical side
  int threads = 1;
};

struct HarnessRow {
  std::string method;  // "dequant" or "swap-test"
  int resource = 0;    // samples or shots per estimate
  double mean_abs_error = 0;
  double mean_estimate = 0;
  double exact = 0;
};

struct HarnessResult {
  std::vector<HarnessRow> rows;
  double dequant_slope = 0;  // log mean error vs log resource
  double quantum_slope = 0;
  ResultTable table() const;
};

// Classical side estimates Re(x·y) by dequant_inner; quantum side estimates
// |<x|y>|² with the swap test on the normalized vectors.
HarnessResult quantum_vs_dequant(const CVector& x, const CVector& y, const HarnessConfig& cfg, const Rng& rng);

}  // namespace qmlab
