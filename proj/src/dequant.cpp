#include "qmlab/dequant.hpp"

#include <algorithm>
#include <cmath>

#include "qmlab/algos.hpp"
#include "qmlab/error.hpp"
#include "qmlab/parallel.hpp"
#include "qmlab/state.hpp"
#include "qmlab/varqml.hpp"

namespace qmlab {

SQVector SQVector::build(const CVector& x) {
  require(x.size() > 0, ErrorCode::kZeroVector, "empty vector");
  SQVector s;
  s.values_ = x;
  s.prefix_.resize(static_cast<std::size_t>(x.size()));
  double acc = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += std::norm(x(i));
    s.prefix_[static_cast<std::size_t>(i)] = acc;
  }
  require(acc > 0, ErrorCode::kZeroVector, "SQ access needs a nonzero vector");
  s.norm_ = std::sqrt(acc);
  return s;
}

double SQVector::probability(Eigen::Index i) const {
  const auto k = static_cast<std::size_t>(i);
  return (prefix_[k] - (k ? prefix_[k - 1] : 0.0)) / prefix_.back();
}

Eigen::Index SQVector::sample(Rng& rng) const {
  const double u = rng.uniform() * prefix_.back();
  // First index whose prefix exceeds u; zero-weight entries are never chosen.
  const auto it = std::upper_bound(prefix_.begin(), prefix_.end(), u);
  return static_cast<Eigen::Index>(std::min<std::ptrdiff_t>(it - prefix_.begin(), static_cast<std::ptrdiff_t>(prefix_.size()) - 1));
}

EstimatorConfig EstimatorConfig::from_accuracy(double epsilon, double delta, double c_buckets, double c_bucket,
                                               double c_samples) {
  require(epsilon > 0 && delta > 0 && delta < 1, ErrorCode::kInvalidArgument, "need epsilon > 0 and delta in (0, 1)");
  EstimatorConfig c;
  c.epsilon = epsilon;
  c.delta = delta;
  const double log_term = std::log(2 / delta);
  c.buckets = std::max(1, static_cast<int>(std::ceil(c_buckets * log_term)));
  c.bucket_size = std::max(1, static_cast<int>(std::ceil(c_bucket / (epsilon * epsilon))));
  c.samples = static_cast<int>(std::ceil(c_samples / (epsilon * epsilon) * log_term));
  c.validate();
  return c;
}

EstimatorConfig EstimatorConfig::from_budget(int total_samples, int buckets) {
  require(buckets >= 1 && total_samples >= buckets, ErrorCode::kInvalidArgument, "budget smaller than bucket count");
  EstimatorConfig c;
  c.epsilon = 0;
  c.delta = 0;
  c.buckets = buckets;
  c.bucket_size = total_samples / buckets;
  c.samples = c.total();
  return c;
}

void EstimatorConfig::validate() const {
  require(buckets >= 1 && bucket_size >= 1, ErrorCode::kInvalidArgument, "buckets and bucket size must be >= 1");
  require(total() >= samples, ErrorCode::kInvalidArgument, "buckets * bucket_size must cover the sample count");
}

Complex z_value(const SQVector& x, const CVector& y, Eigen::Index i, ZReading reading) {
  const Complex xi = x.entry(i);
  const double n2 = x.norm() * x.norm();
  if (reading == ZReading::kPrinted) return xi * y(i) * n2 / std::abs(xi);
  return y(i) / xi * n2;
}

EstimatorMoments enumerate_estimator_moments(const SQVector& x, const CVector& y, ZReading reading) {
  require(x.size() == y.size(), ErrorCode::kLengthMismatch, "vectors differ in length");
  EstimatorMoments m;
  double second = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double p = x.probability(i);
    if (p == 0) continue;
    const Complex z = z_value(x, y, i, reading);
    m.mean += p * z;
    second += p * std::norm(z);
  }
  m.variance = std::max(0.0, second - std::norm(m.mean));
  return m;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

DequantEstimate dequant_inner(const SQVector& x, const CVector& y, const EstimatorConfig& cfg, const Rng& rng,
                              int threads) {
  cfg.validate();
  require(x.size() == y.size(), ErrorCode::kLengthMismatch, "vectors differ in length");
  DequantEstimate est;
  est.bucket_means.assign(static_cast<std::size_t>(cfg.buckets), Complex(0));
  est.samples = cfg.total();
  parallel_for(static_cast<std::size_t>(cfg.buckets), threads, [&](std::size_t b) {
    Rng r = rng.split(b);
    Complex sum = 0;
    for (int k = 0; k < cfg.bucket_size; ++k) sum += z_value(x, y, x.sample(r));
    est.bucket_means[b] = sum / static_cast<double>(cfg.bucket_size);
  });
  std::vector<double> re, im;
  for (const auto& m : est.bucket_means) {
    re.push_back(m.real());
    im.push_back(m.imag());
  }
  est.value = Complex(median(re), median(im));
  return est;
}

NearestCentroid NearestCentroid::fit(const std::vector<CVector>& train, const std::vector<int>& labels, int classes) {
  require(train.size() == labels.size(), ErrorCode::kLengthMismatch, "one label per training vector");
  require(!train.empty(), ErrorCode::kEmptyClass, "no training vectors");
  int k = classes;
  for (int l : labels) {
    require(l >= 0, ErrorCode::kInvalidArgument, "labels must be non-negative");
    if (classes <= 0) k = std::max(k, l + 1);
    require(l < k || classes <= 0, ErrorCode::kInvalidArgument, "label exceeds the class count");
  }
  NearestCentroid nc;
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  nc.centroids_.assign(static_cast<std::size_t>(k), CVector::Zero(train.front().size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    require(train[i].size() == train.front().size(), ErrorCode::kLengthMismatch, "training vectors differ in length");
    nc.centroids_[static_cast<std::size_t>(labels[i])] += train[i];
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (int c = 0; c < k; ++c) {
    require(counts[static_cast<std::size_t>(c)] > 0, ErrorCode::kEmptyClass,
            "class " + std::to_string(c) + " has no training vectors");
    nc.centroids_[static_cast<std::size_t>(c)] /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  return nc;
}

std::vector<double> NearestCentroid::distances(const CVector& test, const CentroidConfig& cfg, const Rng& rng) const {
  std::vector<double> d;
  const double t2 = test.squaredNorm();
  for (int c = 0; c < classes(); ++c) {
    const CVector& mu = centroids_[static_cast<std::size_t>(c)];
    require(mu.size() == test.size(), ErrorCode::kLengthMismatch, "test vector length mismatch");
    double cross;
    if (cfg.exact || t2 == 0) {
      cross = test.dot(mu).real();
    } else {
      cross = dequant_inner(SQVector::build(test), mu, cfg.estimator, rng.split(static_cast<std::uint64_t>(c)),
                            cfg.threads)
                  .value.real();
    }
    d.push_back(t2 - 2 * cross + mu.squaredNorm());
  }
  return d;
}

int NearestCentroid::predict(const CVector& test, const CentroidConfig& cfg, const Rng& rng) const {
  const auto d = distances(test, cfg, rng);
  return static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
}

int nearest_centroid(const std::vector<CVector>& train, const std::vector<int>& labels, const CVector& test,
                     const CentroidConfig& cfg, const Rng& rng) {
  return NearestCentroid::fit(train, labels).predict(test, cfg, rng);
}

ResultTable HarnessResult::table() const {
  ResultTable t;
  t.columns = {"method", "resource", "mean_abs_error", "mean_estimate", "exact"};
  for (const auto& r : rows)
    t.add_row({r.method, static_cast<std::int64_t>(r.resource), r.mean_abs_error, r.mean_estimate, r.exact});
  t.set_meta("dequant_slope", format_double(dequant_slope));
  t.set_meta("quantum_slope", format_double(quantum_slope));
  return t;
}

HarnessResult quantum_vs_dequant(const CVector& x, const CVector& y, const HarnessConfig& cfg, const Rng& rng) {
  require(x.size() == y.size(), ErrorCode::kLengthMismatch, "vectors differ in length");
  require(!cfg.budgets.empty() && cfg.repeats >= 1, ErrorCode::kInvalidArgument, "empty harness sweep");
  const SQVector sx = SQVector::build(x);
  const Complex exact_inner = x.dot(y);
  const StateVector qx = StateVector::normalized(x);
  const StateVector qy = StateVector::normalized(y);
  const double exact_overlap = std::norm(qx.inner(qy));
  HarnessResult res;
  std::vector<double> lr, le_c, le_q;
  for (std::size_t bi = 0; bi < cfg.budgets.size(); ++bi) {
    const int budget = cfg.budgets[bi];
    const auto est_cfg = EstimatorConfig::from_budget(budget, cfg.buckets);
    std::vector<double> err_c(static_cast<std::size_t>(cfg.repeats)), val_c(err_c.size());
    std::vector<double> err_q(err_c.size()), val_q(err_c.size());
    const Rng cell = rng.split(bi);
    parallel_for(err_c.size(), cfg.threads, [&](std::size_t r) {
      const auto e = dequant_inner(sx, y, est_cfg, cell.split(2 * r));
      err_c[r] = std::abs(e.value - exact_inner);
      val_c[r] = e.value.real();
      Rng qr = cell.split(2 * r + 1);
      const auto o = overlap_test(qx, qy, budget, qr);
      err_q[r] = std::abs(o.estimate - exact_overlap);
      val_q[r] = o.estimate;
    });
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double a : v) s += a;
      return s / static_cast<double>(v.size());
    };
    res.rows.push_back({"dequant", est_cfg.total(), mean(err_c), mean(val_c), exact_inner.real()});
    res.rows.push_back({"swap-test", budget, mean(err_q), mean(val_q), exact_overlap});
    lr.push_back(std::log(static_cast<double>(budget)));
    le_c.push_back(std::log(std::max(mean(err_c), 1e-300)));
    le_q.push_back(std::log(std::max(mean(err_q), 1e-300)));
  }
  if (lr.size() >= 2) {
    res.dequant_slope = fit_line(lr, le_c).slope;
    res.quantum_slope = fit_line(lr, le_q).slope;
  }
  return res;
}

}  // namespace qmlab
