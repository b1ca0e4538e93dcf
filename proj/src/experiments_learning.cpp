#include <algorithm>
#include <cmath>
#include <numbers>

#include "experiments_internal.hpp"
#include "qmlab/dequant.hpp"
#include "qmlab/encode.hpp"
#include "qmlab/error.hpp"
#include "qmlab/parallel.hpp"
#include "qmlab/qkernel.hpp"
#include "qmlab/tnet.hpp"

namespace qmlab::detail {

namespace {

const double kSqrtE = std::sqrt(std::numbers::e);

std::vector<double> uniform_point(int d, Rng& rng, double lo, double hi) {
  std::vector<double> x(static_cast<std::size_t>(d));
  for (auto& v : x) v = rng.uniform(lo, hi);
  return x;
}

CVector random_complex(int n, Rng& rng) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
  return v;
}

// ---------------------------------------------------------------------------

Points sphere_points(int m, int d, Rng& rng) {
  Points p;
  for (int i = 0; i < m; ++i) {
    auto x = uniform_point(d, rng, -1, 1);
    double n = 0;
    for (double v : x) n += v * v;
    for (double& v : x) v /= std::sqrt(n);
    p.push_back(x);
  }
  return p;
}

RMatrix unit_observable(int d, Rng& rng) {
  RMatrix b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = rng.normal();
  const RMatrix o = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(o);
  return o / es.eigenvalues().cwiseAbs().maxCoeff();
}

double quadratic_label(const RMatrix& o, const std::vector<double>& x) {
  const RVector v = Eigen::Map<const RVector>(x.data(), static_cast<Eigen::Index>(x.size())).normalized();
  return v.dot(o * v);
}

ResultTable kernel_bounds(RunContext& ctx) {
  const int instances = ctx.params.positive("instances");
  const int points = ctx.params.positive("points");
  const int features = ctx.params.positive("features");
  const int repeats = ctx.params.positive("repeats");
  const int test_points = ctx.params.positive("test_points");
  require(features <= 6 && points <= 64, ErrorCode::kBadConfig, "features <= 6 and points <= 64");
  ResultTable t;
  t.columns = {"check", "instance", "value", "reference", "gap"};
  auto add = [&](const char* check, int i, double v, double ref) { t.add_row(row(check, i, v, ref, v - ref)); };

  for (int i = 0; i < instances; ++i) {
    std::vector<double> bx(4), by(4);
    for (auto& b : bx) b = static_cast<double>(ctx.rng.below(2));
    by = ctx.rng.bernoulli(0.5) ? bx : std::vector<double>{};
    if (by.empty())
      for (int k = 0; k < 4; ++k) by.push_back(static_cast<double>(ctx.rng.below(2)));
    add("delta", i, quantum_kernel(bx, by, EncodingSpec::basis(0)), bx == by ? 1.0 : 0.0);

    const auto x = uniform_point(features, ctx.rng, -1, 1), y = uniform_point(features, ctx.rng, -1, 1);
    const Eigen::Map<const RVector> xv(x.data(), features), yv(y.data(), features);
    const double ov = xv.normalized().dot(yv.normalized());
    add("amplitude", i, quantum_kernel(x, y, EncodingSpec::amplitude()), ov * ov);
    add("amplitude-power", i, quantum_kernel(x, y, EncodingSpec::amplitude(repeats)), std::pow(ov * ov, repeats));
    double cos2 = 1;
    for (int k = 0; k < features; ++k) cos2 *= std::pow(std::cos(x[k] - y[k]), 2);
    add("phase", i, quantum_kernel(x, y, EncodingSpec::phase()), cos2);
  }

  for (int i = 0; i < instances; ++i) {
    // K1 from the phase encoding, K2 from the squared amplitude encoding;
    // labels in the range of K2 keep s2 finite.
    for (int attempt = 0;; ++attempt) {
      Points pts;
      for (int m = 0; m < points; ++m) pts.push_back(uniform_point(features, ctx.rng, -1, 1));
      const RMatrix k1 = gram(pts, EncodingSpec::phase(), ctx.threads).k;
      const RMatrix k2 = gram(pts, EncodingSpec::amplitude(2), ctx.threads).k;
      double g = 0;
      try {
        g = geometric_difference(k1, k2);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSingularK1 || attempt >= 20) throw;
        continue;
      }
      RVector z(points);
      for (int m = 0; m < points; ++m) z(m) = ctx.rng.normal();
      const RVector yv = k2 * z;
      const std::vector<double> labels(yv.data(), yv.data() + points);
      add("geometric", i, model_complexity(k1, labels), g * g * model_complexity(k2, labels));
      break;
    }
  }

  for (int d : ctx.params.integers("power_dims")) {
    require(d >= 1 && d <= 8, ErrorCode::kBadConfig, "power_dims must lie in [1, 8]");
    const RMatrix o = unit_observable(d, ctx.rng);
    const Points train = sphere_points(2 * d * d, d, ctx.rng);
    const Points test = sphere_points(test_points, d, ctx.rng);
    std::vector<double> labels;
    for (const auto& x : train) labels.push_back(quadratic_label(o, x));
    const auto reg = fit_quadratic_features(train, labels);
    double mse = 0;
    for (const auto& x : test) mse += std::pow(reg.predict(x) - quadratic_label(o, x), 2);
    add("quadratic-mse", d, mse / test_points, 0.0);
  }
  return t;
}

// ---------------------------------------------------------------------------

ResultTable mps_roundtrip(RunContext& ctx) {
  const int d = ctx.params.positive("d");
  const int instances = ctx.params.positive("instances");
  ResultTable t;
  t.columns = {"sites", "d", "instance", "max_bond", "error"};
  for (int n : ctx.params.integers("sites")) {
    require(n >= 1 && std::pow(d, n) <= 1 << 20, ErrorCode::kBadConfig, "d^sites must be <= 2^20");
    const int size = static_cast<int>(std::lround(std::pow(d, n)));
    for (int i = 0; i < instances; ++i) {
      const CVector v = random_complex(size, ctx.rng).normalized();
      const MPS m = mps_from_tensor(DenseTensor::from_vector(v, n, d));
      t.add_row(row(n, d, i, m.max_bond(), (contract(m).flat() - v).norm()));
    }
  }
  return t;
}

ResultTable mps_norm_bench(RunContext& ctx) {
  const double naive_max = ctx.params.real("naive_max_dim");
  ResultTable t;
  t.columns = {"sites",       "d",           "bond",           "norm_naive",    "norm_parallel",
               "norm_sequential", "max_rel_diff", "ops_naive",   "ops_parallel",  "ops_sequential",
               "model_ops",   "sequential_ratio"};
  for (int n : ctx.params.integers("sites"))
    for (int bond : ctx.params.integers("bonds"))
      for (int d : ctx.params.integers("d")) {
        require(n >= 1 && bond >= 1 && d >= 1 && bond <= 64, ErrorCode::kBadConfig, "bad sweep values");
        const MPS m = random_mps(n, d, bond, ctx.rng, false);
        ContractionStats sn, sp, ss;
        const bool naive = std::pow(d, n) <= naive_max;
        const double vn = naive ? mps_norm(m, NormScheme::kNaive, &sn) : std::nan("");
        const double vp = mps_norm(m, NormScheme::kParallel, &sp, ctx.threads);
        const double vs = mps_norm(m, NormScheme::kSequential, &ss);
        double rel = std::abs(vp - vs) / vs;
        if (naive) rel = std::max({rel, std::abs(vn - vs) / vs, std::abs(vn - vp) / vs});
        const double model = n * d * std::pow(bond, 3);
        t.add_row(row(n, d, bond, vn, vp, vs, rel, naive ? static_cast<std::int64_t>(sn.multiply_adds) : -1,
                      static_cast<std::int64_t>(sp.multiply_adds), static_cast<std::int64_t>(ss.multiply_adds),
                      model, static_cast<double>(ss.multiply_adds) / model));
      }
  return t;
}

ResultTable coloring(RunContext& ctx) {
  const int max_v = ctx.params.positive("max_vertices");
  const int max_c = ctx.params.positive("max_colors");
  require(max_v <= 9 && max_c <= 6, ErrorCode::kBadConfig, "max_vertices <= 9 and max_colors <= 6");
  ResultTable t;
  t.columns = {"vertices", "colors", "graphs", "mismatches", "total_colorings", "multiply_adds"};
  for (int n = 1; n <= max_v; ++n) {
    const auto graphs = nonisomorphic_graphs(n);
    for (int c = 1; c <= max_c; ++c) {
      std::vector<std::uint64_t> tn(graphs.size()), bf(graphs.size()), ops(graphs.size());
      parallel_for(graphs.size(), ctx.threads, [&](std::size_t i) {
        ContractionStats st;
        tn[i] = count_colorings(graphs[i], c, &st);
        ops[i] = st.multiply_adds;
        bf[i] = count_colorings_brute_force(graphs[i], c);
      });
      std::int64_t bad = 0;
      std::uint64_t total = 0, work = 0;
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        bad += tn[i] != bf[i];
        total += tn[i];
        work += ops[i];
      }
      t.add_row(row(n, c, graphs.size(), bad, total, work));
    }
  }
  return t;
}

std::vector<std::vector<double>> cluster(int m, int n, double center, double spread, Rng& rng) {
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < m; ++i) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = center + spread * rng.normal();
    xs.push_back(x);
  }
  return xs;
}

ResultTable anomaly(RunContext& ctx) {
  const int sites = ctx.params.positive("sites");
  const double center = ctx.params.real("center"), spread = ctx.params.real("spread");
  AnomalyConfig cfg;
  cfg.alpha = ctx.params.real("alpha");
  cfg.bond = ctx.params.positive("bond");
  cfg.iterations = ctx.params.positive("iterations");
  cfg.seed = ctx.rng.next_u64();
  require(sites >= 2 && sites <= 12, ErrorCode::kBadConfig, "sites must lie in [2, 12]");

  ResultTable t;
  t.columns = {"kind", "index", "value", "reference"};
  const auto train = cluster(ctx.params.positive("train"), sites, center, spread, ctx.rng);
  const auto fit = anomaly_fit(train, cfg);
  t.add_row(row("train-loss", 0, fit.loss, 0.0));
  const auto test = cluster(ctx.params.positive("test"), sites, center, spread, ctx.rng);
  const auto scores = anomaly_scores(fit.model, test, ctx.threads);
  for (std::size_t i = 0; i < scores.size(); ++i) t.add_row(row("in-distribution", i, scores[i], kSqrtE));
  const double far = ctx.params.real("far");
  t.add_row(row("far", 0, anomaly_score(fit.model, std::vector<double>(sites, far)), 0.25 * kSqrtE));

  // Kernel vectors of a random projector, taken from its dense SVD.
  const auto p = ProjectorMPS::random(sites, 2, 2, 3, ctx.rng);
  const RMatrix dense = p.dense();
  Eigen::JacobiSVD<RMatrix> svd(dense, Eigen::ComputeFullV);
  const Eigen::Index rank = svd.rank();
  const double smax2 = std::pow(svd.singularValues()(0), 2);
  t.add_row(row("kernel-dimension", 0, static_cast<double>(dense.cols() - rank),
                static_cast<double>(p.kernel_dimension_bound())));
  const int kv = ctx.params.integer("kernel_vectors");
  for (Eigen::Index k = rank; k < std::min<Eigen::Index>(rank + kv, dense.cols()); ++k) {
    const CVector v = svd.matrixV().col(k).cast<Complex>();
    const double pn = projected_norm(p, mps_from_tensor(DenseTensor::from_vector(v, sites)));
    t.add_row(row("kernel-vector", k - rank, pn * pn / smax2, 1e-15));
  }

  // The loss for one sample is minimized where the projected norm is √e:
  // once by a scale scan, once by training.
  const auto q = ProjectorMPS::random(sites, 2, 2, 2, ctx.rng);
  const std::vector<std::vector<double>> one{uniform_point(sites, ctx.rng, 0, 0.5)};
  const double s0 = anomaly_score(q, one[0]);
  const int scan = ctx.params.positive("scan_points");
  double best_c = 0, best = 1e300;
  for (int i = 1; i <= scan; ++i) {
    const double c = 4.0 * i / scan * kSqrtE / s0;
    ProjectorMPS r = q;
    for (auto& m : r.cores.front()) m *= c;
    const double l = anomaly_loss(r, one, 0.0);
    if (l < best) {
      best = l;
      best_c = c;
    }
  }
  t.add_row(row("fixed-point-scan", 0, best_c * s0, kSqrtE));
  AnomalyConfig single = cfg;
  single.alpha = 0;
  single.iterations = 500;
  t.add_row(row("fixed-point-fit", 0, anomaly_score(anomaly_fit(one, single).model, one[0]), kSqrtE));
  return t;
}

// ---------------------------------------------------------------------------

ResultTable dequant_inner_trials(RunContext& ctx) {
  const int n = ctx.params.positive("n");
  const int trials = ctx.params.positive("trials");
  const double eps = ctx.params.real("epsilon"), delta = ctx.params.real("delta");
  const auto cfg = EstimatorConfig::from_accuracy(eps, delta);
  cfg.validate();
  const CVector x = random_complex(n, ctx.rng), y = random_complex(n, ctx.rng);
  const SQVector sx = sq_build(x);
  const Complex exact = x.dot(y);
  const double tol = eps * x.norm() * y.norm();
  std::vector<Complex> est(static_cast<std::size_t>(trials));
  const Rng base = ctx.rng.split(0x5eed);
  parallel_for(est.size(), ctx.threads,
               [&](std::size_t i) { est[i] = dequant_inner(sx, y, cfg, base.split(i)).value; });
  ResultTable t;
  t.columns = {"trial", "estimate_re", "estimate_im", "abs_error", "tolerance", "failed"};
  int failures = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double err = std::abs(est[i] - exact);
    failures += err > tol;
    t.add_row(row(i, est[i].real(), est[i].imag(), err, tol, err > tol ? 1 : 0));
  }
  t.set_meta("exact", format_double(exact.real()) + (exact.imag() < 0 ? "" : "+") + format_double(exact.imag()) + "i");
  t.set_meta("samples_per_estimate", std::to_string(cfg.total()));
  t.set_meta("failure_rate", format_double(static_cast<double>(failures) / trials));
  return t;
}

ResultTable dequant_unbiased(RunContext& ctx) {
  const int max_n = ctx.params.positive("max_n");
  const int instances = ctx.params.positive("instances");
  require(max_n <= 4096, ErrorCode::kBadConfig, "max_n must be <= 4096");
  ResultTable t;
  t.columns = {"n", "instance", "reading", "abs_bias", "variance", "variance_bound"};
  for (int n = 1; n <= max_n; ++n)
    for (int i = 0; i < instances; ++i) {
      const CVector x = random_complex(n, ctx.rng), y = random_complex(n, ctx.rng);
      const SQVector sx = sq_build(x);
      const double bound = x.squaredNorm() * y.squaredNorm();
      for (auto reading : {ZReading::kCorrected, ZReading::kPrinted}) {
        const auto m = enumerate_estimator_moments(sx, y, reading);
        t.add_row(row(n, i, reading == ZReading::kCorrected ? "corrected" : "printed", std::abs(m.mean - x.dot(y)),
                      m.variance, bound));
      }
    }
  return t;
}

ResultTable dequant_slope(RunContext& ctx) {
  const int n = ctx.params.positive("n");
  HarnessConfig cfg;
  cfg.budgets = ctx.params.integers("budgets");
  cfg.repeats = ctx.params.positive("repeats");
  cfg.buckets = ctx.params.positive("buckets");
  cfg.threads = ctx.threads;
  for (int b : cfg.budgets) require(b >= cfg.buckets, ErrorCode::kBadConfig, "budgets must be >= buckets");
  const CVector x = random_complex(n, ctx.rng), y = random_complex(n, ctx.rng);
  ResultTable t = quantum_vs_dequant(x, y, cfg, ctx.rng).table();
  t.set_meta("reference_slope", "-0.5");
  return t;
}

ResultTable nearest_centroid_run(RunContext& ctx) {
  const int classes = ctx.params.positive("classes");
  const int dim = ctx.params.positive("dim");
  const int per_class = ctx.params.positive("train_per_class");
  const int tests = ctx.params.positive("test");
  const double spread = ctx.params.real("spread");
  CentroidConfig exact{true, EstimatorConfig::from_accuracy(0.1, 0.05), 1};
  CentroidConfig sampled{false, EstimatorConfig::from_accuracy(ctx.params.real("epsilon"), ctx.params.real("delta")),
                         ctx.threads};
  std::vector<CVector> means;
  for (int c = 0; c < classes; ++c) means.push_back(random_complex(dim, ctx.rng).normalized());
  auto draw = [&](int c) { return CVector(means[static_cast<std::size_t>(c)] + spread / std::sqrt(dim) * random_complex(dim, ctx.rng)); };
  std::vector<CVector> train;
  std::vector<int> labels;
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      train.push_back(draw(c));
      labels.push_back(c);
    }
  const auto model = NearestCentroid::fit(train, labels, classes);
  ResultTable t;
  t.columns = {"test", "label", "exact_prediction", "sampled_prediction"};
  int ok_exact = 0, ok_sampled = 0;
  for (int i = 0; i < tests; ++i) {
    const int c = static_cast<int>(ctx.rng.below(static_cast<std::uint64_t>(classes)));
    const CVector v = draw(c);
    const int pe = model.predict(v, exact, ctx.rng);
    const int ps = model.predict(v, sampled, ctx.rng.split(static_cast<std::uint64_t>(i)));
    ok_exact += pe == c;
    ok_sampled += ps == c;
    t.add_row(row(i, c, pe, ps));
  }
  t.set_meta("accuracy_exact", format_double(static_cast<double>(ok_exact) / tests));
  t.set_meta("accuracy_sampled", format_double(static_cast<double>(ok_sampled) / tests));
  return t;
}

}  // namespace

void add_learning_experiments(std::vector<ExperimentDef>& out) {
  out.push_back({"kernel-bounds", "kernel closed forms, geometric-difference bound and quadratic-feature regression",
                 {{"instances", 100},
                  {"points", 6},
                  {"features", 3},
                  {"repeats", 3},
                  {"power_dims", {2, 3, 4}},
                  {"test_points", 50}},
                 kernel_bounds});
  out.push_back({"mps-roundtrip", "dense tensor to MPS and back",
                 {{"sites", {4, 6, 8, 10}}, {"d", 2}, {"instances", 3}}, mps_roundtrip});
  out.push_back({"mps-norm-bench", "naive, parallel and sequential MPS norms with multiply-add counts",
                 {{"sites", {4, 8, 16, 32}}, {"bonds", {2, 4, 8, 16}}, {"d", {2, 3}}, {"naive_max_dim", 65536.0}},
                 mps_norm_bench});
  out.push_back({"coloring", "tensor-network coloring counts against brute force on all small graphs",
                 {{"max_vertices", 8}, {"max_colors", 4}}, coloring});
  out.push_back({"anomaly", "MPS projector anomaly detection, kernel vectors and the sqrt(e) fixed point",
                 {{"sites", 6},
                  {"train", 20},
                  {"test", 20},
                  {"center", 0.15},
                  {"spread", 0.05},
                  {"far", 0.85},
                  {"alpha", 0.5},
                  {"bond", 2},
                  {"iterations", 1000},
                  {"kernel_vectors", 10},
                  {"scan_points", 4000}},
                 anomaly});
  out.push_back({"dequant-inner", "sampled inner-product estimator failure rate against a dense oracle",
                 {{"n", 256}, {"epsilon", 0.1}, {"delta", 0.05}, {"trials", 2000}}, dequant_inner_trials});
  out.push_back({"dequant-unbiased", "exact estimator bias and variance by enumeration of the sampling law",
                 {{"max_n", 16}, {"instances", 3}}, dequant_unbiased});
  out.push_back({"dequant-slope", "error against resource for the sampled estimator and the swap test",
                 {{"n", 16}, {"budgets", {100, 400, 1600, 6400, 25600}}, {"repeats", 200}, {"buckets", 1}},
                 dequant_slope});
  out.push_back({"nearest-centroid", "nearest-centroid classification with sampled distances",
                 {{"classes", 3},
                  {"dim", 32},
                  {"train_per_class", 20},
                  {"test", 30},
                  {"spread", 0.3},
                  {"epsilon", 0.1},
                  {"delta", 0.05}},
                 nearest_centroid_run});
}

}  // namespace qmlab::detail
