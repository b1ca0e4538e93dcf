#include "qmlab/qkernel.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "qmlab/error.hpp"
#include "qmlab/parallel.hpp"

namespace qmlab {

namespace {

std::vector<StateVector> embed_all(const Points& data, const EncodingSpec& encoding, int threads) {
  std::vector<StateVector> states(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) { states[i] = encode_state(encoding, data[i]); });
  return states;
}

double overlap2(const StateVector& a, const StateVector& b) {
  require(a.dim() == b.dim(), ErrorCode::kDimensionMismatch, "embedded states differ in dimension");
  return std::norm(a.inner(b));
}

RVector to_rvector(std::span<const double> y) {
  RVector v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
  return v;
}

Eigen::SelfAdjointEigenSolver<RMatrix> sym_eig(const RMatrix& k) {
  require(k.rows() == k.cols(), ErrorCode::kDimensionMismatch, "kernel matrix must be square");
  return Eigen::SelfAdjointEigenSolver<RMatrix>(0.5 * (k + k.transpose()));
}

}  // namespace

double quantum_kernel(std::span<const double> x, std::span<const double> y, const EncodingSpec& encoding) {
  return overlap2(encode_state(encoding, x), encode_state(encoding, y));
}

double GramMatrix::min_eigenvalue() const {
  if (k.size() == 0) return 0.0;
  return sym_eig(k).eigenvalues()(0);
}

bool GramMatrix::is_symmetric(double tol) const { return (k - k.transpose()).cwiseAbs().maxCoeff() <= tol; }

GramMatrix gram(const Points& data, const EncodingSpec& encoding, int threads) {
  const auto states = embed_all(data, encoding, threads);
  const auto m = static_cast<Eigen::Index>(data.size());
  GramMatrix g;
  g.encoding = encoding;
  g.k = RMatrix::Zero(m, m);
  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index c = r; c < m; ++c) g.k(r, c) = overlap2(states[i], states[static_cast<std::size_t>(c)]);
  });
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < r; ++c) g.k(r, c) = g.k(c, r);
  return g;
}

RMatrix cross_kernel(const Points& a, const Points& b, const EncodingSpec& encoding, int threads) {
  const auto sa = embed_all(a, encoding, threads);
  const auto sb = embed_all(b, encoding, threads);
  RMatrix k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  parallel_for(a.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < b.size(); ++j)
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = overlap2(sa[i], sb[j]);
  });
  return k;
}

RMatrix kernel_pinv(const RMatrix& k, double rel_cutoff) {
  const auto es = sym_eig(k);
  const RVector& e = es.eigenvalues();
  const double cut = rel_cutoff * std::max(0.0, e.maxCoeff());
  RVector inv(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) inv(i) = e(i) > cut ? 1.0 / e(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double kernel_objective(const RMatrix& k, std::span<const double> y, const RVector& alpha, double lambda) {
  const RVector r = k * alpha - to_rvector(y);
  return r.squaredNorm() / static_cast<double>(k.rows()) + lambda * alpha.dot(k * alpha);
}

KernelModel kernel_fit(const GramMatrix& k, std::span<const double> y, double lambda, FitMode mode,
                       const Points& train_x) {
  require(lambda >= 0, ErrorCode::kInvalidArgument, "lambda must be >= 0");
  const Eigen::Index m = k.size();
  require(static_cast<Eigen::Index>(y.size()) == m, ErrorCode::kLengthMismatch, "label count differs from Gram size");
  require(train_x.empty() || static_cast<Eigen::Index>(train_x.size()) == m, ErrorCode::kLengthMismatch,
          "training input count differs from Gram size");
  const RVector yv = to_rvector(y);
  KernelModel model;
  model.train_x = train_x;
  model.encoding = k.encoding;
  model.lambda = lambda;
  const RMatrix a = k.k + lambda * static_cast<double>(m) * RMatrix::Identity(m, m);
  const auto es = sym_eig(a);
  const RVector& e = es.eigenvalues();
  const double cut = 1e-10 * std::max(0.0, e.maxCoeff());
  const bool singular = e.size() > 0 && e(0) <= cut;
  if (singular && mode == FitMode::kStrict)
    fail(ErrorCode::kSingularSystem, "kernel system is singular; use the pseudoinverse mode or lambda > 0");
  RVector inv(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) inv(i) = e(i) > cut ? 1.0 / e(i) : 0.0;
  model.alphas = es.eigenvectors() * inv.asDiagonal() * (es.eigenvectors().transpose() * yv);
  return model;
}

double kernel_loss_objective(const RMatrix& k, std::span<const double> y, const RVector& alpha, double lambda,
                             KernelLoss loss) {
  const RVector f = k * alpha;
  double total = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    switch (loss) {
      case KernelLoss::kSquared:
        total += (f(i) - yi) * (f(i) - yi);
        break;
      case KernelLoss::kHinge:
        total += std::max(0.0, 1 - yi * f(i));
        break;
      case KernelLoss::kLogistic: {
        const double z = -yi * f(i);
        total += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        break;
      }
    }
  }
  return total / static_cast<double>(f.size()) + lambda * alpha.dot(k * alpha);
}

KernelModel kernel_fit_gradient(const GramMatrix& k, std::span<const double> y, double lambda, KernelLoss loss,
                                const GradientFitConfig& cfg, const Points& train_x) {
  require(lambda >= 0, ErrorCode::kInvalidArgument, "lambda must be >= 0");
  const Eigen::Index m = k.size();
  require(static_cast<Eigen::Index>(y.size()) == m, ErrorCode::kLengthMismatch, "label count differs from Gram size");
  const RVector yv = to_rvector(y);
  const double kmax = std::max(1e-300, sym_eig(k.k).eigenvalues().maxCoeff());
  // Steps along the functional gradient d = ∂L/∂f / M + 2λα, a descent
  // direction since ∇_α·d = dᵀKd ≥ 0. Curvature bound for the smooth losses:
  const double curv = (loss == KernelLoss::kLogistic ? 0.25 : 2.0) * kmax / static_cast<double>(m) + 2 * lambda;
  const double step = cfg.step > 0 ? cfg.step : 1.0 / curv;
  RVector alpha = RVector::Zero(m);
  RVector best = alpha;
  double best_obj = kernel_loss_objective(k.k, y, alpha, lambda, loss);
  for (int it = 0; it < cfg.iterations; ++it) {
    const RVector f = k.k * alpha;
    RVector dl(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      switch (loss) {
        case KernelLoss::kSquared:
          dl(i) = 2 * (f(i) - yv(i));
          break;
        case KernelLoss::kHinge:
          dl(i) = yv(i) * f(i) < 1 ? -yv(i) : 0.0;
          break;
        case KernelLoss::kLogistic:
          dl(i) = -yv(i) / (1 + std::exp(yv(i) * f(i)));
          break;
      }
    }
    const RVector d = dl / static_cast<double>(m) + 2 * lambda * alpha;
    const double eta = loss == KernelLoss::kHinge ? step / std::sqrt(1.0 + it) : step;
    alpha -= eta * d;
    const double obj = kernel_loss_objective(k.k, y, alpha, lambda, loss);
    if (obj < best_obj) {
      best_obj = obj;
      best = alpha;
    }
  }
  KernelModel model;
  model.alphas = best;
  model.train_x = train_x;
  model.encoding = k.encoding;
  model.lambda = lambda;
  return model;
}

double predict(const KernelModel& model, std::span<const double> x) {
  require(static_cast<Eigen::Index>(model.train_x.size()) == model.alphas.size(), ErrorCode::kInvalidArgument,
          "model has no training inputs");
  const StateVector psi = encode_state(model.encoding, x);
  double f = 0;
  for (std::size_t m = 0; m < model.train_x.size(); ++m) {
    const double a = model.alphas(static_cast<Eigen::Index>(m));
    if (a != 0) f += a * overlap2(encode_state(model.encoding, model.train_x[m]), psi);
  }
  return f;
}

std::string KernelModel::to_json() const {
  nlohmann::json j;
  j["encoding"] = nlohmann::json::parse(encoding.to_json());
  j["lambda"] = lambda;
  j["alphas"] = std::vector<double>(alphas.data(), alphas.data() + alphas.size());
  j["train_x"] = train_x;
  return j.dump();
}

KernelModel KernelModel::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    KernelModel m;
    m.encoding = EncodingSpec::from_json(j.at("encoding").dump());
    m.lambda = j.at("lambda").get<double>();
    const auto a = j.at("alphas").get<std::vector<double>>();
    m.alphas = Eigen::Map<const RVector>(a.data(), static_cast<Eigen::Index>(a.size()));
    m.train_x = j.at("train_x").get<Points>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("kernel model JSON: ") + e.what());
  }
}

double model_complexity(const RMatrix& k, std::span<const double> y, double rel_cutoff) {
  require(static_cast<Eigen::Index>(y.size()) == k.rows(), ErrorCode::kLengthMismatch, "label count mismatch");
  const RVector yv = to_rvector(y);
  return std::max(0.0, yv.dot(kernel_pinv(k, rel_cutoff) * yv));
}

double geometric_difference(const RMatrix& k1, const RMatrix& k2, double rel_cutoff) {
  require(k1.rows() == k2.rows() && k1.cols() == k2.cols(), ErrorCode::kDimensionMismatch, "kernel sizes differ");
  const auto e1 = sym_eig(k1);
  const double max1 = e1.eigenvalues().maxCoeff();
  require(max1 > 0 && e1.eigenvalues()(0) > rel_cutoff * max1, ErrorCode::kSingularK1, "K1 is not invertible");
  const RMatrix k1inv = e1.eigenvectors() * e1.eigenvalues().cwiseInverse().asDiagonal() * e1.eigenvectors().transpose();
  const auto e2 = sym_eig(k2);
  const RVector s2 = e2.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const RMatrix sq2 = e2.eigenvectors() * s2.asDiagonal() * e2.eigenvectors().transpose();
  const RMatrix m = sq2 * k1inv * sq2;
  return std::sqrt(std::max(0.0, sym_eig(m).eigenvalues().maxCoeff()));
}

int effective_dimension(const RMatrix& k, double tolerance) {
  const RVector e = sym_eig(k).eigenvalues();
  return static_cast<int>((e.array() > tolerance).count());
}

namespace {

RVector quadratic_features(std::span<const double> x) {
  const auto d = static_cast<Eigen::Index>(x.size());
  RVector f(d * (d + 1) / 2 + d + 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) f(k++) = x[i] * x[j];
  for (Eigen::Index i = 0; i < d; ++i) f(k++) = x[i];
  f(k) = 1.0;
  return f;
}

}  // namespace

QuadraticRegression fit_quadratic_features(const Points& x, std::span<const double> y) {
  require(!x.empty() && x.size() == y.size(), ErrorCode::kLengthMismatch, "bad regression data");
  QuadraticRegression r;
  r.dim = static_cast<int>(x.front().size());
  const Eigen::Index nf = quadratic_features(x.front()).size();
  RMatrix a(static_cast<Eigen::Index>(x.size()), nf);
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(static_cast<int>(x[i].size()) == r.dim, ErrorCode::kLengthMismatch, "ragged inputs");
    a.row(static_cast<Eigen::Index>(i)) = quadratic_features(x[i]).transpose();
  }
  r.weights = a.completeOrthogonalDecomposition().solve(to_rvector(y));
  return r;
}

double QuadraticRegression::predict(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == dim, ErrorCode::kLengthMismatch, "input dimension mismatch");
  return quadratic_features(x).dot(weights);
}

}  // namespace qmlab
